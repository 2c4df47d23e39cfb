#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>

#include "doctest.h"
#include "fakes.hpp"
#include "hexit/core/error.hpp"
#include "hexit/core/notation.hpp"
#include "hexit/imitation/builder.hpp"
#include "oracles.hpp"

using namespace hexit;
using namespace hexit::imitation;

namespace {

search::SearchConfig vanilla(int iterations) {
  search::SearchConfig c = search::SearchConfig::defaults(search::SearchMode::vanilla);
  c.iterations = iterations;
  return c;
}

std::shared_ptr<const nn::Network<float>> small_net(int n, uint64_t seed) {
  nn::NetworkConfig c = nn::NetworkConfig::desk(n);
  c.filters = 4;
  c.seed = seed;
  return std::make_shared<const nn::Network<float>>(c);
}

Dataset small_dataset() {
  InitialDatasetConfig c;
  c.board_size = 4;
  c.count = 12;
  c.explore_iterations = 20;
  c.expert = vanilla(50);
  c.seed = 5;
  return build_initial_dataset(c);
}

}  // namespace

TEST_CASE("sampled positions lie inside the game") {
  RandomAgent random;
  Rng rng(1);
  for (int k = 0; k < 500; ++k) {
    const Board b = sample_position(2, random, rng);
    CHECK(!b.terminal());
    CHECK(b.ply() < 4);
  }
}

TEST_CASE("sampled positions are reproducible from the seed") {
  RandomAgent random;
  Rng a(99), b(99);
  CHECK(sample_position(5, random, a) == sample_position(5, random, b));
}

TEST_CASE("sampled plies are uniform within each game") {
  // Oracle: P(ply = k) = E[1{k < L} / L] estimated from independent random
  // game lengths L.
  const int n = 5;
  const int draws = 10000;
  Rng length_rng(7);
  std::vector<double> expected(n * n, 0.0);
  const int games = 50000;
  for (int g = 0; g < games; ++g) {
    Board b(n);
    while (!b.terminal()) {
      const auto moves = b.legal_moves();
      b.apply(moves[static_cast<size_t>(uniform_int(length_rng, static_cast<int>(moves.size())))]);
    }
    for (int k = 0; k < b.ply(); ++k) expected[k] += 1.0 / b.ply() / games;
  }
  RandomAgent random;
  Rng rng(8);
  std::vector<int> observed(n * n, 0);
  for (int d = 0; d < draws; ++d) ++observed[sample_position(n, random, rng).ply()];
  double chi2 = 0.0;
  int bins = 0;
  for (int k = 0; k < n * n; ++k) {
    const double e = expected[k] * draws;
    if (e < 5) continue;
    chi2 += (observed[k] - e) * (observed[k] - e) / e;
    ++bins;
  }
  // About 20 bins; the 99.9% point of chi-square(20) is 45.3.
  CHECK(bins > 10);
  CHECK(chi2 < 2.5 * bins);
}

TEST_CASE("the expert finds the winning move of a 3x3 forced win") {
  Board b(3);
  for (const char* m : {"a1", "c1", "a2", "c2"}) b.apply(parse_move(m, 3));
  const auto sample = label_with_expert({b, {0, 0, 4}, 11}, vanilla(1000), nullptr);
  REQUIRE(sample);
  testing::Solver solver(3);
  CHECK(solver.move_wins(b, sample->chosen));
}

TEST_CASE("labels are one-hot for a one-iteration expert and sum to one") {
  Rng rng(3);
  RandomAgent random;
  for (int k = 0; k < 20; ++k) {
    const Board b = sample_position(4, random, rng);
    const auto one = label_with_expert({b, {0, static_cast<uint32_t>(k), 0}, rng()}, vanilla(1), nullptr);
    REQUIRE(one);
    CHECK(one->visits.size() == 1);
    CHECK(one->total == 1);
    const auto many = label_with_expert({b, {0, static_cast<uint32_t>(k), 0}, rng()}, vanilla(200), nullptr);
    REQUIRE(many);
    double sum = 0.0;
    for (double p : many->tpt()) sum += p;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_NOTHROW(many->validate());
  }
}

TEST_CASE("terminal positions get no label") {
  RandomAgent random;
  Rng rng(4);
  Board b(3);
  while (!b.terminal()) b.apply(random.select_move(b, rng));
  CHECK(!label_with_expert({b, {}, 1}, vanilla(10), nullptr));
}

TEST_CASE("initial datasets") {
  InitialDatasetConfig c;
  c.board_size = 3;
  c.explore_iterations = 10;
  c.expert = vanilla(30);
  c.count = 0;
  CHECK(build_initial_dataset(c).size() == 0);

  c.count = 100;
  const Dataset d = build_initial_dataset(c);
  CHECK(d.size() == 100);
  std::set<std::pair<uint32_t, uint32_t>> ids;
  for (const auto& s : d.samples) {
    ids.insert({s.provenance.iteration, s.provenance.game});
    CHECK(s.provenance.ply == s.history.size());
    CHECK_NOTHROW(s.validate());
  }
  CHECK(ids.size() == 100);
  CHECK(d.info.explorer == explorer_descriptor(10));
  CHECK(build_initial_dataset(c) == d);
}

TEST_CASE("datasets round-trip byte for byte") {
  Dataset d = small_dataset();
  d.samples[0].value = ValueTarget{1, 1};
  d.samples[1].value = ValueTarget{2, 3};
  const std::string text = dataset_to_string(d);
  std::istringstream in(text);
  const Dataset back = read_dataset(in);
  CHECK(back == d);
  CHECK(dataset_to_string(back) == text);

  const auto path = std::filesystem::temp_directory_path() / "hexit_unit_dataset";
  save_dataset(d, path);
  CHECK(load_dataset(path) == d);
  std::filesystem::remove(path);
}

TEST_CASE("malformed datasets are rejected") {
  const std::string text = dataset_to_string(small_dataset());
  auto parse = [](const std::string& s) {
    std::istringstream in(s);
    return read_dataset(in);
  };
  CHECK_THROWS_AS(parse("not a dataset\n"), FormatError);
  std::string bad_total = text;
  const size_t pos = bad_total.find("total=");
  bad_total.insert(pos + 6, "9");
  CHECK_THROWS_AS(parse(bad_total), FormatError);
  CHECK_THROWS_AS(parse(text.substr(0, text.size() / 2)), FormatError);
}

TEST_CASE("DAgger extension") {
  Dataset d = small_dataset();
  const auto net = small_net(4, 3);
  const Dataset before = d;
  dagger_extend(d, net, 0, vanilla(30), nullptr, 9, 1);
  CHECK(d == before);

  dagger_extend(d, net, 5, vanilla(30), nullptr, 9, 1);
  dagger_extend(d, net, 5, vanilla(30), nullptr, 9, 1);
  CHECK(d.size() == before.size() + 10);
  std::set<std::pair<uint32_t, uint32_t>> ids;
  for (const auto& s : d.samples) ids.insert({s.provenance.iteration, s.provenance.game});
  CHECK(ids.size() == d.size());
}

TEST_CASE("apprentice-sampled positions match the apprentice's own games") {
  const int n = 5;
  const auto net = small_net(n, 4);
  ApprenticeAgent explorer(net, Selection::sample);
  // Oracle: mean ply of the uniformly drawn position, (L - 1) / 2 averaged
  // over independent self-play games.
  Rng self_rng(10);
  double expected = 0.0;
  const int games = 400;
  for (int g = 0; g < games; ++g) {
    Board b(n);
    while (!b.terminal()) b.apply(explorer.select_move(b, self_rng));
    expected += (b.ply() - 1) / 2.0 / games;
  }
  const auto tasks = explore_positions(n, explorer, 17, 1, 0, 400);
  double mean = 0.0;
  for (const auto& t : tasks) mean += static_cast<double>(t.position.ply()) / tasks.size();
  CHECK(std::abs(mean - expected) <= 0.3 * expected);
}

TEST_CASE("validation split holds out a fixed share of every iteration") {
  std::vector<TrainingSample> samples;
  Dataset d = small_dataset();
  for (uint32_t it = 0; it < 2; ++it) {
    for (auto s : d.samples) {
      s.provenance.iteration = it;
      samples.push_back(s);
    }
  }
  auto [train, validation] = split_validation(samples, 0.25, 4);
  CHECK(validation.size() == 2 * 3);
  CHECK(train.size() + validation.size() == samples.size());
  auto [train2, validation2] = split_validation(samples, 0.25, 4);
  REQUIRE(validation2.size() == validation.size());
  for (size_t i = 0; i < validation.size(); ++i) CHECK(validation[i].position == validation2[i].position);
  auto [all, none] = split_validation(samples, 0.0, 4);
  CHECK(none.empty());
  CHECK(all.size() == samples.size());
}

TEST_CASE("agents") {
  SUBCASE("network modes need a network") {
    CHECK_THROWS_AS(MctsAgent(search::SearchConfig::defaults(search::SearchMode::policy)), ConfigError);
    auto policy_only = std::make_shared<testing::FakeEvaluator>();
    CHECK_THROWS_AS(MctsAgent(search::SearchConfig::defaults(search::SearchMode::policy_value), policy_only),
                    ConfigError);
  }
  SUBCASE("vanilla search consumes no network evaluations") {
    MctsAgent agent(vanilla(50));
    Rng rng(1);
    CHECK(agent.decide(Board(5), rng).evaluations == 0);
    CHECK(agent.evaluations() == 0);
  }
  SUBCASE("neural search counts one evaluation per evaluated node") {
    search::SearchConfig c = search::SearchConfig::defaults(search::SearchMode::policy);
    c.iterations = 100;
    auto ev = std::make_shared<testing::FakeEvaluator>();
    MctsAgent agent(c, ev);
    Rng rng(1);
    const Decision d = agent.decide(Board(5), rng);
    CHECK(d.evaluations > 0);
    CHECK(d.evaluations == ev->evaluations());
  }
  SUBCASE("the greedy apprentice costs one evaluation per move") {
    ApprenticeAgent agent(small_net(4, 1));
    Rng rng(1);
    Board b(4);
    while (!b.terminal()) b.apply(agent.select_move(b, rng));
    CHECK(agent.evaluations() == static_cast<uint64_t>(b.ply()));
  }
  SUBCASE("sample_index follows the weights") {
    Rng rng(2);
    const std::vector<double> w = {0.0, 1.0, 3.0, 0.0};
    std::vector<int> counts(4, 0);
    for (int k = 0; k < 40000; ++k) ++counts[sample_index(w, rng)];
    CHECK(counts[0] == 0);
    CHECK(counts[3] == 0);
    CHECK(counts[2] / 40000.0 == doctest::Approx(0.75).epsilon(0.02));
  }
}
