#include <cmath>
#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "hexit/core/error.hpp"
#include "hexit/evaluation/curve.hpp"
#include "hexit/evaluation/elo.hpp"
#include "hexit/evaluation/match.hpp"
#include "hexit/exit/exit.hpp"

using namespace hexit;
using namespace hexit::evaluation;
namespace fs = std::filesystem;

namespace {

MatchRecord game(const std::string& a, const std::string& b, const std::string& winner) {
  MatchRecord r;
  r.agent_a = a;
  r.agent_b = b;
  r.black = a;
  r.winner = winner;
  return r;
}

void add_games(std::vector<MatchRecord>& out, const std::string& a, const std::string& b, int wins_a, int wins_b) {
  for (int k = 0; k < wins_a; ++k) out.push_back(game(a, b, a));
  for (int k = 0; k < wins_b; ++k) out.push_back(game(a, b, b));
}

// Records drawn from the Elo model with the given true ratings.
std::vector<MatchRecord> synthetic(const std::vector<double>& truth, int games_per_pair, uint64_t seed) {
  Rng rng(seed);
  std::vector<MatchRecord> out;
  for (size_t i = 0; i < truth.size(); ++i) {
    for (size_t j = i + 1; j < truth.size(); ++j) {
      const double p = 1.0 / (1.0 + std::pow(10.0, (truth[j] - truth[i]) / 400.0));
      const std::string a = "p" + std::to_string(i), b = "p" + std::to_string(j);
      for (int g = 0; g < games_per_pair; ++g) out.push_back(game(a, b, uniform_real(rng) < p ? a : b));
    }
  }
  return out;
}

std::shared_ptr<const nn::Network<float>> small_net(int n, uint64_t seed) {
  nn::NetworkConfig c = nn::NetworkConfig::desk(n);
  c.filters = 4;
  c.seed = seed;
  return std::make_shared<const nn::Network<float>>(c);
}

}  // namespace

TEST_CASE("opening sweeps cover every first move once per colour") {
  imitation::RandomAgent a("random-a"), b("random-b");
  for (int n : {5, 9}) {
    MatchConfig c;
    c.board_size = n;
    c.sweep = true;
    c.seed = 3;
    const MatchResult r = play_match(a, b, c);
    REQUIRE(r.records.size() == static_cast<size_t>(2 * n * n));
    int a_black = 0;
    std::vector<int> per_opening(n * n, 0);
    for (const auto& rec : r.records) {
      a_black += rec.black == "random-a";
      ++per_opening[rec.opening];
      CHECK(rec.moves.front() == rec.opening);
      CHECK(rec.evaluations_a == 0);
      CHECK(rec.evaluations_b == 0);
    }
    CHECK(a_black == n * n);
    for (int count : per_opening) CHECK(count == 2);
    CHECK(r.wins_a + r.wins_b == 2 * n * n);
  }
}

TEST_CASE("identical deterministic agents give a degenerate match") {
  const auto net = small_net(4, 1);
  imitation::ApprenticeAgent a(net, imitation::Selection::greedy, 1.0, "greedy-a");
  imitation::ApprenticeAgent b(net, imitation::Selection::greedy, 1.0, "greedy-b");
  MatchConfig c;
  c.board_size = 4;
  c.games = 20;
  const MatchResult r = play_match(a, b, c);
  CHECK(r.duplicates == 18);
  CHECK(r.degenerate);

  c.opening_plies = 2;
  const MatchResult opened = play_match(a, b, c);
  CHECK(!opened.degenerate);
  // Colour-swapped pairs share their opening.
  for (size_t k = 0; k + 1 < opened.records.size(); k += 2) {
    CHECK(opened.records[k].moves[0] == opened.records[k + 1].moves[0]);
    CHECK(opened.records[k].moves[1] == opened.records[k + 1].moves[1]);
  }
}

TEST_CASE("matches are deterministic and independent of the worker count") {
  search::SearchConfig sc = search::SearchConfig::defaults(search::SearchMode::vanilla);
  sc.iterations = 30;
  imitation::MctsAgent a(sc, nullptr, imitation::Selection::sample, "mcts-a");
  imitation::RandomAgent b;
  MatchConfig c;
  c.board_size = 4;
  c.games = 12;
  c.seed = 8;
  const MatchResult one = play_match(a, b, c);
  c.workers = 3;
  const MatchResult three = play_match(a, b, c);
  REQUIRE(one.records.size() == three.records.size());
  for (size_t k = 0; k < one.records.size(); ++k) {
    CHECK(one.records[k].moves == three.records[k].moves);
    CHECK(one.records[k].winner == three.records[k].winner);
  }
  CHECK_THROWS_AS(play_match(b, b, c), ConfigError);
}

TEST_CASE("apprentice moves are counted as network evaluations") {
  const auto net = small_net(4, 2);
  imitation::ApprenticeAgent a(net);
  imitation::RandomAgent b;
  MatchConfig c;
  c.board_size = 4;
  c.games = 4;
  for (const auto& r : play_match(a, b, c).records) {
    const uint64_t a_moves = r.black == "apprentice" ? (r.plies + 1) / 2 : r.plies / 2;
    CHECK(r.evaluations_a == a_moves);
    CHECK(r.evaluations_b == 0);
  }
}

TEST_CASE("match logs round-trip") {
  imitation::RandomAgent a("ra"), b("rb");
  MatchConfig c;
  c.board_size = 3;
  c.sweep = true;
  const auto records = play_match(a, b, c).records;
  std::ostringstream out;
  write_match_records(out, records);
  std::istringstream in(out.str());
  const auto back = read_match_records(in);
  CHECK(back == records);
  std::ostringstream again;
  write_match_records(again, back);
  CHECK(again.str() == out.str());

  std::istringstream bad("# hexit-matches v1 games=1\na=x b=y black=x opening=-1 winner=z plies=0 moves= "
                         "sec_per_move=0 evals_a=0 evals_b=0\n");
  CHECK_THROWS_AS(read_match_records(bad), FormatError);
}

TEST_CASE("two-agent Elo matches the closed form") {
  std::vector<MatchRecord> records;
  add_games(records, "a", "b", 75, 25);
  const EloTable t = fit_elo(records);
  const double expected = 400.0 * std::log10(75.0 / 25.0);
  CHECK(std::abs(expected - 190.85) < 0.01);
  CHECK(t.rating("a") == 0.0);
  CHECK(std::abs(-t.rating("b") - expected) < 0.5);
  CHECK(t.converged);
}

TEST_CASE("symmetric records give equal ratings") {
  std::vector<MatchRecord> records;
  add_games(records, "a", "b", 10, 10);
  add_games(records, "b", "c", 7, 7);
  add_games(records, "a", "c", 3, 3);
  const EloTable t = fit_elo(records);
  for (double r : t.ratings) CHECK(std::abs(r) < 0.05);
}

TEST_CASE("synthetic tournaments recover the true ratings") {
  const std::vector<double> truth = {0.0, 120.0, -150.0, 260.0, 40.0};
  const EloTable t = fit_elo(synthetic(truth, 1000, 11));
  for (size_t i = 0; i < truth.size(); ++i) {
    CAPTURE(i);
    CHECK(std::abs(t.rating("p" + std::to_string(i)) - truth[i]) <= 25.0);
  }
  // Shifting every true rating leaves the anchored fit unchanged.
  std::vector<double> shifted = truth;
  for (double& r : shifted) r += 500.0;
  const EloTable s = fit_elo(synthetic(shifted, 1000, 11));
  for (size_t i = 0; i < truth.size(); ++i) CHECK(s.ratings[i] == doctest::Approx(t.ratings[i]).epsilon(1e-6));
}

TEST_CASE("Elo needs connected records") {
  std::vector<MatchRecord> records;
  add_games(records, "a", "b", 5, 5);
  add_games(records, "c", "d", 5, 5);
  try {
    fit_elo(records);
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("{a, b}") != std::string::npos);
    CHECK(msg.find("{c, d}") != std::string::npos);
  }
  CHECK_THROWS_AS(fit_elo(records, {1.0}), ConfigError);

  std::vector<MatchRecord> unbeaten;
  add_games(unbeaten, "a", "b", 10, 0);
  add_games(unbeaten, "b", "c", 5, 5);
  CHECK_THROWS_AS(fit_elo(unbeaten), ConfigError);
  const EloTable t = fit_elo(unbeaten, {1.0});
  CHECK(t.rating("b") < -300.0);
  CHECK(std::isfinite(t.rating("b")));
}

TEST_CASE("training curves") {
  const fs::path dir = fs::temp_directory_path() / "hexit_unit_curve";
  fs::remove_all(dir);
  exit::ExitConfig c;
  c.board_size = 4;
  c.max_iterations = 0;
  c.moves_per_iteration = 24;
  c.buffer_capacity = 24;
  c.explore_iterations = 10;
  c.vanilla_expert.iterations = 40;
  c.policy_expert.iterations = 40;
  c.value_trigger = 0;
  c.network = nn::NetworkConfig::desk(4);
  c.network.filters = 4;
  c.train.batch_size = 8;
  c.train.max_epochs = 3;
  c.validation_fraction = 0.25;
  exit::run_exit(c, dir);

  Curve single = training_curve(dir);
  REQUIRE(single.points.size() == 1);
  CHECK(single.points[0].elo == 0.0);
  CHECK(single.points[0].evaluations == 0);

  c.max_iterations = 2;
  const exit::RunManifest m = exit::run_exit(c, dir);
  CurveConfig cc;
  cc.games_per_pair = 10;
  const Curve curve = training_curve(dir, cc);
  REQUIRE(curve.points.size() == 3);
  CHECK(curve.records.size() == 30);
  CHECK(curve.points[0].elo == 0.0);
  CHECK(curve.points[2].evaluations == m.iterations[1].cumulative_evaluations);
  std::ostringstream out;
  write_curve(out, curve);
  CHECK(out.str().rfind("# evaluations elo\n0 0.00\n", 0) == 0);
  fs::remove_all(dir);
}
