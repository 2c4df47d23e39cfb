#include <cmath>
#include <limits>
#include <set>

#include "doctest.h"
#include "fakes.hpp"
#include "hexit/core/error.hpp"
#include "hexit/core/notation.hpp"
#include "hexit/search/mcts.hpp"
#include "oracles.hpp"

using namespace hexit;
using namespace hexit::search;

namespace {

SearchConfig vanilla(int iterations, uint64_t seed = 1) {
  SearchConfig c = SearchConfig::defaults(SearchMode::vanilla);
  c.iterations = iterations;
  c.seed = seed;
  return c;
}

// Straight transcription of the blended score, for cross-checking.
double reference_score(const EdgeStats& e, const NodeStats& s, const SearchConfig& c) {
  const double inf = std::numeric_limits<double>::infinity();
  const double u = e.visits == 0 ? inf : e.reward / e.visits + c.c_b * std::sqrt(std::log(double(s.visits)) / e.visits);
  const double r = e.rave_visits == 0 ? inf
                                      : e.rave_reward / e.rave_visits +
                                            c.c_b * std::sqrt(std::log(double(s.rave_visits)) / e.rave_visits);
  const double beta = std::sqrt(c.c_rave / (3.0 * s.visits + c.c_rave));
  double out = beta * r + (1 - beta) * u;
  if (c.mode != SearchMode::vanilla) out += c.w_a * e.prior / (e.visits + 1);
  if (c.mode == SearchMode::policy_value && e.value_count > 0) out += c.w_v * e.value_sum / e.value_count;
  return out;
}

}  // namespace

TEST_CASE("mode defaults") {
  const auto v = SearchConfig::defaults(SearchMode::vanilla);
  CHECK(v.c_b == 0.25);
  CHECK(v.c_rave == 3000);
  CHECK(v.expansion_threshold == 0);
  CHECK(v.iterations == 10000);
  const auto p = SearchConfig::defaults(SearchMode::policy);
  CHECK(p.c_b == 0.05);
  CHECK(p.expansion_threshold == 1);
  CHECK(p.w_a == 100);
  CHECK(p.tau == 0.1);
  CHECK(p.w_v == 0);
  const auto pv = SearchConfig::defaults(SearchMode::policy_value);
  CHECK(pv.w_v == 0.75);
  CHECK(pv.w_a == 100);
  CHECK(parse_search_mode("policy_value") == SearchMode::policy_value);
  CHECK_THROWS_AS(parse_search_mode("greedy"), ConfigError);
}

TEST_CASE("uct and rave weight values") {
  CHECK(uct(3, 2, 10, 0.25) == doctest::Approx(1.5 + 0.25 * std::sqrt(std::log(10.0) / 2)).epsilon(1e-12));
  CHECK(uct(3, 2, 10, 0.25) == doctest::Approx(1.76823).epsilon(1e-5));
  CHECK(std::isinf(uct(0, 0, 10, 0.25)));
  CHECK(rave_beta(1000, 3000) == doctest::Approx(0.70711).epsilon(1e-5));
  CHECK(rave_beta(0, 3000) == 1.0);
  CHECK(rave_beta(10, 0) == 0.0);
}

TEST_CASE("blended score matches a direct transcription") {
  Rng rng(4);
  for (SearchMode mode : {SearchMode::vanilla, SearchMode::policy, SearchMode::policy_value}) {
    SearchConfig c = SearchConfig::defaults(mode);
    for (int k = 0; k < 200; ++k) {
      EdgeStats e;
      e.visits = 1 + uniform_int(rng, 50);
      e.reward = uniform_int(rng, static_cast<int>(e.visits) + 1);
      e.rave_visits = 1 + uniform_int(rng, 200);
      e.rave_reward = uniform_int(rng, static_cast<int>(e.rave_visits) + 1);
      e.prior = uniform_real(rng);
      e.value_count = uniform_int(rng, 3);
      e.value_sum = e.value_count * uniform_real(rng);
      NodeStats s{static_cast<uint32_t>(e.visits + uniform_int(rng, 500)), e.rave_visits + 300u, true};
      CHECK(tree_policy_score(e, s, c) == doctest::Approx(reference_score(e, s, c)).epsilon(1e-12));
    }
  }
}

TEST_CASE("score endpoints avoid 0 * inf") {
  SearchConfig c = vanilla(1);
  EdgeStats e;
  e.visits = 3;
  e.reward = 2;
  NodeStats s{10, 0, false};
  // Unvisited in RAVE terms with beta > 0: the edge is +inf.
  CHECK(std::isinf(tree_policy_score(e, s, c)));
  c.c_rave = 0;  // beta = 0: plain UCT regardless of RAVE statistics
  CHECK(tree_policy_score(e, s, c) == doctest::Approx(uct(2, 3, 10, c.c_b)));
}

TEST_CASE("selection ties break by prior, then by lowest index") {
  SearchConfig c = SearchConfig::defaults(SearchMode::policy);
  std::vector<EdgeStats> edges(3);
  for (int i = 0; i < 3; ++i) edges[i].cell = i;
  edges[0].prior = 0.2;
  edges[1].prior = 0.5;
  edges[2].prior = 0.3;
  NodeStats s{1, 0, true};
  CHECK(select_edge(edges, s, c) == 1);
  for (auto& e : edges) e.prior = 0.0;
  CHECK(select_edge(edges, s, c) == 0);
  CHECK(select_edge(edges, s, vanilla(1)) == 0);
  s.has_prior = false;
  CHECK_THROWS_AS(select_edge(edges, s, c), ConfigError);
}

TEST_CASE("search finds an immediate win on 3x3") {
  Board b(3);
  for (const char* m : {"a1", "c1", "a2", "c2"}) b.apply(parse_move(m, 3));
  const SearchResult r = run_search(b, vanilla(1000, 3));
  testing::Solver solver(3);
  CHECK(solver.move_wins(b, r.chosen.index(3)));
  CHECK(r.chosen == Move{2, 0});
  CHECK(r.root_value > 0.5);
}

TEST_CASE("chosen moves are solver-winning in won 3x3 positions") {
  testing::Solver solver(3);
  Rng rng(21);
  int tested = 0;
  for (int k = 0; k < 40; ++k) {
    Board b(3);
    const int plies = uniform_int(rng, 5);
    for (int p = 0; p < plies && !b.terminal(); ++p) {
      const auto moves = b.legal_moves();
      b.apply(moves[static_cast<size_t>(uniform_int(rng, static_cast<int>(moves.size())))]);
    }
    if (b.terminal()) continue;
    std::vector<Cell> cells(b.cells().begin(), b.cells().end());
    if (!solver.to_move_wins(cells, b.to_move())) continue;
    ++tested;
    const SearchResult r = run_search(b, vanilla(3000, k));
    CHECK(solver.move_wins(b, r.chosen.index(3)));
  }
  CHECK(tested > 10);
}

TEST_CASE("one iteration gives a one-hot distribution") {
  const SearchResult r = run_search(Board(5), vanilla(1));
  CHECK(r.total_visits == 1);
  const auto d = r.distribution();
  int ones = 0;
  for (double p : d) {
    CHECK((p == 0.0 || p == 1.0));
    ones += p == 1.0;
  }
  CHECK(ones == 1);
  CHECK(d[0] == 1.0);  // all unvisited: lowest index first
}

TEST_CASE("root visit counts sum to the iteration budget") {
  for (int iterations : {1, 7, 100, 1000}) {
    const SearchResult r = run_search(Board(4), vanilla(iterations, iterations));
    CHECK(r.total_visits == static_cast<uint32_t>(iterations));
    double sum = 0;
    for (double p : r.distribution()) sum += p;
    CHECK(sum == doctest::Approx(1.0));
  }
}

TEST_CASE("search is deterministic for a fixed seed") {
  const Board b = parse_diagram(". B . .\n . W . .\n  . . . .\n   . . . .\n");
  const SearchResult a = run_search(b, vanilla(2000, 9));
  const SearchResult c = run_search(b, vanilla(2000, 9));
  CHECK(a.root_visits == c.root_visits);
  CHECK(a.chosen == c.chosen);
  const SearchResult d = run_search(b, vanilla(2000, 10));
  CHECK(a.root_visits != d.root_visits);
}

TEST_CASE("terminal roots and missing networks are rejected") {
  Board b(2);
  b.apply({0, 0});
  b.apply({0, 1});
  b.apply({1, 0});
  CHECK_THROWS_AS(run_search(b, vanilla(10)), InvalidMove);

  SearchConfig p = SearchConfig::defaults(SearchMode::policy);
  p.iterations = 10;
  CHECK_THROWS_AS(run_search(Board(3), p), ConfigError);
  SearchConfig pv = SearchConfig::defaults(SearchMode::policy_value);
  pv.iterations = 10;
  testing::FakeEvaluator no_value;
  CHECK_THROWS_AS(run_search(Board(3), pv, &no_value), ConfigError);
}

TEST_CASE("RAVE statistics only credit the same player's moves") {
  Search s(Board(2), vanilla(1, 5));
  CHECK_FALSE(s.advance().has_value());
  REQUIRE(s.nodes().size() == 2);
  std::set<int> black, white;
  for (const EdgeStats& e : s.edges_of(0)) {
    CHECK(e.rave_visits <= 1);
    if (e.rave_visits) black.insert(e.cell);
  }
  for (const EdgeStats& e : s.edges_of(1)) {
    CHECK(e.rave_visits <= 1);
    if (e.rave_visits) white.insert(e.cell);
  }
  CHECK(black.count(0) == 1);  // the action taken at the root counts itself
  CHECK_FALSE(white.empty());
  for (int c : black) CHECK(white.count(c) == 0);
  // RAVE rewards are in the mover's perspective, like plain rewards.
  const EdgeStats& taken = s.edges_of(0)[0];
  CHECK(taken.rave_reward == taken.reward);
}

TEST_CASE("node RAVE totals equal the sum over their edges") {
  Search s(Board(4), vanilla(500, 2));
  s.advance();
  for (size_t i = 0; i < s.nodes().size(); ++i) {
    uint64_t total = 0;
    uint64_t visits = 0;
    for (const EdgeStats& e : s.edges_of(static_cast<int>(i))) {
      total += e.rave_visits;
      visits += e.visits;
      CHECK(e.reward <= e.visits);
      CHECK(e.rave_reward <= e.rave_visits);
    }
    CHECK(s.nodes()[i].stats.rave_visits == total);
    // A node's visits are its edges' visits plus the simulation that created it.
    if (s.nodes()[i].edge_count > 0) CHECK(s.nodes()[i].stats.visits == visits + 1);
  }
}

TEST_CASE("child rewards are complementary to the parent edge") {
  Search s(Board(3), vanilla(300, 8));
  s.advance();
  for (const EdgeStats& e : s.edges_of(0)) {
    if (e.child < 0) continue;
    double child_reward = 0;
    uint32_t child_visits = 0;
    for (const EdgeStats& f : s.edges_of(e.child)) {
      child_reward += f.reward;
      child_visits += f.visits;
    }
    // Every visit through the child except the creating one passes one of its edges.
    CHECK(child_visits + 1 == e.visits);
    const double first = e.reward - (child_visits - child_reward);
    CHECK((first == 0.0 || first == 1.0));
  }
}

TEST_CASE("argmax is invariant to scaling the counts") {
  std::vector<std::pair<int, uint32_t>> v = {{0, 3}, {4, 9}, {7, 9}, {8, 1}};
  CHECK(argmax_cell(v) == 4);
  for (auto& [c, n] : v) n *= 13;
  CHECK(argmax_cell(v) == 4);
}

TEST_CASE("expansion threshold delays node creation") {
  Search eager(Board(5), vanilla(400, 3));
  eager.advance();
  SearchConfig c = vanilla(400, 3);
  c.expansion_threshold = 1;
  Search lazy(Board(5), c);
  lazy.advance();
  CHECK(eager.nodes().size() > 390);
  CHECK(lazy.nodes().size() < eager.nodes().size());
}

TEST_CASE("a strong prior steers a short neural search") {
  SearchConfig c = SearchConfig::defaults(SearchMode::policy);
  c.iterations = 50;
  testing::FakeEvaluator favour_12([](int cell) { return cell == 12 ? 100.0 : 1.0; });
  const SearchResult r = run_search(Board(5), c, &favour_12);
  CHECK(r.chosen == Move{2, 2});
  // One evaluation per node that joined the tree.
  Search s(Board(5), c);
  testing::FakeEvaluator uniform;
  while (auto req = s.advance()) s.resume(uniform.evaluate(std::span(&*req, 1)).front());
  size_t evaluated = 0;
  for (const auto& n : s.nodes()) evaluated += n.evaluated && n.edge_count > 0;
  CHECK(uniform.evaluations() == evaluated);
}

TEST_CASE("value estimates are backed up in each mover's perspective") {
  SearchConfig c = SearchConfig::defaults(SearchMode::policy_value);
  c.iterations = 200;
  testing::FakeEvaluator ev([](int) { return 1.0; }, 0.8);
  Search s(Board(4), c);
  while (auto req = s.advance()) s.resume(ev.evaluate(std::span(&*req, 1)).front());
  for (size_t i = 0; i < s.nodes().size(); ++i) {
    for (const EdgeStats& e : s.edges_of(static_cast<int>(i))) {
      CHECK(e.value_count <= e.visits);
      if (e.value_count == 0) continue;
      // Each backed-up value is 0.8 or 0.2 depending on parity.
      const double mean = e.value_sum / e.value_count;
      CHECK(mean >= 0.2 - 1e-12);
      CHECK(mean <= 0.8 + 1e-12);
    }
  }
  // A root edge whose child was evaluated receives 1 - V(child) = 0.2 from it.
  const EdgeStats& first = s.edges_of(0)[0];
  if (first.value_count == 1) CHECK(first.value_sum == doctest::Approx(0.2));
}

TEST_CASE("suspended searches interleave without interfering") {
  SearchConfig c = SearchConfig::defaults(SearchMode::policy);
  c.iterations = 120;
  c.seed = 77;
  testing::FakeEvaluator ev([](int cell) { return 1.0 + cell % 3; });
  const SearchResult alone = run_search(Board(4), c, &ev);
  Search a(Board(4), c), b(Board(4), c);
  auto ra = a.advance();
  auto rb = b.advance();
  while (ra || rb) {
    std::vector<EvalRequest> batch;
    if (ra) batch.push_back(*ra);
    if (rb) batch.push_back(*rb);
    auto out = ev.evaluate(batch);
    size_t k = 0;
    if (ra) {
      a.resume(out[k++]);
      ra = a.advance();
    }
    if (rb) {
      b.resume(out[k++]);
      rb = b.advance();
    }
  }
  CHECK(a.result().root_visits == alone.root_visits);
  CHECK(b.result().root_visits == alone.root_visits);
}
