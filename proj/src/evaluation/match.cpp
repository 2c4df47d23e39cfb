#include "hexit/evaluation/match.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "hexit/core/error.hpp"

namespace hexit::evaluation {

namespace {

constexpr std::string_view kHeader = "# hexit-matches v1";

MatchRecord play_game(imitation::Agent& a, imitation::Agent& b, const MatchConfig& config, int k) {
  const int n = config.board_size;
  const bool a_black = k % 2 == 0;
  MatchRecord rec;
  rec.agent_a = a.id();
  rec.agent_b = b.id();
  rec.black = a_black ? rec.agent_a : rec.agent_b;

  Board board(n);
  if (config.sweep) {
    rec.opening = k / 2;
    board.apply(Move::from_index(rec.opening, n));
  } else if (config.opening_plies > 0) {
    // Both games of a colour-swapped pair share the opening.
    Rng opening_rng(derive_seed(config.seed, Stream::match, {static_cast<uint64_t>(k / 2), 0}));
    for (int p = 0; p < config.opening_plies && !board.terminal(); ++p) {
      const auto moves = board.legal_moves();
      board.apply(moves[static_cast<size_t>(uniform_int(opening_rng, static_cast<int>(moves.size())))]);
    }
  }
  Rng rng(derive_seed(config.seed, Stream::match, {static_cast<uint64_t>(k), 1}));
  const auto start = std::chrono::steady_clock::now();
  int agent_moves = 0;
  while (!board.terminal()) {
    const bool a_to_move = (board.to_move() == Color::Black) == a_black;
    const imitation::Decision d = (a_to_move ? a : b).decide(board, rng);
    (a_to_move ? rec.evaluations_a : rec.evaluations_b) += d.evaluations;
    board.apply(d.move);
    ++agent_moves;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  rec.seconds_per_move = agent_moves ? seconds / agent_moves : 0.0;
  const bool black_won = *board.winner() == Color::Black;
  rec.winner = black_won == a_black ? rec.agent_a : rec.agent_b;
  rec.plies = board.ply();
  for (Move m : board.history()) rec.moves.push_back(m.index(n));
  return rec;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  if (text.empty()) return parts;
  size_t start = 0;
  while (true) {
    const size_t pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace

MatchResult play_match(imitation::Agent& a, imitation::Agent& b, const MatchConfig& config) {
  const int n = config.board_size;
  if (n < kMinBoardSize || n > kMaxBoardSize) throw ConfigError("match board size out of range");
  if (a.id() == b.id()) throw ConfigError("match agents need distinct ids (both are '" + a.id() + "')");
  const int games = config.sweep ? 2 * n * n : config.games;
  if (games < 0) throw ConfigError("negative game count");

  MatchResult result;
  result.records.resize(static_cast<size_t>(games));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int k = next++; k < games; k = next++) {
      try {
        result.records[static_cast<size_t>(k)] = play_game(a, b, config, k);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = games;
      }
    }
  };
  const int workers = std::max(1, std::min(config.workers, games));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < workers; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::set<std::pair<std::string, std::vector<int>>> seen;
  for (const MatchRecord& r : result.records) {
    (r.winner == r.agent_a ? result.wins_a : result.wins_b) += 1;
    if (!seen.insert({r.black, r.moves}).second) ++result.duplicates;
  }
  result.degenerate = games > 0 && 2 * result.duplicates > games;
  return result;
}

void write_match_records(std::ostream& out, const std::vector<MatchRecord>& records) {
  out << kHeader << " games=" << records.size() << '\n';
  for (const MatchRecord& r : records) {
    out << "a=" << r.agent_a << " b=" << r.agent_b << " black=" << r.black << " opening=" << r.opening
        << " winner=" << r.winner << " plies=" << r.plies << " moves=";
    for (size_t i = 0; i < r.moves.size(); ++i) out << (i ? "," : "") << r.moves[i];
    std::ostringstream t;
    t.precision(17);
    t << r.seconds_per_move;
    out << " sec_per_move=" << t.str() << " evals_a=" << r.evaluations_a << " evals_b=" << r.evaluations_b << '\n';
  }
}

std::vector<MatchRecord> read_match_records(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind(kHeader, 0) != 0) throw FormatError("match log: missing header");
  std::vector<MatchRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::map<std::string, std::string> kv;
    std::istringstream ls(line);
    std::string token;
    while (ls >> token) {
      const size_t eq = token.find('=');
      if (eq == std::string::npos) throw FormatError("match log: malformed token '" + token + "'");
      kv[token.substr(0, eq)] = token.substr(eq + 1);
    }
    auto get = [&](const char* key) -> const std::string& {
      auto it = kv.find(key);
      if (it == kv.end()) throw FormatError(std::string("match log: record lacks '") + key + "'");
      return it->second;
    };
    MatchRecord r;
    try {
      r.agent_a = get("a");
      r.agent_b = get("b");
      r.black = get("black");
      r.opening = std::stoi(get("opening"));
      r.winner = get("winner");
      r.plies = std::stoi(get("plies"));
      for (std::string_view m : split(get("moves"), ',')) r.moves.push_back(std::stoi(std::string(m)));
      r.seconds_per_move = std::stod(get("sec_per_move"));
      r.evaluations_a = std::stoull(get("evals_a"));
      r.evaluations_b = std::stoull(get("evals_b"));
    } catch (const std::logic_error& e) {
      throw FormatError(std::string("match log: bad number: ") + e.what());
    }
    if (r.winner != r.agent_a && r.winner != r.agent_b) throw FormatError("match log: winner is not a participant");
    if (static_cast<int>(r.moves.size()) != r.plies) throw FormatError("match log: move count disagrees with plies");
    records.push_back(std::move(r));
  }
  return records;
}

void save_match_records(const std::vector<MatchRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  write_match_records(out, records);
}

std::vector<MatchRecord> load_match_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open match log " + path.string());
  return read_match_records(in);
}

}  // namespace hexit::evaluation
