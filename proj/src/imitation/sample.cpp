#include "hexit/imitation/sample.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "hexit/core/error.hpp"

namespace hexit::imitation {

namespace {

constexpr std::string_view kHeader = "# hexit-dataset v1";

template <typename Int>
Int parse_int(std::string_view text, std::string_view what) {
  Int value{};
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw FormatError("dataset: bad " + std::string(what) + " '" + std::string(text) + "'");
  }
  return value;
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

std::map<std::string, std::string> key_values(const std::string& line) {
  std::map<std::string, std::string> out;
  std::istringstream in(line);
  std::string token;
  while (in >> token) {
    const size_t eq = token.find('=');
    if (eq == std::string::npos) throw FormatError("dataset: malformed token '" + token + "'");
    out[token.substr(0, eq)] = token.substr(eq + 1);
  }
  return out;
}

const std::string& field(const std::map<std::string, std::string>& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw FormatError("dataset: record lacks '" + key + "'");
  return it->second;
}

TrainingSample parse_record(const std::string& line) {
  const auto kv = key_values(line);
  TrainingSample s;
  s.provenance.iteration = parse_int<uint32_t>(field(kv, "it"), "iteration");
  s.provenance.game = parse_int<uint32_t>(field(kv, "game"), "game");
  s.provenance.ply = parse_int<uint32_t>(field(kv, "ply"), "ply");
  s.board_size = parse_int<int>(field(kv, "size"), "board size");
  for (std::string_view c : split(field(kv, "history"), ',')) s.history.push_back(parse_int<int>(c, "history cell"));
  s.total = parse_int<uint32_t>(field(kv, "total"), "total");
  for (std::string_view pair : split(field(kv, "tpt"), ',')) {
    const auto parts = split(pair, ':');
    if (parts.size() != 2) throw FormatError("dataset: bad visit pair '" + std::string(pair) + "'");
    s.visits.emplace_back(parse_int<int>(parts[0], "visit cell"), parse_int<uint32_t>(parts[1], "visit count"));
  }
  s.chosen = parse_int<int>(field(kv, "chosen"), "chosen cell");
  const std::string& z = field(kv, "z");
  if (z != "-") {
    const auto parts = split(z, '/');
    if (parts.size() != 2) throw FormatError("dataset: bad value target '" + z + "'");
    s.value = ValueTarget{parse_int<uint32_t>(parts[0], "value wins"), parse_int<uint32_t>(parts[1], "value games")};
  }
  const std::string& mover = field(kv, "to_move");
  if (mover != std::string(1, color_char(s.to_move()))) throw FormatError("dataset: to_move disagrees with history");
  s.validate();
  return s;
}

}  // namespace

Board TrainingSample::position() const { return Board::from_history(board_size, history); }

std::vector<double> TrainingSample::tpt() const {
  std::vector<double> dist(static_cast<size_t>(board_size) * board_size, 0.0);
  for (const auto& [cell, count] : visits) dist[cell] = static_cast<double>(count) / total;
  return dist;
}

nn::Example TrainingSample::to_example() const {
  nn::Example e;
  e.position = position();
  e.target = tpt();
  e.chosen_cell = chosen;
  if (value) e.value_target = value->z();
  return e;
}

void TrainingSample::validate() const {
  if (board_size < kMinBoardSize || board_size > kMaxBoardSize) throw FormatError("sample: bad board size");
  Board b(2);
  try {
    b = position();
  } catch (const InvalidMove& e) {
    throw FormatError(std::string("sample: illegal history: ") + e.what());
  }
  if (b.terminal()) throw FormatError("sample: position is terminal");
  if (visits.empty() || total == 0) throw FormatError("sample: empty visit distribution");
  uint64_t sum = 0;
  int prev = -1;
  for (const auto& [cell, count] : visits) {
    if (cell <= prev || cell >= b.cell_count()) throw FormatError("sample: visit cells must ascend within the board");
    if (b.at(cell) != Cell::Empty) throw FormatError("sample: visits on an occupied cell");
    if (count == 0) throw FormatError("sample: zero visit count stored");
    sum += count;
    prev = cell;
  }
  if (sum != total) throw FormatError("sample: visit counts do not sum to the total");
  if (chosen != search::argmax_cell(visits)) throw FormatError("sample: chosen cell is not the most visited");
  if (value && (value->games == 0 || value->wins > value->games)) throw FormatError("sample: bad value target");
  if (provenance.ply != history.size()) throw FormatError("sample: provenance ply disagrees with history");
}

TrainingSample make_sample(const Board& position, const search::SearchResult& result, Provenance provenance) {
  TrainingSample s;
  s.board_size = position.size();
  for (Move m : position.history()) s.history.push_back(m.index(position.size()));
  for (const auto& [cell, count] : result.root_visits) {
    if (count > 0) s.visits.emplace_back(cell, count);
  }
  s.total = result.total_visits;
  s.chosen = result.chosen.index(position.size());
  provenance.ply = static_cast<uint32_t>(position.ply());
  s.provenance = provenance;
  return s;
}

std::string sanitize_descriptor(std::string text) {
  for (char& ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch))) ch = '_';
  }
  return text.empty() ? "-" : text;
}

void write_dataset(std::ostream& out, const Dataset& dataset) {
  out << kHeader << " board=" << dataset.info.board_size << " expert=" << sanitize_descriptor(dataset.info.expert)
      << " explorer=" << sanitize_descriptor(dataset.info.explorer) << " samples=" << dataset.samples.size() << '\n';
  for (const TrainingSample& s : dataset.samples) {
    out << "it=" << s.provenance.iteration << " game=" << s.provenance.game << " ply=" << s.provenance.ply
        << " size=" << s.board_size << " to_move=" << color_char(s.to_move()) << " history=";
    for (size_t i = 0; i < s.history.size(); ++i) out << (i ? "," : "") << s.history[i];
    out << " total=" << s.total << " tpt=";
    for (size_t i = 0; i < s.visits.size(); ++i) out << (i ? "," : "") << s.visits[i].first << ':' << s.visits[i].second;
    out << " chosen=" << s.chosen << " z=";
    if (s.value) {
      out << s.value->wins << '/' << s.value->games;
    } else {
      out << '-';
    }
    out << '\n';
  }
}

Dataset read_dataset(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind(kHeader, 0) != 0) throw FormatError("dataset: missing header");
  const auto kv = key_values(line.substr(kHeader.size()));
  Dataset d;
  d.info.board_size = parse_int<int>(field(kv, "board"), "board size");
  d.info.expert = field(kv, "expert");
  d.info.explorer = field(kv, "explorer");
  const auto count = parse_int<size_t>(field(kv, "samples"), "sample count");
  d.samples.reserve(count);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    d.samples.push_back(parse_record(line));
    if (d.samples.back().board_size != d.info.board_size) throw FormatError("dataset: sample board size mismatch");
  }
  if (d.samples.size() != count) throw FormatError("dataset: truncated (expected " + std::to_string(count) + " samples)");
  return d;
}

std::string dataset_to_string(const Dataset& dataset) {
  std::ostringstream out;
  write_dataset(out, dataset);
  return out.str();
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw FormatError("cannot write " + tmp);
    write_dataset(out, dataset);
    if (!out) throw FormatError("failed writing " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open dataset " + path.string());
  return read_dataset(in);
}

}  // namespace hexit::imitation
