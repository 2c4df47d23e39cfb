// Command-line front end: dataset generation, training, ExIt runs, matches,
// ratings, the REINFORCE baseline and human play.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hexit/baseline/reinforce.hpp"
#include "hexit/core/error.hpp"
#include "hexit/core/notation.hpp"
#include "hexit/evaluation/curve.hpp"
#include "hexit/evaluation/elo.hpp"
#include "hexit/evaluation/match.hpp"
#include "hexit/exit/exit.hpp"
#include "hexit/imitation/builder.hpp"
#include "hexit/io/config_json.hpp"
#include "hexit/nn/checkpoint.hpp"
#include "hexit/nn/evaluator.hpp"

namespace fs = std::filesystem;
using namespace hexit;

namespace {

struct Common {
  std::string config;
  std::optional<uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c, const std::string& out_help) {
  cmd->add_option("--config", c.config, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "master seed (overrides the config)");
  cmd->add_option("--out", c.out, out_help);
}

io::RunConfig resolve(const Common& c) {
  io::RunConfig rc = c.config.empty() ? io::RunConfig{} : io::load_run_config(c.config);
  if (c.seed) {
    rc.exit.seed = *c.seed;
    rc.reinforce.seed = *c.seed;
  }
  return rc;
}

std::optional<int> parse_int(std::string_view text) {
  int v = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size()) return std::nullopt;
  return v;
}

std::shared_ptr<const nn::Network<float>> load_net(const std::string& path, std::optional<int> board) {
  auto net = std::make_shared<const nn::Network<float>>(nn::load_checkpoint(path));
  if (board && net->board_size() != *board) {
    throw ConfigError("incompatible board sizes: " + path + " is " + std::to_string(net->board_size()) + "x" +
                      std::to_string(net->board_size()) + ", expected " + std::to_string(*board));
  }
  return net;
}

// Agent specs: random | mcts:<iterations> | nmcts:<checkpoint>[:<iterations>] | <checkpoint>
struct AgentSpec {
  std::unique_ptr<imitation::Agent> agent;
  int board_size = 0;  // 0 when the agent fits any board
};

std::string agent_name(std::string spec) {
  for (char& ch : spec) {
    if (std::isspace(static_cast<unsigned char>(ch))) ch = '_';
  }
  return spec;
}

AgentSpec make_agent(const std::string& spec, const std::string& name, const io::RunConfig& rc) {
  AgentSpec out;
  if (spec == "random") {
    out.agent = std::make_unique<imitation::RandomAgent>(name);
  } else if (spec.rfind("mcts:", 0) == 0) {
    const auto iterations = parse_int(std::string_view(spec).substr(5));
    if (!iterations || *iterations < 1) throw ConfigError("bad agent spec '" + spec + "'");
    search::SearchConfig c = rc.exit.vanilla_expert;
    c.iterations = *iterations;
    out.agent = std::make_unique<imitation::MctsAgent>(c, nullptr, imitation::Selection::greedy, name);
  } else if (spec.rfind("nmcts:", 0) == 0) {
    std::string path = spec.substr(6);
    std::optional<int> iterations;
    if (const size_t colon = path.rfind(':'); colon != std::string::npos) {
      iterations = parse_int(std::string_view(path).substr(colon + 1));
      if (iterations) path.resize(colon);
    }
    auto net = load_net(path, std::nullopt);
    search::SearchConfig c = net->has_value() ? rc.exit.policy_value_expert : rc.exit.policy_expert;
    if (iterations) c.iterations = *iterations;
    out.board_size = net->board_size();
    out.agent = std::make_unique<imitation::MctsAgent>(c, std::make_shared<nn::NetworkEvaluator>(net),
                                                       imitation::Selection::greedy, name);
  } else {
    auto net = load_net(spec, std::nullopt);
    out.board_size = net->board_size();
    out.agent = std::make_unique<imitation::ApprenticeAgent>(net, imitation::Selection::greedy, 1.0, name);
  }
  return out;
}

int board_for(std::optional<int> requested, std::initializer_list<int> agent_sizes, int fallback) {
  int board = requested.value_or(0);
  for (int s : agent_sizes) {
    if (s == 0) continue;
    if (board != 0 && board != s) throw ConfigError("incompatible board sizes: " + std::to_string(board) + " vs " + std::to_string(s));
    board = s;
  }
  return board != 0 ? board : fallback;
}

void require_out(const Common& c, const char* what) {
  if (c.out.empty()) throw ConfigError(std::string("--out is required (") + what + ")");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Expert Iteration for Hex"};
  app.require_subcommand(1);

  // selfplay-dataset
  Common ds_common;
  std::optional<int> ds_board, ds_count, ds_explore, ds_expert_iterations, ds_iteration;
  std::string ds_apprentice, ds_extend, ds_mode = "vanilla";
  auto* ds = app.add_subcommand("selfplay-dataset", "build an initial dataset or extend one with apprentice positions");
  add_common(ds, ds_common, "dataset file to write");
  ds->add_option("--board", ds_board, "board size");
  ds->add_option("--count", ds_count, "positions to label");
  ds->add_option("--explore-iterations", ds_explore, "iterations of the exploration search");
  ds->add_option("--expert-mode", ds_mode, "vanilla, policy or policy_value");
  ds->add_option("--expert-iterations", ds_expert_iterations, "expert search iterations");
  ds->add_option("--apprentice", ds_apprentice, "checkpoint whose sampled games supply positions")->check(CLI::ExistingFile);
  ds->add_option("--extend", ds_extend, "existing dataset to append to")->check(CLI::ExistingFile);
  ds->add_option("--iteration", ds_iteration, "iteration number recorded in provenance");

  // train
  Common tr_common;
  std::vector<std::string> tr_datasets;
  std::string tr_target;
  bool tr_value = false;
  auto* tr = app.add_subcommand("train", "train an apprentice on datasets");
  add_common(tr, tr_common, "checkpoint to write");
  tr->add_option("--dataset", tr_datasets, "dataset file (repeatable)")->required()->check(CLI::ExistingFile);
  tr->add_option("--policy-target", tr_target, "tpt or cat")->check(CLI::IsMember({"tpt", "cat"}));
  tr->add_flag("--value", tr_value, "add value heads and the value loss");

  // exit
  Common ex_common;
  std::optional<int> ex_iterations;
  bool ex_quiet = false;
  auto* ex = app.add_subcommand("exit", "run (or resume) Expert Iteration");
  add_common(ex, ex_common, "run directory");
  ex->add_option("--iterations", ex_iterations, "override max_iterations");
  ex->add_flag("--quiet", ex_quiet, "no progress log");

  // match
  Common ma_common;
  std::string ma_a, ma_b;
  std::optional<int> ma_board;
  int ma_games = 200, ma_openings = 0, ma_workers = 1;
  bool ma_sweep = false;
  auto* ma = app.add_subcommand("match", "play agent A against agent B");
  add_common(ma, ma_common, "match log to write");
  ma->add_option("--a", ma_a, "agent spec: random | mcts:<n> | nmcts:<ckpt>[:<n>] | <ckpt>")->required();
  ma->add_option("--b", ma_b, "agent spec")->required();
  ma->add_option("--board", ma_board, "board size (default: the agents' or the config's)");
  ma->add_option("--games", ma_games, "games (ignored with --sweep)")->check(CLI::NonNegativeNumber);
  ma->add_flag("--sweep", ma_sweep, "every opening once per colour");
  ma->add_option("--openings", ma_openings, "random opening plies shared by colour-swapped pairs");
  ma->add_option("--workers", ma_workers, "parallel games")->check(CLI::PositiveNumber);

  // elo
  Common el_common;
  std::vector<std::string> el_records;
  double el_prior = 0.0;
  auto* el = app.add_subcommand("elo", "fit Elo ratings to match logs");
  add_common(el, el_common, "rating table to write (default stdout)");
  el->add_option("records", el_records, "match logs")->required()->check(CLI::ExistingFile);
  el->add_option("--prior", el_prior, "virtual draws per pair that met")->check(CLI::NonNegativeNumber);

  // curve
  Common cu_common;
  std::string cu_run;
  evaluation::CurveConfig cu_config;
  auto* cu = app.add_subcommand("curve", "rate every checkpoint of a run against the others");
  add_common(cu, cu_common, "curve table to write (default stdout)");
  cu->add_option("--run", cu_run, "run directory")->required()->check(CLI::ExistingDirectory);
  cu->add_option("--games-per-pair", cu_config.games_per_pair)->check(CLI::PositiveNumber);
  cu->add_option("--openings", cu_config.opening_plies, "random opening plies");
  cu->add_option("--prior", cu_config.prior_draws, "virtual draws per pair")->check(CLI::NonNegativeNumber);
  cu->add_option("--workers", cu_config.workers)->check(CLI::PositiveNumber);

  // reinforce
  Common rl_common;
  std::string rl_start;
  uint64_t rl_budget = 0;
  auto* rl = app.add_subcommand("reinforce", "REINFORCE self-play from a warm start");
  add_common(rl, rl_common, "checkpoint to write");
  rl->add_option("--start", rl_start, "warm-start checkpoint")->required()->check(CLI::ExistingFile);
  rl->add_option("--budget", rl_budget, "network evaluations to spend")->required();

  // play
  Common pl_common;
  std::string pl_agent = "mcts:1000", pl_colour = "black";
  std::optional<int> pl_board;
  auto* pl = app.add_subcommand("play", "play against an agent; enter moves such as c2");
  add_common(pl, pl_common, "match log of the game");
  pl->add_option("--agent", pl_agent, "agent spec");
  pl->add_option("--board", pl_board, "board size");
  pl->add_option("--colour", pl_colour, "your colour")->check(CLI::IsMember({"black", "white"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*ds) {
      const io::RunConfig rc = resolve(ds_common);
      require_out(ds_common, "dataset file");
      const int board = board_for(ds_board, {}, rc.exit.board_size);
      search::SearchConfig expert = ds_mode == "vanilla" ? rc.exit.vanilla_expert
                                    : ds_mode == "policy" ? rc.exit.policy_expert
                                                          : rc.exit.policy_value_expert;
      if (ds_mode != "vanilla" && ds_mode != "policy" && ds_mode != "policy_value") {
        throw ConfigError("unknown expert mode '" + ds_mode + "'");
      }
      if (ds_expert_iterations) expert.iterations = *ds_expert_iterations;
      const int count = ds_count.value_or(rc.exit.moves_per_iteration);
      imitation::Dataset dataset;
      if (ds_apprentice.empty()) {
        if (!ds_extend.empty()) throw ConfigError("--extend needs --apprentice");
        imitation::InitialDatasetConfig ic;
        ic.board_size = board;
        ic.count = count;
        ic.explore_iterations = ds_explore.value_or(rc.exit.explore_iterations);
        ic.expert = expert;
        ic.seed = rc.exit.seed;
        ic.iteration = static_cast<uint32_t>(ds_iteration.value_or(0));
        dataset = imitation::build_initial_dataset(ic);
      } else {
        auto net = load_net(ds_apprentice, board);
        std::unique_ptr<nn::NetworkEvaluator> evaluator;
        if (expert.uses_network()) evaluator = std::make_unique<nn::NetworkEvaluator>(net);
        if (ds_extend.empty()) {
          dataset.info = {board, imitation::expert_descriptor(expert), "apprentice:sample"};
        } else {
          dataset = imitation::load_dataset(ds_extend);
          if (dataset.info.board_size != board) throw ConfigError("incompatible board sizes: dataset vs --board");
        }
        imitation::dagger_extend(dataset, net, count, expert, evaluator.get(), rc.exit.seed,
                                 static_cast<uint32_t>(ds_iteration.value_or(1)));
      }
      imitation::save_dataset(dataset, ds_common.out);
      std::cout << "wrote " << dataset.size() << " samples to " << ds_common.out << "\n";
    } else if (*tr) {
      const io::RunConfig rc = resolve(tr_common);
      require_out(tr_common, "checkpoint");
      std::vector<imitation::TrainingSample> samples;
      int board = 0;
      for (const std::string& path : tr_datasets) {
        imitation::Dataset d = imitation::load_dataset(path);
        if (board != 0 && d.info.board_size != board) throw ConfigError("incompatible board sizes across datasets");
        board = d.info.board_size;
        samples.insert(samples.end(), d.samples.begin(), d.samples.end());
      }
      if (samples.empty()) throw ConfigError("no training samples");
      nn::NetworkConfig nc = rc.exit.network;
      if (nc.board_size != board) {
        if (!tr_common.config.empty()) throw ConfigError("incompatible board sizes: config network vs datasets");
        nc = nn::NetworkConfig::desk(board);
      }
      nc.value_heads = tr_value;
      nc.seed = derive_seed(rc.exit.seed, Stream::init, {0});
      nn::TrainConfig tc = rc.exit.train;
      tc.seed = derive_seed(rc.exit.seed, Stream::train, {0});
      tc.loss.value = tr_value;
      if (tr_target == "cat") tc.loss.policy = nn::PolicyTarget::cat;
      if (tr_target == "tpt") tc.loss.policy = nn::PolicyTarget::tpt;
      if (tr_value) {
        for (const auto& s : samples) {
          if (!s.value) throw ConfigError("--value needs value targets on every sample");
        }
      }
      auto [train_set, validation] = imitation::split_validation(samples, rc.exit.validation_fraction, tc.seed);
      nn::Network<float> net(nc);
      const nn::TrainReport report = nn::train(net, std::span<const nn::Example>(train_set),
                                               std::span<const nn::Example>(validation), tc);
      nn::save_checkpoint(net, tr_common.out);
      std::cout << "trained on " << train_set.size() << " samples (" << validation.size() << " held out) for "
                << report.epochs_run << " epochs, kept epoch " << report.returned_epoch << "\n";
    } else if (*ex) {
      io::RunConfig rc = resolve(ex_common);
      require_out(ex_common, "run directory");
      if (ex_iterations) rc.exit.max_iterations = *ex_iterations;
      const exit::RunManifest m = exit::run_exit(rc.exit, ex_common.out, ex_quiet ? nullptr : &std::cerr);
      std::cout << "run " << ex_common.out << ": " << m.iterations.size() << " iterations\n";
    } else if (*ma) {
      const io::RunConfig rc = resolve(ma_common);
      const std::string name_a = agent_name(ma_a);
      const std::string name_b = ma_a == ma_b ? agent_name(ma_b) + "#b" : agent_name(ma_b);
      AgentSpec a = make_agent(ma_a, name_a, rc);
      AgentSpec b = make_agent(ma_b, name_b, rc);
      evaluation::MatchConfig mc;
      mc.board_size = board_for(ma_board, {a.board_size, b.board_size}, rc.exit.board_size);
      mc.games = ma_games;
      mc.sweep = ma_sweep;
      mc.opening_plies = ma_openings;
      mc.seed = derive_seed(rc.exit.seed, Stream::match, {});
      mc.workers = ma_workers;
      const evaluation::MatchResult r = evaluation::play_match(*a.agent, *b.agent, mc);
      if (!ma_common.out.empty()) evaluation::save_match_records(r.records, ma_common.out);
      std::cout << name_a << " " << r.wins_a << " - " << r.wins_b << " " << name_b << " (" << r.records.size()
                << " games, score " << r.score_a() << ")\n";
      if (r.degenerate) std::cout << "warning: degenerate match, " << r.duplicates << " duplicate games\n";
    } else if (*el) {
      std::vector<evaluation::MatchRecord> records;
      for (const std::string& path : el_records) {
        auto more = evaluation::load_match_records(path);
        records.insert(records.end(), more.begin(), more.end());
      }
      evaluation::EloOptions options;
      options.prior_draws = el_prior;
      const evaluation::EloTable t = evaluation::fit_elo(records, options);
      if (el_common.out.empty()) {
        evaluation::write_elo_table(std::cout, t);
      } else {
        std::ofstream out(el_common.out);
        evaluation::write_elo_table(out, t);
      }
    } else if (*cu) {
      const io::RunConfig rc = resolve(cu_common);
      cu_config.seed = rc.exit.seed;
      const evaluation::Curve curve = evaluation::training_curve(cu_run, cu_config);
      if (cu_common.out.empty()) {
        evaluation::write_curve(std::cout, curve);
      } else {
        std::ofstream out(cu_common.out);
        evaluation::write_curve(out, curve);
        evaluation::save_match_records(curve.records, fs::path(cu_common.out).string() + ".matches");
      }
    } else if (*rl) {
      const io::RunConfig rc = resolve(rl_common);
      require_out(rl_common, "checkpoint");
      nn::Network<float> net = nn::load_checkpoint(rl_start);
      const baseline::ReinforceState s = baseline::run_reinforce(net, rc.reinforce, rl_budget);
      nn::save_checkpoint(net, rl_common.out);
      std::cout << s.updates << " updates, " << s.games << " games, " << s.evaluations
                << " network evaluations, baseline " << s.baseline << "\n";
    } else if (*pl) {
      const io::RunConfig rc = resolve(pl_common);
      AgentSpec opponent = make_agent(pl_agent, agent_name(pl_agent), rc);
      const int n = board_for(pl_board, {opponent.board_size}, rc.exit.board_size);
      const Color human = pl_colour == "black" ? Color::Black : Color::White;
      Rng rng(derive_seed(rc.exit.seed, Stream::match, {}));
      Board board(n);
      std::cout << "You play " << pl_colour << " (Black joins top and bottom). Enter moves like c2.\n";
      while (!board.terminal()) {
        if (board.to_move() == human) {
          std::cout << board.to_text() << "your move> " << std::flush;
          std::string line;
          if (!std::getline(std::cin, line)) {
            std::cout << "\ninput closed\n";
            return 1;
          }
          try {
            const Move m = parse_move(line, n);
            if (!board.is_legal(m)) throw InvalidMove(format_move(m) + " is occupied");
            board.apply(m);
          } catch (const InvalidMove& e) {
            std::cout << "rejected: " << e.what() << "\n";
          }
        } else {
          const Move m = opponent.agent->select_move(board, rng);
          std::cout << opponent.agent->id() << " plays " << format_move(m) << "\n";
          board.apply(m);
        }
      }
      std::cout << board.to_text() << (*board.winner() == human ? "You win.\n" : "You lose.\n");
      if (!pl_common.out.empty()) {
        evaluation::MatchRecord r;
        r.agent_a = "human";
        r.agent_b = opponent.agent->id();
        r.black = human == Color::Black ? r.agent_a : r.agent_b;
        r.winner = *board.winner() == human ? r.agent_a : r.agent_b;
        r.plies = board.ply();
        for (Move m : board.history()) r.moves.push_back(m.index(n));
        evaluation::save_match_records({r}, pl_common.out);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
