#include "hexit/exit/exit.hpp"

#include <cmath>
#include <fstream>
#include <ostream>

#include "hexit/core/error.hpp"
#include "hexit/exit/scheduler.hpp"
#include "hexit/io/config_json.hpp"
#include "hexit/nn/checkpoint.hpp"
#include "hexit/nn/evaluator.hpp"

using nlohmann::json;

namespace hexit::exit {

namespace fs = std::filesystem;

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::batch: return "batch";
    case Regime::online_buffer: return "online_buffer";
    case Regime::online_exponential: return "online_exponential";
  }
  return "?";
}

Regime parse_regime(std::string_view text) {
  if (text == "batch") return Regime::batch;
  if (text == "online_buffer") return Regime::online_buffer;
  if (text == "online_exponential") return Regime::online_exponential;
  throw ConfigError("unknown regime '" + std::string(text) + "'");
}

void ExitConfig::validate() const {
  if (board_size < kMinBoardSize || board_size > kMaxBoardSize) throw ConfigError("board size out of range");
  if (network.board_size != board_size) throw ConfigError("network board size differs from the run's board size");
  if (max_iterations < 0) throw ConfigError("max_iterations must be non-negative");
  if (moves_per_iteration < 1) throw ConfigError("moves_per_iteration must be positive");
  if (regime == Regime::online_exponential && !(growth_rate > 0)) {
    throw ConfigError("online_exponential needs growth_rate > 0");
  }
  if (regime == Regime::online_buffer && buffer_capacity < moves_per_iteration) {
    throw ConfigError("buffer_capacity must be at least moves_per_iteration");
  }
  if (explore_iterations < 1) throw ConfigError("explore_iterations must be positive");
  if (vanilla_expert.mode != search::SearchMode::vanilla || policy_expert.mode != search::SearchMode::policy ||
      policy_value_expert.mode != search::SearchMode::policy_value) {
    throw ConfigError("expert configs must have modes vanilla, policy and policy_value");
  }
  if (value_trigger < 0 || value_games < 1) throw ConfigError("bad value-stage settings");
  if (!(validation_fraction >= 0 && validation_fraction < 1)) throw ConfigError("validation_fraction must be in [0,1)");
  if (eval_batch < 1 || workers < 1) throw ConfigError("eval_batch and workers must be positive");
  try {
    network.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

search::SearchMode warm_start_schedule(const WarmStartState& state) {
  if (!state.has_apprentice) return search::SearchMode::vanilla;
  return state.apprentice_has_value ? search::SearchMode::policy_value : search::SearchMode::policy;
}

bool value_stage_due(size_t dataset_size, int trigger) {
  return trigger > 0 && dataset_size >= static_cast<size_t>(trigger);
}

namespace {

// Index of the oldest dataset that contributes to the training set.
size_t window_start(std::span<const imitation::Dataset> history, Regime regime, int buffer_capacity) {
  if (history.empty()) return 0;
  if (regime == Regime::batch) return history.size() - 1;
  if (regime == Regime::online_exponential) return 0;
  size_t kept = 0;
  size_t j = history.size();
  while (j > 0 && kept < static_cast<size_t>(buffer_capacity)) kept += history[--j].size();
  return j;
}

}  // namespace

std::vector<imitation::TrainingSample> assemble_training_set(std::span<const imitation::Dataset> history,
                                                             Regime regime, int buffer_capacity) {
  std::vector<imitation::TrainingSample> out;
  if (history.empty()) return out;
  for (size_t j = window_start(history, regime, buffer_capacity); j < history.size(); ++j) {
    out.insert(out.end(), history[j].samples.begin(), history[j].samples.end());
  }
  if (regime == Regime::online_buffer && out.size() > static_cast<size_t>(buffer_capacity)) {
    out.erase(out.begin(), out.end() - buffer_capacity);
  }
  return out;
}

int moves_for_iteration(const ExitConfig& config, int iteration, size_t aggregated_size) {
  if (config.regime != Regime::online_exponential || iteration <= 1 || aggregated_size == 0) {
    return config.moves_per_iteration;
  }
  return static_cast<int>(std::ceil(config.growth_rate * static_cast<double>(aggregated_size) - 1e-9));
}

Color play_continuation(const Board& position, const nn::Network<float>& apprentice, Rng& rng,
                        uint64_t* evaluations) {
  Board b = position;
  nn::Workspace<float> ws;
  while (!b.terminal()) {
    const nn::Output out = apprentice.forward(encode(b), b.legal_mask(), b.to_move(), 1.0, ws);
    if (evaluations) ++*evaluations;
    b.apply_unchecked(static_cast<int>(imitation::sample_index(out.policy, rng)));
  }
  return *b.winner();
}

uint64_t add_value_targets(imitation::Dataset& dataset, const nn::Network<float>& apprentice, int games,
                           uint64_t master, bool overwrite) {
  uint64_t evaluations = 0;
  if (games <= 0) return 0;
  for (imitation::TrainingSample& s : dataset.samples) {
    if (s.value && !overwrite) continue;
    const Board position = s.position();
    imitation::ValueTarget v{0, static_cast<uint32_t>(games)};
    for (int k = 0; k < games; ++k) {
      Rng rng(derive_seed(master, Stream::value, {s.provenance.iteration, s.provenance.game, static_cast<uint64_t>(k)}));
      if (play_continuation(position, apprentice, rng, &evaluations) == position.to_move()) ++v.wins;
    }
    s.value = v;
  }
  return evaluations;
}

namespace {

json record_to_json(const IterationRecord& r) {
  return json{{"iteration", r.iteration},
              {"expert", r.expert},
              {"explorer", r.explorer},
              {"dataset", r.dataset_file},
              {"checkpoint", r.checkpoint_file},
              {"dataset_size", r.dataset_size},
              {"training_size", r.training_size},
              {"validation_size", r.validation_size},
              {"value_stage", r.value_stage},
              {"init_seed", r.init_seed},
              {"evaluations", r.evaluations},
              {"cumulative_evaluations", r.cumulative_evaluations},
              {"epochs", r.epochs},
              {"returned_epoch", r.returned_epoch},
              {"validation_loss", r.validation_loss}};
}

IterationRecord record_from_json(const json& j) {
  IterationRecord r;
  try {
    r.iteration = j.at("iteration").get<int>();
    r.expert = j.at("expert").get<std::string>();
    r.explorer = j.at("explorer").get<std::string>();
    r.dataset_file = j.at("dataset").get<std::string>();
    r.checkpoint_file = j.at("checkpoint").get<std::string>();
    r.dataset_size = j.at("dataset_size").get<size_t>();
    r.training_size = j.at("training_size").get<size_t>();
    r.validation_size = j.at("validation_size").get<size_t>();
    r.value_stage = j.at("value_stage").get<bool>();
    r.init_seed = j.at("init_seed").get<uint64_t>();
    r.evaluations = j.at("evaluations").get<uint64_t>();
    r.cumulative_evaluations = j.at("cumulative_evaluations").get<uint64_t>();
    r.epochs = j.at("epochs").get<int>();
    r.returned_epoch = j.at("returned_epoch").get<int>();
    r.validation_loss = j.at("validation_loss").get<double>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("manifest: bad iteration entry: ") + e.what());
  }
  return r;
}

constexpr const char* kManifestFormat = "hexit-run v1";

json config_without_length(const ExitConfig& c) {
  json j = c;
  j.erase("max_iterations");
  return j;
}

void write_text_atomically(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw FormatError("cannot write " + tmp.string());
    out << text;
    if (!out) throw FormatError("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

template <typename T>
void save_checkpoint_atomically(const nn::Network<T>& net, const fs::path& path) {
  const fs::path tmp = path.string() + ".tmp";
  nn::save_checkpoint(net, tmp);
  fs::rename(tmp, path);
}

}  // namespace

void write_manifest(const RunManifest& manifest, const fs::path& path) {
  json j;
  j["format"] = kManifestFormat;
  j["config"] = manifest.config;
  j["initial_checkpoint"] = manifest.initial_checkpoint_file;
  j["iterations"] = json::array();
  for (const IterationRecord& r : manifest.iterations) j["iterations"].push_back(record_to_json(r));
  write_text_atomically(path, j.dump(2) + "\n");
}

RunManifest read_manifest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open manifest " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
  if (j.value("format", "") != kManifestFormat) throw FormatError("manifest: unknown format");
  RunManifest m;
  j.at("config").get_to(m.config);
  m.initial_checkpoint_file = j.at("initial_checkpoint").get<std::string>();
  for (const json& r : j.at("iterations")) m.iterations.push_back(record_from_json(r));
  return m;
}

RunManifest run_exit(const ExitConfig& config, const fs::path& run_dir, std::ostream* log) {
  config.validate();
  fs::create_directories(run_dir);
  const fs::path manifest_path = run_dir / "manifest";
  const int n = config.board_size;

  RunManifest manifest;
  manifest.config = config;
  std::vector<imitation::Dataset> datasets;
  std::shared_ptr<const nn::Network<float>> apprentice;
  bool trained = !config.initial_checkpoint.empty();

  if (fs::exists(manifest_path)) {
    RunManifest old = read_manifest(manifest_path);
    if (config_without_length(old.config) != config_without_length(config)) {
      throw ConfigError("run directory " + run_dir.string() + " holds a run with a different configuration");
    }
    manifest.initial_checkpoint_file = old.initial_checkpoint_file;
    manifest.iterations = std::move(old.iterations);
    if (static_cast<int>(manifest.iterations.size()) > config.max_iterations) {
      manifest.iterations.resize(static_cast<size_t>(config.max_iterations));
    }
    for (const IterationRecord& r : manifest.iterations) datasets.push_back(imitation::load_dataset(run_dir / r.dataset_file));
    const std::string last =
        manifest.iterations.empty() ? manifest.initial_checkpoint_file : manifest.iterations.back().checkpoint_file;
    apprentice = std::make_shared<const nn::Network<float>>(nn::load_checkpoint(run_dir / last));
    trained = trained || !manifest.iterations.empty();
    if (log) *log << "resuming " << run_dir.string() << " after iteration " << manifest.iterations.size() << "\n";
  } else {
    if (trained) {
      nn::Network<float> warm = nn::load_checkpoint(config.initial_checkpoint);
      if (warm.board_size() != n) throw ConfigError("initial checkpoint board size differs from the run's");
      apprentice = std::make_shared<const nn::Network<float>>(std::move(warm));
    } else {
      nn::NetworkConfig nc = config.network;
      nc.value_heads = false;
      nc.seed = derive_seed(config.seed, Stream::init, {0});
      apprentice = std::make_shared<const nn::Network<float>>(nc);
    }
    manifest.initial_checkpoint_file = "ckpt_0";
    save_checkpoint_atomically(*apprentice, run_dir / manifest.initial_checkpoint_file);
    write_manifest(manifest, manifest_path);
  }

  uint64_t cumulative = manifest.iterations.empty() ? 0 : manifest.iterations.back().cumulative_evaluations;
  for (int i = static_cast<int>(manifest.iterations.size()) + 1; i <= config.max_iterations; ++i) {
    IterationRecord rec;
    rec.iteration = i;
    const search::SearchMode mode = warm_start_schedule({trained, trained && apprentice->has_value()});
    const search::SearchConfig expert = mode == search::SearchMode::vanilla  ? config.vanilla_expert
                                        : mode == search::SearchMode::policy ? config.policy_expert
                                                                             : config.policy_value_expert;
    std::shared_ptr<nn::NetworkEvaluator> evaluator;
    if (trained) evaluator = std::make_shared<nn::NetworkEvaluator>(apprentice);

    std::unique_ptr<imitation::Agent> explorer;
    if (trained) {
      explorer = std::make_unique<imitation::ApprenticeAgent>(apprentice, imitation::Selection::sample, 1.0);
    } else {
      search::SearchConfig explore = config.vanilla_expert;
      explore.iterations = config.explore_iterations;
      explorer = std::make_unique<imitation::MctsAgent>(explore, nullptr, imitation::Selection::sample);
    }
    size_t aggregated = 0;
    for (const auto& d : datasets) aggregated += d.size();
    const int count = moves_for_iteration(config, i, aggregated);

    const fs::path dataset_path = run_dir / ("dataset_" + std::to_string(i));
    imitation::Dataset dataset;
    dataset.info = {n, imitation::expert_descriptor(expert),
                    trained ? "apprentice:sample" : imitation::explorer_descriptor(config.explore_iterations)};
    rec.expert = dataset.info.expert;
    rec.explorer = dataset.info.explorer;
    const auto tasks = imitation::explore_positions(n, *explorer, config.seed, static_cast<uint32_t>(i), 0, count);
    rec.evaluations += explorer->evaluations();
    SchedulerStats stats;
    dataset.samples = generate_labels_parallel(tasks, expert, evaluator.get(), config.workers, config.eval_batch, &stats);
    if (evaluator) rec.evaluations += evaluator->evaluations();
    if (log) {
      *log << "iteration " << i << ": labelled " << dataset.size() << " positions with " << rec.expert;
      if (stats.batches) *log << " (mean batch " << stats.mean_batch() << ")";
      *log << "\n";
    }
    datasets.push_back(std::move(dataset));

    const bool previously_valued = !manifest.iterations.empty() && manifest.iterations.back().value_stage;
    rec.value_stage = trained && (previously_valued || value_stage_due(aggregated + datasets.back().size(), config.value_trigger));
    if (rec.value_stage) {
      for (size_t j = window_start(datasets, config.regime, config.buffer_capacity); j < datasets.size(); ++j) {
        const uint64_t used = add_value_targets(datasets[j], *apprentice, config.value_games, config.seed);
        rec.evaluations += used;
        if (used > 0 && j + 1 < datasets.size()) {
          imitation::save_dataset(datasets[j], run_dir / manifest.iterations[j].dataset_file);
        }
      }
      if (log) *log << "iteration " << i << ": value targets attached\n";
    }
    imitation::save_dataset(datasets.back(), dataset_path);

    const auto training = assemble_training_set(datasets, config.regime, config.buffer_capacity);
    const uint64_t train_seed = derive_seed(config.seed, Stream::train, {static_cast<uint64_t>(i)});
    auto [train_set, validation] = imitation::split_validation(training, config.validation_fraction, train_seed);

    nn::NetworkConfig nc = config.network;
    nc.value_heads = rec.value_stage;
    nc.seed = derive_seed(config.seed, Stream::init, {static_cast<uint64_t>(i)});
    nn::Network<float> net(nc);
    if (nc.calibrate_variance) {
      std::vector<EncodedState> batch;
      for (size_t k = 0; k < train_set.size() && k < 256; ++k) batch.push_back(encode(train_set[k].position));
      net.calibrate_variance(batch);
    }
    nn::TrainConfig tc = config.train;
    tc.seed = train_seed;
    tc.loss.value = rec.value_stage;
    const nn::TrainReport report = nn::train(net, std::span<const nn::Example>(train_set),
                                             std::span<const nn::Example>(validation), tc);

    rec.dataset_file = dataset_path.filename().string();
    rec.checkpoint_file = "ckpt_" + std::to_string(i);
    rec.dataset_size = datasets.back().size();
    rec.training_size = train_set.size();
    rec.validation_size = validation.size();
    rec.init_seed = nc.seed;
    rec.epochs = report.epochs_run;
    rec.returned_epoch = report.returned_epoch;
    rec.validation_loss = report.validation_loss.empty() || report.returned_epoch < 1 ? 0.0 : report.validation_loss[report.returned_epoch - 1];
    cumulative += rec.evaluations;
    rec.cumulative_evaluations = cumulative;
    save_checkpoint_atomically(net, run_dir / rec.checkpoint_file);
    apprentice = std::make_shared<const nn::Network<float>>(std::move(net));
    trained = true;
    manifest.iterations.push_back(rec);
    write_manifest(manifest, manifest_path);
    if (log) {
      *log << "iteration " << i << ": trained on " << rec.training_size << " samples for " << rec.epochs
           << " epochs (kept epoch " << rec.returned_epoch << "), " << rec.cumulative_evaluations
           << " network evaluations so far\n";
    }
  }
  return manifest;
}

}  // namespace hexit::exit
