#include "hexit/evaluation/curve.hpp"

#include <cstdio>
#include <memory>
#include <ostream>

#include "hexit/core/error.hpp"
#include "hexit/exit/exit.hpp"
#include "hexit/nn/checkpoint.hpp"

namespace hexit::evaluation {

Curve training_curve(const std::filesystem::path& run_dir, const CurveConfig& config) {
  if (config.games_per_pair < 1) throw ConfigError("games_per_pair must be positive");
  const exit::RunManifest manifest = exit::read_manifest(run_dir / "manifest");
  Curve curve;
  curve.points.push_back({0, manifest.initial_checkpoint_file, 0, 0.0});
  for (const exit::IterationRecord& r : manifest.iterations) {
    curve.points.push_back({r.iteration, r.checkpoint_file, r.cumulative_evaluations, 0.0});
  }
  std::vector<std::unique_ptr<imitation::ApprenticeAgent>> agents;
  for (const CurvePoint& p : curve.points) {
    auto net = std::make_shared<const nn::Network<float>>(nn::load_checkpoint(run_dir / p.checkpoint));
    agents.push_back(std::make_unique<imitation::ApprenticeAgent>(net, imitation::Selection::greedy, 1.0, p.checkpoint));
  }
  const size_t n = agents.size();
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      MatchConfig mc;
      mc.board_size = manifest.config.board_size;
      mc.games = config.games_per_pair;
      mc.opening_plies = config.opening_plies;
      mc.seed = derive_seed(config.seed, Stream::match, {i, j});
      mc.workers = config.workers;
      MatchResult m = play_match(*agents[i], *agents[j], mc);
      curve.records.insert(curve.records.end(), m.records.begin(), m.records.end());
    }
  }
  EloOptions options;
  options.prior_draws = config.prior_draws;
  if (!curve.records.empty()) {
    curve.table = fit_elo(curve.records, options);
    for (CurvePoint& p : curve.points) p.elo = curve.table.rating(p.checkpoint);
  }
  return curve;
}

void write_curve(std::ostream& out, const Curve& curve) {
  out << "# evaluations elo\n";
  for (const CurvePoint& p : curve.points) {
    char elo[32];
    std::snprintf(elo, sizeof elo, "%.2f", p.elo);
    out << p.evaluations << ' ' << elo << '\n';
  }
}

}  // namespace hexit::evaluation
