#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hexit/imitation/builder.hpp"
#include "hexit/search/evaluator.hpp"

namespace hexit::exit {

struct SchedulerStats {
  uint64_t batches = 0;
  uint64_t requests = 0;

  double mean_batch() const { return batches ? static_cast<double>(requests) / batches : 0.0; }
};

/// Labels every task with the expert, using `workers` search threads and one
/// evaluation dispatcher (the calling thread).
///
/// A worker advances a search until it needs a network evaluation, queues the
/// request, and moves on to another search that is not waiting. The
/// dispatcher evaluates the first `batch` queued requests together as soon as
/// that many are queued, or whatever is queued once no worker can add more.
/// Each search owns its seed, so the samples are identical for every choice
/// of `workers` and `batch`. Results come back in task order; terminal
/// positions are skipped.
std::vector<imitation::TrainingSample> generate_labels_parallel(std::span<const imitation::LabelTask> tasks,
                                                                const search::SearchConfig& expert,
                                                                search::Evaluator* network, int workers, int batch,
                                                                SchedulerStats* stats = nullptr);

}  // namespace hexit::exit
