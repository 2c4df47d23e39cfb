#include "hexit/exit/scheduler.hpp"

#include <condition_variable>
#include <deque>
#include <exception>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>

#include "hexit/core/error.hpp"
#include "hexit/search/mcts.hpp"

namespace hexit::exit {

namespace {

struct Slot {
  std::unique_ptr<search::Search> search;
  std::optional<search::EvalRequest> request;
  std::optional<search::Evaluation> response;
  std::optional<imitation::TrainingSample> result;
};

}  // namespace

std::vector<imitation::TrainingSample> generate_labels_parallel(std::span<const imitation::LabelTask> tasks,
                                                                const search::SearchConfig& expert,
                                                                search::Evaluator* network, int workers, int batch,
                                                                SchedulerStats* stats) {
  if (workers < 1) throw ConfigError("worker count must be at least 1");
  if (expert.uses_network()) {
    if (network == nullptr) throw ConfigError("expert search mode requires a network");
    if (batch < 1) throw ConfigError("evaluation batch size must be at least 1");
    if (expert.mode == search::SearchMode::policy_value && !network->has_value()) {
      throw ConfigError("policy_value expert requires a network with value heads");
    }
  }
  const size_t n = tasks.size();
  std::vector<Slot> slots(n);

  std::mutex mutex;
  std::condition_variable work_cv, dispatch_cv;
  std::deque<size_t> ready, pending;
  size_t next_task = 0, finished = 0;
  int busy = 0;
  bool done = n == 0;
  std::exception_ptr failure;

  auto worker = [&] {
    std::unique_lock lock(mutex);
    while (true) {
      work_cv.wait(lock, [&] { return done || !ready.empty() || next_task < n; });
      if (done) return;
      size_t id;
      bool fresh = ready.empty();
      if (fresh) {
        id = next_task++;
      } else {
        id = ready.front();
        ready.pop_front();
      }
      ++busy;
      lock.unlock();

      std::optional<search::EvalRequest> request;
      bool finished_here = false;
      try {
        Slot& slot = slots[id];
        const imitation::LabelTask& task = tasks[id];
        if (fresh) {
          if (task.position.terminal()) {
            std::cerr << "warning: skipping terminal position (iteration " << task.provenance.iteration << ", game "
                      << task.provenance.game << ")\n";
            finished_here = true;
          } else {
            search::SearchConfig c = expert;
            c.seed = task.seed;
            slot.search = std::make_unique<search::Search>(task.position, c);
          }
        } else {
          slot.search->resume(*slot.response);
          slot.response.reset();
        }
        if (!finished_here) {
          request = slot.search->advance();
          if (!request) {
            slot.result = imitation::make_sample(task.position, slot.search->result(), task.provenance);
            slot.search.reset();
            finished_here = true;
          }
        }
      } catch (...) {
        lock.lock();
        --busy;
        if (!failure) failure = std::current_exception();
        done = true;
        work_cv.notify_all();
        dispatch_cv.notify_all();
        return;
      }

      lock.lock();
      --busy;
      if (finished_here) {
        if (++finished == n) {
          done = true;
          work_cv.notify_all();
        }
      } else {
        slots[id].request = std::move(request);
        pending.push_back(id);
      }
      dispatch_cv.notify_all();
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) threads.emplace_back(worker);

  {
    std::unique_lock lock(mutex);
    const size_t limit = static_cast<size_t>(std::max(batch, 1));
    while (true) {
      dispatch_cv.wait(lock, [&] {
        const bool stalled = busy == 0 && ready.empty() && next_task >= n;
        return done || pending.size() >= limit || (!pending.empty() && stalled);
      });
      if (done) break;
      std::vector<size_t> ids;
      while (!pending.empty() && ids.size() < limit) {
        ids.push_back(pending.front());
        pending.pop_front();
      }
      std::vector<search::EvalRequest> requests;
      requests.reserve(ids.size());
      for (size_t id : ids) {
        requests.push_back(std::move(*slots[id].request));
        slots[id].request.reset();
      }
      lock.unlock();
      std::vector<search::Evaluation> out;
      try {
        out = network->evaluate(requests);
      } catch (...) {
        lock.lock();
        if (!failure) failure = std::current_exception();
        done = true;
        work_cv.notify_all();
        break;
      }
      lock.lock();
      for (size_t j = 0; j < ids.size(); ++j) {
        slots[ids[j]].response = std::move(out[j]);
        ready.push_back(ids[j]);
      }
      if (stats) {
        ++stats->batches;
        stats->requests += ids.size();
      }
      work_cv.notify_all();
    }
  }
  for (std::thread& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);

  std::vector<imitation::TrainingSample> samples;
  samples.reserve(n);
  for (Slot& slot : slots) {
    if (slot.result) samples.push_back(std::move(*slot.result));
  }
  return samples;
}

}  // namespace hexit::exit
