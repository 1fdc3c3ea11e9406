#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "mlab/harness.hpp"

namespace mlab::harness::detail {

using Files = std::vector<std::pair<std::string, std::string>>;

/// What a task returns; rows are JSON objects keyed by CSV column.
struct TaskRows {
  std::vector<Json> rows;
  Files files;
};

struct Task {
  std::uint64_t seed = 0;
  std::string label;  // shows up in the timing sidecar and failure records
  std::function<TaskRows()> fn;
};

struct TaskOutcome {
  std::vector<Json> rows;
  Files files;
  std::string error;  // empty on success
  double wall_time_ms = 0.0;
};

/// Runs tasks on the worker pool; outcomes come back in task order.
std::vector<TaskOutcome> run_tasks(const std::vector<Task>& tasks);

/// Effective seeds after the offset.
std::vector<std::uint64_t> effective_seeds(const ExperimentConfig& c, const RunOptions& o);

double median(std::vector<double> v);

/// Values of `column` over rows whose `key` column equals `value`.
std::vector<double> column_where(const std::vector<Json>& rows, const std::string& column, const std::string& key,
                                 double value);

/// Shared per-n precomputation used by several tasks. Computed once by the
/// first task that needs it; a throwing computation is retried (and fails the
/// same way) in every dependent task.
template <typename T>
class Lazy {
 public:
  explicit Lazy(std::function<T()> make) : state_(std::make_shared<State>()) { state_->make = std::move(make); }
  const T& get() const {
    std::call_once(state_->once, [this] { state_->value.emplace(state_->make()); });
    return *state_->value;
  }

 private:
  struct State {
    std::once_flag once;
    std::function<T()> make;
    std::optional<T> value;
  };
  std::shared_ptr<State> state_;
};

/// Per-experiment body: builds tasks, then fills result fields from the rows.
struct Experiment {
  std::vector<Task> tasks;
  /// Called with every successful row in task order; returns the "results" object.
  std::function<Json(const std::vector<Json>& rows)> summarize;
};

Experiment make_eigdecay(const ExperimentConfig& c, const std::vector<std::uint64_t>& seeds);
Experiment make_concentration(const ExperimentConfig& c, const std::vector<std::uint64_t>& seeds);
Experiment make_fitted(const ExperimentConfig& c, const std::vector<std::uint64_t>& seeds, bool fqi);
Experiment make_sphere(const ExperimentConfig& c, const std::vector<std::uint64_t>& seeds);
Experiment make_adversary(const ExperimentConfig& c, const std::vector<std::uint64_t>& seeds);
Experiment make_response(const ExperimentConfig& c, const std::vector<std::uint64_t>& seeds);

}  // namespace mlab::harness::detail
