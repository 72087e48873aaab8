#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace pilot {

enum class TaskType { classification, regression };
enum class Metric { accuracy, rmse };

std::string_view to_string(TaskType t);
std::string_view to_string(Metric m);
TaskType parse_task_type(std::string_view s);
Metric parse_metric(std::string_view s);

/// What to predict and how to score it.
struct TaskSpec {
  TaskType task_type = TaskType::classification;
  std::string target_column;
  Metric metric = Metric::accuracy;
  std::int64_t split_seed = 0;
  double test_fraction = 0.2;

  /// Classification pairs with accuracy, regression with rmse, test_fraction in (0,1).
  void validate() const;

  static TaskSpec classification(std::string target, double test_fraction = 0.2,
                                 std::int64_t seed = 0) {
    return {TaskType::classification, std::move(target), Metric::accuracy, seed, test_fraction};
  }
  static TaskSpec regression(std::string target, double test_fraction = 0.2,
                             std::int64_t seed = 0) {
    return {TaskType::regression, std::move(target), Metric::rmse, seed, test_fraction};
  }

  bool operator==(const TaskSpec&) const = default;
};

/// Holdout uses TaskSpec::test_fraction; kfold averages over `folds` folds.
struct Protocol {
  enum class Kind { holdout, kfold };
  Kind kind = Kind::kfold;
  std::size_t folds = 5;

  static Protocol holdout() { return {Kind::holdout, 1}; }
  static Protocol kfold(std::size_t k) { return {Kind::kfold, k}; }

  /// Accepts "holdout" or "kfold:<k>" with k >= 2.
  static Protocol parse(std::string_view text);
  std::string to_string() const;

  bool operator==(const Protocol&) const = default;
};

}  // namespace pilot
