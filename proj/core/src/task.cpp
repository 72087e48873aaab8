#include "pilot/task.hpp"

#include <charconv>

#include "pilot/error.hpp"

namespace pilot {

std::string_view to_string(TaskType t) {
  return t == TaskType::classification ? "classification" : "regression";
}

std::string_view to_string(Metric m) { return m == Metric::accuracy ? "accuracy" : "rmse"; }

TaskType parse_task_type(std::string_view s) {
  if (s == "classification") return TaskType::classification;
  if (s == "regression") return TaskType::regression;
  throw ValidationError("unknown task type '" + std::string(s) + "'");
}

Metric parse_metric(std::string_view s) {
  if (s == "accuracy") return Metric::accuracy;
  if (s == "rmse") return Metric::rmse;
  throw ValidationError("unknown metric '" + std::string(s) + "'");
}

void TaskSpec::validate() const {
  if (task_type == TaskType::classification && metric != Metric::accuracy) {
    throw ValidationError("classification tasks are scored by accuracy");
  }
  if (task_type == TaskType::regression && metric != Metric::rmse) {
    throw ValidationError("regression tasks are scored by rmse");
  }
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ValidationError("test_fraction must lie in (0, 1)");
  }
}

Protocol Protocol::parse(std::string_view text) {
  if (text == "holdout") return holdout();
  constexpr std::string_view prefix = "kfold:";
  if (text.starts_with(prefix)) {
    auto digits = text.substr(prefix.size());
    std::size_t k = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec == std::errc{} && ptr == digits.data() + digits.size() && k >= 2) return kfold(k);
  }
  throw ValidationError("protocol must be 'holdout' or 'kfold:<k>' with k >= 2, got '" +
                        std::string(text) + "'");
}

std::string Protocol::to_string() const {
  return kind == Kind::holdout ? "holdout" : "kfold:" + std::to_string(folds);
}

}  // namespace pilot
