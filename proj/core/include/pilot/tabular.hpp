#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pilot/task.hpp"

namespace pilot {

enum class ColumnKind { numeric, categorical };
std::string_view to_string(ColumnKind k);

struct Missing {
  bool operator==(const Missing&) const = default;
};

using Cell = std::variant<Missing, double, std::string>;
using Labels = std::vector<std::string>;
using Values = std::vector<double>;
/// Class labels for classification, reals for regression.
using Target = std::variant<Labels, Values>;

inline bool is_missing(const Cell& c) { return std::holds_alternative<Missing>(c); }

std::size_t target_size(const Target& t);

struct TabularDataset {
  std::vector<std::string> column_names;
  std::vector<ColumnKind> column_kinds;
  std::vector<std::vector<Cell>> rows;
  Target target;

  std::size_t row_count() const noexcept { return rows.size(); }
  std::size_t column_count() const noexcept { return column_names.size(); }

  /// Throws ValidationError if rows are ragged, kinds disagree with cells, or
  /// the target length differs from the row count.
  void validate() const;

  /// Rows at the given indices, in that order.
  TabularDataset subset(std::span<const std::size_t> indices) const;

  bool operator==(const TabularDataset&) const = default;
};

/// Parses CSV text with a header row. Target cells must be present; for
/// regression they must parse as reals.
TabularDataset parse_csv(std::string_view text, std::string_view target_column,
                         TaskType task = TaskType::classification);
TabularDataset load_csv(const std::filesystem::path& path, std::string_view target_column,
                        TaskType task = TaskType::classification);
std::string to_csv(const TabularDataset& d, std::string_view target_column);

struct SplitDataset {
  TabularDataset train;
  TabularDataset test;
  std::int64_t seed = 0;
  std::vector<std::size_t> train_rows;  // source row indices, ascending
  std::vector<std::size_t> test_rows;
};

/// Seeded holdout split using task.test_fraction. Classification splits are
/// stratified when every class has at least two rows.
SplitDataset split(const TabularDataset& d, const TaskSpec& task, std::int64_t seed);
inline SplitDataset split(const TabularDataset& d, const TaskSpec& task) {
  return split(d, task, task.split_seed);
}

/// Test-row indices for each of k folds (ascending within a fold). Classes are
/// dealt round-robin so every fold sees each label in proportion.
std::vector<std::vector<std::size_t>> kfold_indices(const TabularDataset& d, const TaskSpec& task,
                                                    std::size_t k, std::int64_t seed);

}  // namespace pilot
