#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pilot/corpus.hpp"
#include "pilot/pipeline.hpp"
#include "pilot/tabular.hpp"
#include "pilot/task.hpp"

namespace pilot::engine {

/// Column-major working data passed between stages. Numeric missing values
/// are NaN; categorical missing values are nullopt.
struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  std::vector<double> numbers;
  std::vector<std::optional<std::string>> levels;

  bool operator==(const Column&) const = default;
};

struct Frame {
  std::vector<Column> columns;
  std::size_t rows = 0;

  static Frame from_dataset(const TabularDataset& d);
  bool operator==(const Frame&) const = default;
};

/// Labels encoded as indices into a sorted class table, or raw regression values.
struct EncodedTarget {
  TaskType task = TaskType::classification;
  std::vector<std::string> classes;
  std::vector<std::size_t> codes;
  std::vector<double> values;

  static EncodedTarget encode(const Target& t, TaskType task);
  std::size_t size() const { return task == TaskType::classification ? codes.size() : values.size(); }
};

// Learned state of each primitive ------------------------------------------

struct MeanImputerState {
  std::vector<double> numeric_fill;             // NaN for categorical columns
  std::vector<std::string> categorical_fill;    // empty for numeric columns
  bool operator==(const MeanImputerState&) const = default;
};

struct StandardScalerState {
  std::vector<double> mean;
  std::vector<double> stddev;  // 0 marks a constant column
  bool operator==(const StandardScalerState&) const = default;
};

struct MinMaxScalerState {
  std::vector<double> min;
  std::vector<double> range;  // 0 marks a degenerate column
  bool operator==(const MinMaxScalerState&) const = default;
};

struct OneHotEncoderState {
  std::vector<std::vector<std::string>> categories;  // empty for numeric columns
  bool operator==(const OneHotEncoderState&) const = default;
};

struct ColumnSelectorState {
  std::vector<std::size_t> kept;  // ascending input column indices
  std::vector<double> scores;     // per input column (variance or |correlation|)
  bool operator==(const ColumnSelectorState&) const = default;
};

struct LogisticRegressionState {
  std::vector<std::string> classes;
  std::vector<double> mean;   // internal standardization
  std::vector<double> scale;
  /// One binary model for two classes, one per class otherwise; empty for one class.
  std::vector<std::vector<double>> weights;
  std::vector<double> bias;
  bool operator==(const LogisticRegressionState&) const = default;
};

struct TreeNode {
  // Internal nodes split on `feature`; leaves have feature == -1.
  int feature = -1;
  bool categorical = false;
  double threshold = 0.0;  // numeric: go left when value <= threshold
  std::string category;    // categorical: go left when level == category
  int left = -1;
  int right = -1;
  std::size_t leaf_class = 0;
  double leaf_value = 0.0;
  bool operator==(const TreeNode&) const = default;
};

struct DecisionTreeState {
  TaskType task = TaskType::classification;
  std::vector<std::string> classes;
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  bool operator==(const DecisionTreeState&) const = default;
};

struct KnnState {
  std::size_t k = 5;
  Frame train;
  EncodedTarget target;
  bool operator==(const KnnState& o) const {
    return k == o.k && train == o.train && target.classes == o.target.classes &&
           target.codes == o.target.codes && target.values == o.target.values;
  }
};

struct NaiveBayesState {
  std::vector<std::string> classes;
  std::vector<double> log_prior;
  /// [class][column] Gaussian parameters for numeric columns.
  std::vector<std::vector<double>> mean;
  std::vector<std::vector<double>> variance;
  /// [class][column] level -> log probability for categorical columns.
  std::vector<std::vector<std::map<std::string, double>>> level_log_prob;
  std::vector<std::vector<double>> unseen_log_prob;
  bool operator==(const NaiveBayesState&) const = default;
};

struct IdentityState {
  bool operator==(const IdentityState&) const = default;
};

using FittedStage =
    std::variant<MeanImputerState, StandardScalerState, MinMaxScalerState, OneHotEncoderState,
                 ColumnSelectorState, LogisticRegressionState, DecisionTreeState, KnnState,
                 NaiveBayesState, IdentityState>;

struct InputSchema {
  std::vector<std::string> names;
  std::vector<ColumnKind> kinds;
  bool operator==(const InputSchema&) const = default;
};

struct FittedPipeline {
  Pipeline pipeline;
  TaskType task = TaskType::classification;
  InputSchema schema;
  std::vector<FittedStage> stages;  // one per pipeline stage

  bool operator==(const FittedPipeline&) const = default;
};

/// Fits stages left to right, each on the output of the previous one.
/// Throws StageError naming the failing stage.
FittedPipeline fit(const Pipeline& p, const TabularDataset& train, const TaskSpec& task,
                   std::uint64_t seed = 0);

/// Throws SchemaError when columns differ from the training schema.
Target predict(const FittedPipeline& f, const TabularDataset& data);

/// The frame the estimator sees: `data` after every fitted transforming stage.
/// Throws SchemaError like predict.
Frame transform(const FittedPipeline& f, const TabularDataset& data);

/// Fraction correct for classification, root-mean-square error for regression.
double score(const Target& truth, const Target& predicted, Metric metric);

/// Holdout or k-fold mean score. Stage failures propagate as StageError with the fold index.
EvaluationRecord evaluate(const Pipeline& p, const TabularDataset& d, const TaskSpec& task,
                          const Protocol& protocol, std::uint64_t seed);

// Logistic loss helpers, exposed for gradient checks ---------------------------

/// Mean log loss over rows plus (l2/2)·|w|², labels in {0,1}. Row-major features.
double logistic_loss(std::span<const double> weights, double bias,
                     std::span<const double> features, std::size_t cols,
                     std::span<const double> labels, double l2);

/// Gradient of logistic_loss; writes |w| entries to grad_w.
void logistic_gradient(std::span<const double> weights, double bias,
                       std::span<const double> features, std::size_t cols,
                       std::span<const double> labels, double l2, std::span<double> grad_w,
                       double& grad_b);

}  // namespace pilot::engine
