#pragma once

#include <stdexcept>
#include <string>

#include "pilot/engine.hpp"

namespace pilot::engine::detail {

/// Thrown by primitives; the engine rewraps it as StageError with the stage index.
class StageFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fails unless every column is numeric and complete.
void require_numeric_complete(const Frame& f, std::string_view primitive);
/// Fails on any missing cell.
void require_complete(const Frame& f, std::string_view primitive);

double param_real(const ParamMap& params, std::string_view name);
std::int64_t param_int(const ParamMap& params, std::string_view name);

MeanImputerState fit_mean_imputer(const Frame& f);
Frame apply(const MeanImputerState& s, Frame f);

StandardScalerState fit_standard_scaler(const Frame& f);
Frame apply(const StandardScalerState& s, Frame f);

MinMaxScalerState fit_min_max_scaler(const Frame& f);
Frame apply(const MinMaxScalerState& s, Frame f);

OneHotEncoderState fit_one_hot_encoder(const Frame& f);
Frame apply(const OneHotEncoderState& s, const Frame& f);

ColumnSelectorState fit_variance_threshold(const Frame& f, double threshold);
ColumnSelectorState fit_select_k_best(const Frame& f, const EncodedTarget& y, std::int64_t k);
Frame apply(const ColumnSelectorState& s, const Frame& f);

LogisticRegressionState fit_logistic_regression(const Frame& f, const EncodedTarget& y,
                                                const ParamMap& params);
Target predict(const LogisticRegressionState& s, const Frame& f);

DecisionTreeState fit_decision_tree(const Frame& f, const EncodedTarget& y,
                                    const ParamMap& params);
Target predict(const DecisionTreeState& s, const Frame& f);

KnnState fit_knn(const Frame& f, const EncodedTarget& y, const ParamMap& params);
Target predict(const KnnState& s, const Frame& f);

NaiveBayesState fit_naive_bayes(const Frame& f, const EncodedTarget& y, const ParamMap& params);
Target predict(const NaiveBayesState& s, const Frame& f);

}  // namespace pilot::engine::detail
