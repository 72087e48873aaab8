#include <limits>
#include <vector>

#include "pilot/error.hpp"
#include "pilot/pipeline.hpp"

namespace pilot {
namespace {

constexpr double kUnbounded = std::numeric_limits<double>::max();

ParamSpec real_param(std::string name, double lo, double hi, double def) {
  return {std::move(name), ParamType::real, lo, hi, def, {}};
}

ParamSpec int_param(std::string name, std::int64_t lo, std::int64_t hi, std::int64_t def) {
  return {std::move(name), ParamType::integer, static_cast<double>(lo), static_cast<double>(hi),
          def, {}};
}

PrimitiveDescriptor primitive(std::string name, StageKind kind, std::string doc,
                              std::vector<ParamSpec> params = {}) {
  PrimitiveDescriptor d{std::move(name), kind, {}, std::move(doc), std::move(params)};
  d.signature = d.call_string(d.defaults());
  return d;
}

std::vector<PrimitiveDescriptor> build_registry() {
  // Signatures and doc headers feed pipeline embeddings; changing them
  // changes every stored pipeline vector.
  std::vector<PrimitiveDescriptor> r;
  r.push_back(primitive("mean_imputer", StageKind::preprocessor,
                        "Fills missing numeric cells with the training mean and missing "
                        "categorical cells with the training mode."));
  r.push_back(primitive("standard_scaler", StageKind::preprocessor,
                        "Centers numeric columns on the training mean and divides by the "
                        "training standard deviation."));
  r.push_back(primitive("min_max_scaler", StageKind::preprocessor,
                        "Rescales numeric columns linearly onto the training range [0, 1]."));
  r.push_back(primitive("one_hot_encoder", StageKind::preprocessor,
                        "Expands each categorical column into one indicator column per "
                        "training category."));
  r.push_back(primitive("variance_threshold", StageKind::feature_selector,
                        "Drops numeric columns whose training variance is at most the threshold.",
                        {real_param("threshold", 0.0, kUnbounded, 0.0)}));
  r.push_back(primitive("select_k_best", StageKind::feature_selector,
                        "Keeps the k columns with the strongest absolute correlation to the "
                        "target.",
                        {int_param("k", 1, 1'000'000, 10)}));
  r.push_back(primitive("logistic_regression", StageKind::estimator,
                        "Binary/multiclass linear classifier trained by gradient descent.",
                        {real_param("learning_rate", 1e-9, 100.0, 0.1),
                         int_param("epochs", 1, 1'000'000, 200),
                         real_param("l2", 0.0, 1e6, 0.0)}));
  r.push_back(primitive("decision_tree", StageKind::estimator,
                        "Binary tree grown greedily by Gini impurity; max_depth 0 leaves depth "
                        "unbounded.",
                        {int_param("max_depth", 0, 10'000, 0),
                         int_param("min_samples_leaf", 1, 1'000'000, 1)}));
  r.push_back(primitive("knn_classifier", StageKind::estimator,
                        "Predicts the majority label of the k nearest training rows.",
                        {int_param("k", 1, 1'000'000, 5)}));
  r.push_back(primitive("gaussian_naive_bayes", StageKind::estimator,
                        "Naive Bayes with per-class Gaussian numeric likelihoods and smoothed "
                        "categorical frequencies.",
                        {real_param("alpha", 1e-12, 1e6, 1.0)}));
  r.push_back(primitive("identity_postprocessor", StageKind::postprocessor,
                        "Returns the estimator's predictions unchanged."));
  return r;
}

}  // namespace

std::span<const PrimitiveDescriptor> registry() {
  static const std::vector<PrimitiveDescriptor> instance = build_registry();
  return instance;
}

const PrimitiveDescriptor* find_primitive(std::string_view name) {
  for (const auto& d : registry()) {
    if (d.name == name) return &d;
  }
  return nullptr;
}

}  // namespace pilot
