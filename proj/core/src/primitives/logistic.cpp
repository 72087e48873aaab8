#include <cmath>
#include <limits>

#include "pilot/error.hpp"
#include "primitives.hpp"

namespace pilot::engine {
namespace {

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double linear(std::span<const double> w, double b, const double* row) {
  double z = b;
  for (std::size_t j = 0; j < w.size(); ++j) z += w[j] * row[j];
  return z;
}

void check_shapes(std::span<const double> w, std::span<const double> x, std::size_t cols,
                  std::span<const double> y) {
  if (w.size() != cols || x.size() != cols * y.size()) {
    throw DimensionError("logistic loss: inconsistent weight, feature or label sizes");
  }
}

}  // namespace

double logistic_loss(std::span<const double> weights, double bias, std::span<const double> features,
                     std::size_t cols, std::span<const double> labels, double l2) {
  check_shapes(weights, features, cols, labels);
  const std::size_t n = labels.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = linear(weights, bias, features.data() + i * cols);
    // -[y log σ(z) + (1-y) log(1-σ(z))] = softplus(z) - y z
    total += softplus(z) - labels[i] * z;
  }
  double reg = 0.0;
  for (double w : weights) reg += w * w;
  return (n == 0 ? 0.0 : total / static_cast<double>(n)) + 0.5 * l2 * reg;
}

void logistic_gradient(std::span<const double> weights, double bias,
                       std::span<const double> features, std::size_t cols,
                       std::span<const double> labels, double l2, std::span<double> grad_w,
                       double& grad_b) {
  check_shapes(weights, features, cols, labels);
  if (grad_w.size() != cols) throw DimensionError("logistic gradient: grad_w has the wrong size");
  const std::size_t n = labels.size();
  std::fill(grad_w.begin(), grad_w.end(), 0.0);
  grad_b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = features.data() + i * cols;
    const double r = sigmoid(linear(weights, bias, row)) - labels[i];
    for (std::size_t j = 0; j < cols; ++j) grad_w[j] += r * row[j];
    grad_b += r;
  }
  const double inv = n == 0 ? 0.0 : 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < cols; ++j) grad_w[j] = grad_w[j] * inv + l2 * weights[j];
  grad_b *= inv;
}

namespace detail {
namespace {

/// Row-major standardized copy of the frame.
std::vector<double> standardized(const LogisticRegressionState& s, const Frame& f) {
  const std::size_t p = f.columns.size();
  std::vector<double> x(f.rows * p);
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t r = 0; r < f.rows; ++r) {
      x[r * p + j] = (f.columns[j].numbers[r] - s.mean[j]) / s.scale[j];
    }
  }
  return x;
}

}  // namespace

LogisticRegressionState fit_logistic_regression(const Frame& f, const EncodedTarget& y,
                                                const ParamMap& params) {
  if (y.task != TaskType::classification) {
    throw StageFailure("logistic_regression requires a classification task");
  }
  require_numeric_complete(f, "logistic_regression");
  const double lr = param_real(params, "learning_rate");
  const auto epochs = param_int(params, "epochs");
  const double l2 = param_real(params, "l2");
  const std::size_t p = f.columns.size();
  const std::size_t n = f.rows;

  LogisticRegressionState s;
  s.classes = y.classes;
  for (const auto& c : f.columns) {
    double mean = 0.0;
    for (double v : c.numbers) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : c.numbers) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    s.mean.push_back(mean);
    s.scale.push_back(sd > 0.0 ? sd : 1.0);
  }
  const auto x = standardized(s, f);

  const std::size_t k = s.classes.size();
  const std::size_t models = k <= 1 ? 0 : (k == 2 ? 1 : k);
  std::vector<double> labels(n);
  std::vector<double> grad(p);
  for (std::size_t m = 0; m < models; ++m) {
    const std::size_t positive = k == 2 ? 1 : m;
    for (std::size_t r = 0; r < n; ++r) labels[r] = y.codes[r] == positive ? 1.0 : 0.0;
    std::vector<double> w(p, 0.0);
    double b = 0.0;
    for (std::int64_t e = 0; e < epochs; ++e) {
      double gb = 0.0;
      logistic_gradient(w, b, x, p, labels, l2, grad, gb);
      for (std::size_t j = 0; j < p; ++j) w[j] -= lr * grad[j];
      b -= lr * gb;
    }
    s.weights.push_back(std::move(w));
    s.bias.push_back(b);
  }
  return s;
}

Target predict(const LogisticRegressionState& s, const Frame& f) {
  require_numeric_complete(f, "logistic_regression");
  const std::size_t p = f.columns.size();
  const auto x = standardized(s, f);
  Labels out;
  out.reserve(f.rows);
  for (std::size_t r = 0; r < f.rows; ++r) {
    std::size_t label = 0;
    if (s.weights.size() == 1) {
      label = linear(s.weights[0], s.bias[0], x.data() + r * p) > 0.0 ? 1 : 0;
    } else if (!s.weights.empty()) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t m = 0; m < s.weights.size(); ++m) {
        const double z = linear(s.weights[m], s.bias[m], x.data() + r * p);
        if (z > best) {
          best = z;
          label = m;
        }
      }
    }
    out.push_back(s.classes[label]);
  }
  return out;
}

}  // namespace detail
}  // namespace pilot::engine
