#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include "primitives.hpp"

namespace pilot::engine::detail {
namespace {

constexpr double kVarianceFloor = 1e-9;

}  // namespace

NaiveBayesState fit_naive_bayes(const Frame& f, const EncodedTarget& y, const ParamMap& params) {
  if (y.task != TaskType::classification) {
    throw StageFailure("gaussian_naive_bayes requires a classification task");
  }
  const double alpha = param_real(params, "alpha");
  const std::size_t k = y.classes.size();
  const std::size_t p = f.columns.size();

  NaiveBayesState s;
  s.classes = y.classes;
  std::vector<std::size_t> class_rows(k, 0);
  for (auto c : y.codes) ++class_rows[c];
  for (std::size_t c = 0; c < k; ++c) {
    s.log_prior.push_back(std::log(static_cast<double>(class_rows[c]) / static_cast<double>(f.rows)));
  }
  s.mean.assign(k, std::vector<double>(p, 0.0));
  s.variance.assign(k, std::vector<double>(p, 1.0));
  s.level_log_prob.assign(k, std::vector<std::map<std::string, double>>(p));
  s.unseen_log_prob.assign(k, std::vector<double>(p, 0.0));

  for (std::size_t j = 0; j < p; ++j) {
    const auto& col = f.columns[j];
    if (col.kind == ColumnKind::numeric) {
      std::vector<double> sum(k, 0.0), count(k, 0.0);
      for (std::size_t r = 0; r < f.rows; ++r) {
        if (std::isnan(col.numbers[r])) continue;
        sum[y.codes[r]] += col.numbers[r];
        count[y.codes[r]] += 1.0;
      }
      std::vector<double> ss(k, 0.0);
      for (std::size_t c = 0; c < k; ++c) s.mean[c][j] = count[c] > 0 ? sum[c] / count[c] : 0.0;
      for (std::size_t r = 0; r < f.rows; ++r) {
        if (std::isnan(col.numbers[r])) continue;
        const double d = col.numbers[r] - s.mean[y.codes[r]][j];
        ss[y.codes[r]] += d * d;
      }
      for (std::size_t c = 0; c < k; ++c) {
        s.variance[c][j] = std::max(count[c] > 0 ? ss[c] / count[c] : 1.0, kVarianceFloor);
      }
    } else {
      std::set<std::string> levels;
      std::vector<std::map<std::string, double>> counts(k);
      std::vector<double> observed(k, 0.0);
      for (std::size_t r = 0; r < f.rows; ++r) {
        if (!col.levels[r]) continue;
        levels.insert(*col.levels[r]);
        counts[y.codes[r]][*col.levels[r]] += 1.0;
        observed[y.codes[r]] += 1.0;
      }
      const double v = static_cast<double>(levels.size());
      for (std::size_t c = 0; c < k; ++c) {
        const double denom = observed[c] + alpha * v;
        for (const auto& level : levels) {
          auto it = counts[c].find(level);
          const double n = it == counts[c].end() ? 0.0 : it->second;
          s.level_log_prob[c][j][level] = std::log((n + alpha) / denom);
        }
        s.unseen_log_prob[c][j] = std::log(alpha / (denom > 0.0 ? denom : alpha));
      }
    }
  }
  return s;
}

Target predict(const NaiveBayesState& s, const Frame& f) {
  const std::size_t k = s.classes.size();
  Labels out;
  out.reserve(f.rows);
  for (std::size_t r = 0; r < f.rows; ++r) {
    std::size_t best_class = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      double lp = s.log_prior[c];
      for (std::size_t j = 0; j < f.columns.size(); ++j) {
        const auto& col = f.columns[j];
        if (col.kind == ColumnKind::numeric) {
          const double x = col.numbers[r];
          if (std::isnan(x)) continue;  // missing cells drop out of the product
          const double var = s.variance[c][j];
          const double d = x - s.mean[c][j];
          lp += -0.5 * std::log(2.0 * std::numbers::pi * var) - d * d / (2.0 * var);
        } else {
          if (!col.levels[r]) continue;
          const auto& table = s.level_log_prob[c][j];
          auto it = table.find(*col.levels[r]);
          lp += it == table.end() ? s.unseen_log_prob[c][j] : it->second;
        }
      }
      if (lp > best) {
        best = lp;
        best_class = c;
      }
    }
    out.push_back(s.classes[best_class]);
  }
  return out;
}

}  // namespace pilot::engine::detail
