#include <algorithm>
#include <numeric>

#include "primitives.hpp"

namespace pilot::engine::detail {

KnnState fit_knn(const Frame& f, const EncodedTarget& y, const ParamMap& params) {
  require_complete(f, "knn_classifier");
  return {static_cast<std::size_t>(param_int(params, "k")), f, y};
}

Target predict(const KnnState& s, const Frame& f) {
  require_complete(f, "knn_classifier");
  const std::size_t n = s.train.rows;
  const std::size_t k = std::min(s.k, n);
  const bool classify = s.target.task == TaskType::classification;
  Labels labels;
  Values values;
  std::vector<std::pair<double, std::size_t>> dist(n);
  std::vector<std::size_t> votes(s.target.classes.size());
  for (std::size_t q = 0; q < f.rows; ++q) {
    for (std::size_t t = 0; t < n; ++t) {
      // Squared Euclidean on numeric columns plus Hamming count on categorical ones.
      double d = 0.0;
      for (std::size_t j = 0; j < f.columns.size(); ++j) {
        const auto& qc = f.columns[j];
        const auto& tc = s.train.columns[j];
        if (qc.kind == ColumnKind::numeric) {
          const double diff = qc.numbers[q] - tc.numbers[t];
          d += diff * diff;
        } else {
          d += *qc.levels[q] == *tc.levels[t] ? 0.0 : 1.0;
        }
      }
      dist[t] = {d, t};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    if (classify) {
      std::fill(votes.begin(), votes.end(), 0);
      for (std::size_t i = 0; i < k; ++i) ++votes[s.target.codes[dist[i].second]];
      const auto winner = std::max_element(votes.begin(), votes.end()) - votes.begin();
      labels.push_back(s.target.classes[static_cast<std::size_t>(winner)]);
    } else {
      double sum = 0.0;
      for (std::size_t i = 0; i < k; ++i) sum += s.target.values[dist[i].second];
      values.push_back(k == 0 ? 0.0 : sum / static_cast<double>(k));
    }
  }
  if (classify) return labels;
  return values;
}

}  // namespace pilot::engine::detail
