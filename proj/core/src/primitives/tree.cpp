#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "primitives.hpp"

namespace pilot::engine::detail {
namespace {

struct Split {
  double cost = std::numeric_limits<double>::infinity();  // weighted child impurity
  int feature = -1;
  bool categorical = false;
  double threshold = 0.0;
  std::string category;
};

/// Impurity accumulators. Classification tracks n·Gini = n - Σc²/n,
/// regression tracks the sum of squared errors.
class Impurity {
 public:
  explicit Impurity(const EncodedTarget& y) : y_(&y), counts_(y.classes.size(), 0) {}

  void add(std::size_t row) { update(row, +1); }
  void remove(std::size_t row) { update(row, -1); }
  std::size_t size() const { return n_; }

  double cost() const {
    if (n_ == 0) return 0.0;
    const double n = static_cast<double>(n_);
    if (y_->task == TaskType::classification) return n - sum_sq_counts_ / n;
    return std::max(0.0, sum_sq_ - sum_ * sum_ / n);
  }

 private:
  void update(std::size_t row, int sign) {
    if (y_->task == TaskType::classification) {
      auto& c = counts_[y_->codes[row]];
      const double before = static_cast<double>(c);
      c = static_cast<std::size_t>(static_cast<long long>(c) + sign);
      const double after = static_cast<double>(c);
      sum_sq_counts_ += after * after - before * before;
    } else {
      const double v = y_->values[row];
      sum_ += sign * v;
      sum_sq_ += sign * v * v;
    }
    n_ = static_cast<std::size_t>(static_cast<long long>(n_) + sign);
  }

  const EncodedTarget* y_;
  std::vector<std::size_t> counts_;
  double sum_sq_counts_ = 0.0;
  double sum_ = 0.0;
  double sum_sq_ = 0.0;
  std::size_t n_ = 0;
};

bool is_pure(const EncodedTarget& y, const std::vector<std::size_t>& rows) {
  for (auto r : rows) {
    if (y.task == TaskType::classification ? y.codes[r] != y.codes[rows[0]]
                                           : y.values[r] != y.values[rows[0]]) {
      return false;
    }
  }
  return true;
}

Split best_split(const Frame& f, const EncodedTarget& y, const std::vector<std::size_t>& rows,
                 std::size_t min_leaf) {
  Split best;
  const std::size_t n = rows.size();
  for (std::size_t j = 0; j < f.columns.size(); ++j) {
    const auto& col = f.columns[j];
    if (col.kind == ColumnKind::numeric) {
      std::vector<std::size_t> order = rows;
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return col.numbers[a] < col.numbers[b];
      });
      Impurity left(y), right(y);
      for (auto r : order) right.add(r);
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left.add(order[i]);
        right.remove(order[i]);
        const double a = col.numbers[order[i]];
        const double b = col.numbers[order[i + 1]];
        if (!(a < b) || left.size() < min_leaf || right.size() < min_leaf) continue;
        const double cost = left.cost() + right.cost();
        if (cost < best.cost) {
          double mid = a + (b - a) / 2.0;
          if (!(mid < b)) mid = a;
          best = {cost, static_cast<int>(j), false, mid, {}};
        }
      }
    } else {
      std::map<std::string, std::vector<std::size_t>> by_level;
      for (auto r : rows) by_level[*col.levels[r]].push_back(r);
      if (by_level.size() < 2) continue;
      for (const auto& [level, members] : by_level) {
        if (members.size() < min_leaf || n - members.size() < min_leaf) continue;
        Impurity left(y), right(y);
        for (auto r : rows) {
          if (*col.levels[r] == level) {
            left.add(r);
          } else {
            right.add(r);
          }
        }
        const double cost = left.cost() + right.cost();
        if (cost < best.cost) best = {cost, static_cast<int>(j), true, 0.0, level};
      }
    }
  }
  return best;
}

bool goes_left(const TreeNode& node, const Frame& f, std::size_t row) {
  const auto& col = f.columns[static_cast<std::size_t>(node.feature)];
  if (node.categorical) return col.levels[row] && *col.levels[row] == node.category;
  return col.numbers[row] <= node.threshold;
}

void make_leaf(TreeNode& node, const EncodedTarget& y, const std::vector<std::size_t>& rows) {
  node.feature = -1;
  if (y.task == TaskType::classification) {
    std::vector<std::size_t> counts(y.classes.size(), 0);
    for (auto r : rows) ++counts[y.codes[r]];
    // max_element returns the first maximum, i.e. the smallest label on ties
    node.leaf_class =
        static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
  } else {
    double sum = 0.0;
    for (auto r : rows) sum += y.values[r];
    node.leaf_value = rows.empty() ? 0.0 : sum / static_cast<double>(rows.size());
  }
}

}  // namespace

DecisionTreeState fit_decision_tree(const Frame& f, const EncodedTarget& y,
                                    const ParamMap& params) {
  require_complete(f, "decision_tree");
  const auto max_depth = static_cast<std::size_t>(param_int(params, "max_depth"));
  const auto min_leaf = static_cast<std::size_t>(param_int(params, "min_samples_leaf"));

  DecisionTreeState s;
  s.task = y.task;
  s.classes = y.classes;

  struct Pending {
    int node;
    std::vector<std::size_t> rows;
    std::size_t depth;
  };
  std::vector<std::size_t> all(f.rows);
  std::iota(all.begin(), all.end(), std::size_t{0});
  s.nodes.emplace_back();
  std::vector<Pending> stack;
  stack.push_back({0, std::move(all), 0});
  while (!stack.empty()) {
    Pending item = std::move(stack.back());
    stack.pop_back();
    auto& node = s.nodes[static_cast<std::size_t>(item.node)];
    make_leaf(node, y, item.rows);
    const bool depth_capped = max_depth > 0 && item.depth >= max_depth;
    if (item.rows.empty() || depth_capped || item.rows.size() < 2 * min_leaf ||
        is_pure(y, item.rows)) {
      continue;
    }
    Split split = best_split(f, y, item.rows, min_leaf);
    if (split.feature < 0) continue;
    node.feature = split.feature;
    node.categorical = split.categorical;
    node.threshold = split.threshold;
    node.category = split.category;
    std::vector<std::size_t> left_rows, right_rows;
    for (auto r : item.rows) {
      (goes_left(node, f, r) ? left_rows : right_rows).push_back(r);
    }
    const int left = static_cast<int>(s.nodes.size());
    const int right = left + 1;
    node.left = left;
    node.right = right;
    // `node` may dangle after these pushes
    s.nodes.emplace_back();
    s.nodes.emplace_back();
    stack.push_back({right, std::move(right_rows), item.depth + 1});
    stack.push_back({left, std::move(left_rows), item.depth + 1});
  }
  return s;
}

Target predict(const DecisionTreeState& s, const Frame& f) {
  require_complete(f, "decision_tree");
  Labels labels;
  Values values;
  for (std::size_t r = 0; r < f.rows; ++r) {
    std::size_t at = 0;
    while (s.nodes[at].feature >= 0) {
      at = static_cast<std::size_t>(goes_left(s.nodes[at], f, r) ? s.nodes[at].left
                                                                   : s.nodes[at].right);
    }
    if (s.task == TaskType::classification) {
      labels.push_back(s.classes[s.nodes[at].leaf_class]);
    } else {
      values.push_back(s.nodes[at].leaf_value);
    }
  }
  if (s.task == TaskType::classification) return labels;
  return values;
}

}  // namespace pilot::engine::detail
