#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "primitives.hpp"

namespace pilot::engine::detail {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
  std::size_t count = 0;
};

/// Population mean and variance over non-missing cells (two-pass).
Moments moments(const std::vector<double>& xs) {
  Moments m;
  double sum = 0.0;
  for (double x : xs) {
    if (!std::isnan(x)) {
      sum += x;
      ++m.count;
    }
  }
  if (m.count == 0) return m;
  m.mean = sum / static_cast<double>(m.count);
  double ss = 0.0;
  for (double x : xs) {
    if (!std::isnan(x)) ss += (x - m.mean) * (x - m.mean);
  }
  m.variance = ss / static_cast<double>(m.count);
  return m;
}

}  // namespace

void require_complete(const Frame& f, std::string_view primitive) {
  for (const auto& c : f.columns) {
    const bool missing =
        c.kind == ColumnKind::numeric
            ? std::any_of(c.numbers.begin(), c.numbers.end(), [](double x) { return std::isnan(x); })
            : std::any_of(c.levels.begin(), c.levels.end(), [](const auto& l) { return !l; });
    if (missing) {
      throw StageFailure(std::string(primitive) + " cannot handle missing values in column '" +
                         c.name + "'; add mean_imputer");
    }
  }
}

void require_numeric_complete(const Frame& f, std::string_view primitive) {
  for (const auto& c : f.columns) {
    if (c.kind != ColumnKind::numeric) {
      throw StageFailure(std::string(primitive) + " needs numeric input but column '" + c.name +
                         "' is categorical; add one_hot_encoder");
    }
  }
  require_complete(f, primitive);
}

double param_real(const ParamMap& params, std::string_view name) {
  return std::get<double>(params.find(name)->second);
}

std::int64_t param_int(const ParamMap& params, std::string_view name) {
  return std::get<std::int64_t>(params.find(name)->second);
}

// mean_imputer -------------------------------------------------------------

MeanImputerState fit_mean_imputer(const Frame& f) {
  MeanImputerState s;
  for (const auto& c : f.columns) {
    if (c.kind == ColumnKind::numeric) {
      auto m = moments(c.numbers);
      s.numeric_fill.push_back(m.count == 0 ? 0.0 : m.mean);
      s.categorical_fill.emplace_back();
    } else {
      std::map<std::string, std::size_t> counts;
      for (const auto& l : c.levels) {
        if (l) ++counts[*l];
      }
      std::string mode;
      std::size_t best = 0;
      for (const auto& [level, n] : counts) {  // sorted, so ties keep the smallest level
        if (n > best) {
          best = n;
          mode = level;
        }
      }
      s.numeric_fill.push_back(kNaN);
      s.categorical_fill.push_back(mode);
    }
  }
  return s;
}

Frame apply(const MeanImputerState& s, Frame f) {
  for (std::size_t j = 0; j < f.columns.size(); ++j) {
    auto& c = f.columns[j];
    if (c.kind == ColumnKind::numeric) {
      for (auto& x : c.numbers) {
        if (std::isnan(x)) x = s.numeric_fill[j];
      }
    } else {
      for (auto& l : c.levels) {
        if (!l) l = s.categorical_fill[j];
      }
    }
  }
  return f;
}

// scalers -------------------------------------------------------------------

StandardScalerState fit_standard_scaler(const Frame& f) {
  StandardScalerState s;
  for (const auto& c : f.columns) {
    auto m = c.kind == ColumnKind::numeric ? moments(c.numbers) : Moments{};
    s.mean.push_back(m.mean);
    s.stddev.push_back(std::sqrt(m.variance));
  }
  return s;
}

Frame apply(const StandardScalerState& s, Frame f) {
  for (std::size_t j = 0; j < f.columns.size(); ++j) {
    auto& c = f.columns[j];
    if (c.kind != ColumnKind::numeric) continue;
    for (auto& x : c.numbers) {
      if (std::isnan(x)) continue;
      x = s.stddev[j] > 0.0 ? (x - s.mean[j]) / s.stddev[j] : 0.0;
    }
  }
  return f;
}

MinMaxScalerState fit_min_max_scaler(const Frame& f) {
  MinMaxScalerState s;
  for (const auto& c : f.columns) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    if (c.kind == ColumnKind::numeric) {
      for (double x : c.numbers) {
        if (std::isnan(x)) continue;
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
    }
    if (lo > hi) lo = hi = 0.0;
    s.min.push_back(lo);
    s.range.push_back(hi - lo);
  }
  return s;
}

Frame apply(const MinMaxScalerState& s, Frame f) {
  for (std::size_t j = 0; j < f.columns.size(); ++j) {
    auto& c = f.columns[j];
    if (c.kind != ColumnKind::numeric) continue;
    for (auto& x : c.numbers) {
      if (std::isnan(x)) continue;
      x = s.range[j] > 0.0 ? (x - s.min[j]) / s.range[j] : 0.0;
    }
  }
  return f;
}

// one_hot_encoder -------------------------------------------------------------

OneHotEncoderState fit_one_hot_encoder(const Frame& f) {
  OneHotEncoderState s;
  for (const auto& c : f.columns) {
    std::vector<std::string> cats;
    if (c.kind == ColumnKind::categorical) {
      for (const auto& l : c.levels) {
        if (l) cats.push_back(*l);
      }
      std::sort(cats.begin(), cats.end());
      cats.erase(std::unique(cats.begin(), cats.end()), cats.end());
    }
    s.categories.push_back(std::move(cats));
  }
  return s;
}

Frame apply(const OneHotEncoderState& s, const Frame& f) {
  Frame out;
  out.rows = f.rows;
  for (std::size_t j = 0; j < f.columns.size(); ++j) {
    const auto& c = f.columns[j];
    if (c.kind == ColumnKind::numeric) {
      out.columns.push_back(c);
      continue;
    }
    const auto& cats = s.categories[j];
    std::vector<Column> expanded(cats.size());
    for (std::size_t k = 0; k < cats.size(); ++k) {
      expanded[k].name = c.name + "=" + cats[k];
      expanded[k].kind = ColumnKind::numeric;
      expanded[k].numbers.assign(f.rows, 0.0);
    }
    for (std::size_t r = 0; r < f.rows; ++r) {
      if (!c.levels[r]) continue;
      auto it = std::lower_bound(cats.begin(), cats.end(), *c.levels[r]);
      if (it != cats.end() && *it == *c.levels[r]) {
        expanded[static_cast<std::size_t>(it - cats.begin())].numbers[r] = 1.0;
      }
    }
    for (auto& e : expanded) out.columns.push_back(std::move(e));
  }
  return out;
}

// feature selectors -----------------------------------------------------------

ColumnSelectorState fit_variance_threshold(const Frame& f, double threshold) {
  ColumnSelectorState s;
  for (std::size_t j = 0; j < f.columns.size(); ++j) {
    const auto& c = f.columns[j];
    if (c.kind == ColumnKind::categorical) {
      s.scores.push_back(0.0);
      s.kept.push_back(j);
      continue;
    }
    const double var = moments(c.numbers).variance;
    s.scores.push_back(var);
    if (var > threshold) s.kept.push_back(j);
  }
  return s;
}

ColumnSelectorState fit_select_k_best(const Frame& f, const EncodedTarget& y, std::int64_t k) {
  const std::size_t p = f.columns.size();
  if (static_cast<std::size_t>(k) > p) {
    throw StageFailure("k=" + std::to_string(k) + " exceeds the " + std::to_string(p) +
                       " available columns");
  }
  std::vector<double> target(f.rows);
  for (std::size_t r = 0; r < f.rows; ++r) {
    target[r] = y.task == TaskType::classification ? static_cast<double>(y.codes[r]) : y.values[r];
  }
  ColumnSelectorState s;
  for (const auto& c : f.columns) {
    double score = 0.0;
    if (c.kind == ColumnKind::numeric) {
      double sx = 0, sy = 0;
      std::size_t n = 0;
      for (std::size_t r = 0; r < f.rows; ++r) {
        if (std::isnan(c.numbers[r])) continue;
        sx += c.numbers[r];
        sy += target[r];
        ++n;
      }
      if (n > 1) {
        const double mx = sx / static_cast<double>(n);
        const double my = sy / static_cast<double>(n);
        double sxy = 0, sxx = 0, syy = 0;
        for (std::size_t r = 0; r < f.rows; ++r) {
          if (std::isnan(c.numbers[r])) continue;
          const double dx = c.numbers[r] - mx;
          const double dy = target[r] - my;
          sxy += dx * dy;
          sxx += dx * dx;
          syy += dy * dy;
        }
        if (sxx > 0.0 && syy > 0.0) score = std::abs(sxy / std::sqrt(sxx * syy));
      }
    }
    s.scores.push_back(score);
  }
  std::vector<std::size_t> order(p);
  for (std::size_t j = 0; j < p; ++j) order[j] = j;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return s.scores[a] > s.scores[b]; });
  s.kept.assign(order.begin(), order.begin() + k);
  std::sort(s.kept.begin(), s.kept.end());
  return s;
}

Frame apply(const ColumnSelectorState& s, const Frame& f) {
  Frame out;
  out.rows = f.rows;
  for (auto j : s.kept) out.columns.push_back(f.columns[j]);
  return out;
}

}  // namespace pilot::engine::detail
