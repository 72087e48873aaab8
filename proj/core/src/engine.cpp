#include "pilot/engine.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "log.hpp"
#include "pilot/error.hpp"
#include "pilot/random.hpp"
#include "primitives/primitives.hpp"

namespace pilot::engine {

Frame Frame::from_dataset(const TabularDataset& d) {
  Frame f;
  f.rows = d.row_count();
  f.columns.resize(d.column_count());
  for (std::size_t j = 0; j < d.column_count(); ++j) {
    auto& c = f.columns[j];
    c.name = d.column_names[j];
    c.kind = d.column_kinds[j];
    if (c.kind == ColumnKind::numeric) {
      c.numbers.reserve(f.rows);
      for (const auto& row : d.rows) {
        const auto* v = std::get_if<double>(&row[j]);
        c.numbers.push_back(v ? *v : std::numeric_limits<double>::quiet_NaN());
      }
    } else {
      c.levels.reserve(f.rows);
      for (const auto& row : d.rows) {
        const auto* s = std::get_if<std::string>(&row[j]);
        c.levels.push_back(s ? std::optional<std::string>(*s) : std::nullopt);
      }
    }
  }
  return f;
}

EncodedTarget EncodedTarget::encode(const Target& t, TaskType task) {
  EncodedTarget e;
  e.task = task;
  if (task == TaskType::classification) {
    const auto* labels = std::get_if<Labels>(&t);
    if (labels == nullptr) throw ValidationError("classification needs a label target");
    std::map<std::string, std::size_t> index;
    for (const auto& l : *labels) index.emplace(l, 0);
    for (auto& [label, code] : index) {
      code = e.classes.size();
      e.classes.push_back(label);
    }
    e.codes.reserve(labels->size());
    for (const auto& l : *labels) e.codes.push_back(index.at(l));
  } else {
    const auto* values = std::get_if<Values>(&t);
    if (values == nullptr) throw ValidationError("regression needs a real-valued target");
    e.values = *values;
  }
  return e;
}

namespace {

using detail::StageFailure;

InputSchema schema_of(const TabularDataset& d) { return {d.column_names, d.column_kinds}; }

Frame transform(const FittedStage& state, Frame frame) {
  return std::visit(
      [&frame](const auto& s) -> Frame {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, MeanImputerState> || std::is_same_v<S, StandardScalerState> ||
                      std::is_same_v<S, MinMaxScalerState>) {
          return detail::apply(s, std::move(frame));
        } else if constexpr (std::is_same_v<S, OneHotEncoderState> ||
                             std::is_same_v<S, ColumnSelectorState>) {
          return detail::apply(s, frame);
        } else {
          return std::move(frame);
        }
      },
      state);
}

bool is_estimator_state(const FittedStage& s) {
  return std::holds_alternative<LogisticRegressionState>(s) ||
         std::holds_alternative<DecisionTreeState>(s) || std::holds_alternative<KnnState>(s) ||
         std::holds_alternative<NaiveBayesState>(s);
}

Target estimate(const FittedStage& state, const Frame& frame) {
  return std::visit(
      [&frame](const auto& s) -> Target {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, LogisticRegressionState> ||
                      std::is_same_v<S, DecisionTreeState> || std::is_same_v<S, KnnState> ||
                      std::is_same_v<S, NaiveBayesState>) {
          return detail::predict(s, frame);
        } else {
          throw StageFailure("not an estimator");
        }
      },
      state);
}

FittedStage fit_stage(const StageSpec& stage, const Frame& frame, const EncodedTarget& y) {
  const auto& name = stage.primitive;
  const auto& params = stage.params;
  if (name == "mean_imputer") return detail::fit_mean_imputer(frame);
  if (name == "standard_scaler") return detail::fit_standard_scaler(frame);
  if (name == "min_max_scaler") return detail::fit_min_max_scaler(frame);
  if (name == "one_hot_encoder") return detail::fit_one_hot_encoder(frame);
  if (name == "variance_threshold") {
    return detail::fit_variance_threshold(frame, detail::param_real(params, "threshold"));
  }
  if (name == "select_k_best") return detail::fit_select_k_best(frame, y, detail::param_int(params, "k"));
  if (name == "logistic_regression") return detail::fit_logistic_regression(frame, y, params);
  if (name == "decision_tree") return detail::fit_decision_tree(frame, y, params);
  if (name == "knn_classifier") return detail::fit_knn(frame, y, params);
  if (name == "gaussian_naive_bayes") return detail::fit_naive_bayes(frame, y, params);
  if (name == "identity_postprocessor") return IdentityState{};
  throw StageFailure("no implementation for primitive '" + name + "'");
}

}  // namespace

FittedPipeline fit(const Pipeline& p, const TabularDataset& train, const TaskSpec& task,
                   std::uint64_t /*seed*/) {
  // Every built-in primitive is deterministic; the seed is reserved for
  // stochastic primitives.
  if (p.empty()) throw ValidationError("pipeline has no stages");
  if (train.row_count() == 0) throw ValidationError("cannot fit on an empty dataset");
  train.validate();
  FittedPipeline f{p, task.task_type, schema_of(train), {}};
  Frame frame = Frame::from_dataset(train);
  const EncodedTarget y = EncodedTarget::encode(train.target, task.task_type);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto& stage = p.stages()[i];
    try {
      FittedStage state = fit_stage(stage, frame, y);
      if (stage.kind != StageKind::estimator) frame = transform(state, std::move(frame));
      f.stages.push_back(std::move(state));
    } catch (const StageFailure& e) {
      throw StageError(i, stage.primitive, e.what());
    }
  }
  return f;
}

namespace {

void check_schema(const FittedPipeline& f, const TabularDataset& data) {
  if (data.column_names != f.schema.names || data.column_kinds != f.schema.kinds) {
    throw SchemaError("dataset columns do not match the columns the pipeline was fitted on");
  }
}

}  // namespace

Frame transform(const FittedPipeline& f, const TabularDataset& data) {
  check_schema(f, data);
  Frame frame = Frame::from_dataset(data);
  for (std::size_t i = 0; i < f.stages.size(); ++i) {
    if (is_estimator_state(f.stages[i])) break;
    try {
      frame = transform(f.stages[i], std::move(frame));
    } catch (const StageFailure& e) {
      throw StageError(i, f.pipeline.stages()[i].primitive, e.what());
    }
  }
  return frame;
}

Target predict(const FittedPipeline& f, const TabularDataset& data) {
  check_schema(f, data);
  Frame frame = Frame::from_dataset(data);
  Target out;
  for (std::size_t i = 0; i < f.stages.size(); ++i) {
    const auto& state = f.stages[i];
    try {
      if (is_estimator_state(state)) {
        out = estimate(state, frame);
      } else {
        frame = transform(state, std::move(frame));
      }
    } catch (const StageFailure& e) {
      throw StageError(i, f.pipeline.stages()[i].primitive, e.what());
    }
  }
  return out;
}

double score(const Target& truth, const Target& predicted, Metric metric) {
  if (target_size(truth) != target_size(predicted)) {
    throw DimensionError("prediction count differs from target count");
  }
  const std::size_t n = target_size(truth);
  if (n == 0) throw ValidationError("cannot score zero predictions");
  if (metric == Metric::accuracy) {
    const auto* t = std::get_if<Labels>(&truth);
    const auto* p = std::get_if<Labels>(&predicted);
    if (t == nullptr || p == nullptr) throw ValidationError("accuracy needs label targets");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) correct += (*t)[i] == (*p)[i] ? 1 : 0;
    return static_cast<double>(correct) / static_cast<double>(n);
  }
  const auto* t = std::get_if<Values>(&truth);
  const auto* p = std::get_if<Values>(&predicted);
  if (t == nullptr || p == nullptr) throw ValidationError("rmse needs real-valued targets");
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) ss += ((*t)[i] - (*p)[i]) * ((*t)[i] - (*p)[i]);
  return std::sqrt(ss / static_cast<double>(n));
}

EvaluationRecord evaluate(const Pipeline& p, const TabularDataset& d, const TaskSpec& task,
                          const Protocol& protocol, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  task.validate();
  if (d.row_count() == 0) throw ValidationError("cannot evaluate on an empty dataset");

  std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> folds;
  const auto signed_seed = static_cast<std::int64_t>(seed);
  if (protocol.kind == Protocol::Kind::holdout) {
    auto s = split(d, task, signed_seed);
    folds.emplace_back(std::move(s.train_rows), std::move(s.test_rows));
  } else {
    auto tests = kfold_indices(d, task, protocol.folds, signed_seed);
    for (auto& test : tests) {
      std::vector<std::size_t> train;
      train.reserve(d.row_count() - test.size());
      for (std::size_t i = 0, t = 0; i < d.row_count(); ++i) {
        if (t < test.size() && test[t] == i) {
          ++t;
        } else {
          train.push_back(i);
        }
      }
      folds.emplace_back(std::move(train), std::move(test));
    }
  }

  EvaluationRecord rec;
  rec.metric = task.metric;
  rec.pipeline = p;
  for (std::size_t k = 0; k < folds.size(); ++k) {
    const auto train = d.subset(folds[k].first);
    const auto test = d.subset(folds[k].second);
    try {
      const auto fitted = fit(p, train, task, Rng::derive(seed, k).next());
      rec.fold_scores.push_back(score(test.target, predict(fitted, test), task.metric));
    } catch (const StageError& e) {
      throw e.with_fold(k);
    }
  }
  rec.score = std::accumulate(rec.fold_scores.begin(), rec.fold_scores.end(), 0.0) /
              static_cast<double>(rec.fold_scores.size());
  rec.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::steady_clock::now() - start)
                         .count();
  pilot::detail::logger().debug("evaluated {}-stage pipeline: {} = {}", p.size(),
                                to_string(task.metric), rec.score);
  return rec;
}

}  // namespace pilot::engine
