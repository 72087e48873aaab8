#include "pilot/metricnet.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>

#include "json_util.hpp"
#include "pilot/engine.hpp"
#include "pilot/tabular.hpp"
#include "log.hpp"
#include "pilot/error.hpp"
#include "pilot/random.hpp"

namespace pilot::metricnet {

std::string_view to_string(TargetMode m) {
  return m == TargetMode::pipeline_distance ? "pipeline_distance" : "performance";
}

TargetMode parse_target_mode(std::string_view s) {
  if (s == "pipeline_distance") return TargetMode::pipeline_distance;
  if (s == "performance") return TargetMode::performance;
  throw ValidationError("unknown target mode '" + std::string(s) + "'");
}

void TrainConfig::validate() const {
  if (batch_size == 0) throw ValidationError("batch_size must be positive");
  if (epochs == 0) throw ValidationError("epochs must be at least 1");
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw ValidationError("Adam betas must lie in [0, 1)");
  }
  if (!(adam_eps > 0.0)) throw ValidationError("adam_eps must be positive");
  for (auto h : hidden) {
    if (h == 0) throw ValidationError("hidden layer widths must be positive");
  }
}

double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

MetricNetwork::MetricNetwork(std::vector<std::size_t> layer_dims) : dims_(std::move(layer_dims)) {
  if (dims_.size() < 2 || dims_.back() != 1) {
    throw ValidationError("network needs at least one layer and a scalar output");
  }
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    if (dims_[l] == 0) throw ValidationError("layer widths must be positive");
    offsets_.push_back(total);
    total += dims_[l] * dims_[l + 1] + dims_[l + 1];
  }
  params_.assign(total, 0.0);
}

MetricNetwork MetricNetwork::init(std::size_t input_dim, const TrainConfig& config) {
  config.validate();
  if (input_dim == 0) throw ValidationError("input_dim must be at least 1");
  std::vector<std::size_t> dims{input_dim};
  dims.insert(dims.end(), config.hidden.begin(), config.hidden.end());
  dims.push_back(1);
  MetricNetwork net(std::move(dims));
  Rng rng(config.seed);
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(net.dims_[l]));
    for (double& w : net.weights(l)) w = rng.uniform(-bound, bound);
  }
  return net;
}

std::size_t MetricNetwork::weight_offset(std::size_t layer) const { return offsets_.at(layer); }

std::size_t MetricNetwork::bias_offset(std::size_t layer) const {
  return offsets_.at(layer) + dims_[layer] * dims_[layer + 1];
}

std::span<double> MetricNetwork::weights(std::size_t layer) {
  return std::span<double>(params_).subspan(weight_offset(layer), dims_[layer] * dims_[layer + 1]);
}

std::span<const double> MetricNetwork::weights(std::size_t layer) const {
  return std::span<const double>(params_).subspan(weight_offset(layer),
                                                  dims_[layer] * dims_[layer + 1]);
}

std::span<double> MetricNetwork::biases(std::size_t layer) {
  return std::span<double>(params_).subspan(bias_offset(layer), dims_[layer + 1]);
}

std::span<const double> MetricNetwork::biases(std::size_t layer) const {
  return std::span<const double>(params_).subspan(bias_offset(layer), dims_[layer + 1]);
}

namespace {

/// Per-sample scratch space: pre-activations and activations for every layer.
struct Workspace {
  std::vector<std::vector<double>> pre;  // z_l, l = 1..L
  std::vector<std::vector<double>> act;  // a_l, l = 0..L-1 (a_0 is the input)
  std::vector<std::vector<double>> delta;

  explicit Workspace(const std::vector<std::size_t>& dims) {
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
      pre.emplace_back(dims[l + 1]);
      delta.emplace_back(dims[l + 1]);
      act.emplace_back(dims[l]);
    }
  }
};

/// Forward pass keeping intermediates; returns the output pre-activation.
double forward_pass(const MetricNetwork& net, std::span<const double> input, Workspace& ws) {
  const auto& dims = net.layer_dims();
  const std::size_t layers = net.layer_count();
  std::copy(input.begin(), input.end(), ws.act[0].begin());
  for (std::size_t l = 0; l < layers; ++l) {
    const auto w = net.weights(l);
    const auto b = net.biases(l);
    const std::size_t in = dims[l];
    const auto& a = ws.act[l];
    auto& z = ws.pre[l];
    for (std::size_t o = 0; o < dims[l + 1]; ++o) {
      double sum = b[o];
      const double* row = w.data() + o * in;
      for (std::size_t i = 0; i < in; ++i) sum += row[i] * a[i];
      z[o] = sum;
    }
    if (l + 1 < layers) {
      auto& next = ws.act[l + 1];
      for (std::size_t o = 0; o < z.size(); ++o) next[o] = z[o] > 0.0 ? z[o] : 0.0;
    }
  }
  return ws.pre[layers - 1][0];
}

void check_input(const MetricNetwork& net, std::size_t size) {
  if (size != net.input_dim()) {
    throw DimensionError("network expects input of dim " + std::to_string(net.input_dim()) +
                         ", got " + std::to_string(size));
  }
}

/// Adds the gradient of (1/scale)·Σ (f − t)² over `indices` into `grad`; returns the summed squared error.
double accumulate(const MetricNetwork& net, std::span<const TrainingPair> pairs,
                  std::span<const std::size_t> indices, double scale, std::vector<double>& grad,
                  Workspace& ws) {
  const auto& dims = net.layer_dims();
  const std::size_t layers = net.layer_count();
  double sse = 0.0;
  for (auto idx : indices) {
    const auto& pair = pairs[idx];
    check_input(net, pair.input.size());
    const double z_out = forward_pass(net, pair.input, ws);
    const double err = softplus(z_out) - pair.target;
    sse += err * err;
    ws.delta[layers - 1][0] = 2.0 * err / scale * sigmoid(z_out);
    for (std::size_t l = layers; l-- > 0;) {
      const std::size_t in = dims[l];
      const std::size_t out = dims[l + 1];
      const auto& d = ws.delta[l];
      const auto& a = ws.act[l];
      double* gw = grad.data() + (net.weights(l).data() - net.parameters().data());
      double* gb = grad.data() + (net.biases(l).data() - net.parameters().data());
      for (std::size_t o = 0; o < out; ++o) {
        if (d[o] == 0.0) continue;
        double* row = gw + o * in;
        for (std::size_t i = 0; i < in; ++i) row[i] += d[o] * a[i];
        gb[o] += d[o];
      }
      if (l == 0) break;
      const auto w = net.weights(l);
      auto& prev = ws.delta[l - 1];
      const auto& z_prev = ws.pre[l - 1];
      std::fill(prev.begin(), prev.end(), 0.0);
      for (std::size_t o = 0; o < out; ++o) {
        if (d[o] == 0.0) continue;
        const double* row = w.data() + o * in;
        for (std::size_t i = 0; i < in; ++i) prev[i] += row[i] * d[o];
      }
      for (std::size_t i = 0; i < in; ++i) {
        if (!(z_prev[i] > 0.0)) prev[i] = 0.0;
      }
    }
  }
  return sse;
}

}  // namespace

double MetricNetwork::forward(std::span<const double> input) const {
  check_input(*this, input.size());
  Workspace ws(dims_);
  return softplus(forward_pass(*this, input, ws));
}

double mean_squared_error(const MetricNetwork& net, std::span<const TrainingPair> batch) {
  if (batch.empty()) throw ValidationError("mean squared error of an empty batch");
  Workspace ws(net.layer_dims());
  double sse = 0.0;
  for (const auto& p : batch) {
    check_input(net, p.input.size());
    const double err = softplus(forward_pass(net, p.input, ws)) - p.target;
    sse += err * err;
  }
  return sse / static_cast<double>(batch.size());
}

Gradients gradients(const MetricNetwork& net, std::span<const TrainingPair> batch) {
  if (batch.empty()) throw ValidationError("gradient of an empty batch");
  Gradients g;
  g.values.assign(net.parameters().size(), 0.0);
  std::vector<std::size_t> indices(batch.size());
  std::iota(indices.begin(), indices.end(), std::size_t{0});
  Workspace ws(net.layer_dims());
  const double n = static_cast<double>(batch.size());
  g.loss = accumulate(net, batch, indices, n, g.values, ws) / n;
  return g;
}

void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> m,
                 std::span<double> v, std::uint64_t step, const TrainConfig& config) {
  if (grads.size() != params.size() || m.size() != params.size() || v.size() != params.size()) {
    throw DimensionError("Adam buffers disagree in size");
  }
  if (step == 0) throw ValidationError("Adam step count starts at 1");
  const double b1 = config.adam_beta1;
  const double b2 = config.adam_beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(step));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * grads[i];
    v[i] = b2 * v[i] + (1.0 - b2) * grads[i] * grads[i];
    const double m_hat = m[i] / correction1;
    const double v_hat = v[i] / correction2;
    params[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.adam_eps);
  }
}

void adam_step(MetricNetwork& net, const Gradients& grads, AdamState& state,
               const TrainConfig& config) {
  const std::size_t n = net.parameters().size();
  if (state.m.size() != n) state.m.assign(n, 0.0);
  if (state.v.size() != n) state.v.assign(n, 0.0);
  ++state.step;
  adam_update(net.parameters(), grads.values, state.m, state.v, state.step, config);
}

std::vector<TrainingPair> make_training_pairs(const Corpus& corpus, const Embedder& e,
                                              const SourceSet& sources,
                                              std::optional<std::string_view> exclude,
                                              TargetMode mode, const PerformanceFn& performance) {
  std::vector<const CorpusRecord*> donors;
  for (const auto& r : corpus.records()) {
    if (exclude && r.id() == *exclude) continue;
    if (transfer::is_eligible_donor(r, sources)) donors.push_back(&r);
  }
  if (donors.size() < 2) {
    throw ValidationError("training needs at least two donors with human pipelines, found " +
                          std::to_string(donors.size()));
  }
  if (mode == TargetMode::performance && !performance) {
    throw ValidationError("performance targets need a performance function");
  }
  std::vector<EmbeddingVector> reps;
  std::vector<EmbeddingVector> human;
  for (const auto* d : donors) {
    reps.push_back(transfer::build_representation(*d, e, sources).concat);
    human.push_back(e.embed_pipeline(d->find(SourceTag::H)->pipeline, {d->id(), SourceTag::H}));
  }
  std::vector<TrainingPair> pairs;
  pairs.reserve(donors.size() * (donors.size() - 1));
  for (std::size_t i = 0; i < donors.size(); ++i) {
    for (std::size_t j = 0; j < donors.size(); ++j) {
      if (i == j) continue;
      TrainingPair p;
      p.input = reps[i].values;
      p.input.insert(p.input.end(), reps[j].values.begin(), reps[j].values.end());
      p.target = mode == TargetMode::pipeline_distance ? distance(human[i], human[j])
                                                       : performance(*donors[i], *donors[j]);
      pairs.push_back(std::move(p));
    }
  }
  return pairs;
}

PerformanceFn performance_from_data(const Corpus& corpus, const Protocol& protocol,
                                    std::uint64_t seed) {
  auto cache = std::make_shared<std::map<std::string, TabularDataset, std::less<>>>();
  return [&corpus, protocol, seed, cache](const CorpusRecord& query, const CorpusRecord& donor) {
    auto it = cache->find(query.id());
    if (it == cache->end()) {
      const auto path = corpus.data_file(query);
      if (!path) throw LookupError("dataset '" + query.id() + "' has no local data");
      it = cache->emplace(query.id(),
                          load_csv(*path, query.task.target_column, query.task.task_type))
               .first;
    }
    const auto* human = donor.find(SourceTag::H);
    if (human == nullptr) throw LookupError("donor '" + donor.id() + "' has no human pipeline");
    try {
      const auto ev = engine::evaluate(human->pipeline, it->second, query.task, protocol, seed);
      return query.task.metric == Metric::accuracy ? 1.0 - ev.score : ev.score;
    } catch (const StageError&) {
      if (query.task.metric == Metric::accuracy) return 1.0;
      throw;
    }
  };
}

TrainResult train_on_pairs(std::span<const TrainingPair> pairs, const TrainConfig& config) {
  config.validate();
  if (pairs.empty()) throw ValidationError("no training pairs");
  TrainResult result;
  result.net = MetricNetwork::init(pairs.front().input.size(), config);
  auto& net = result.net;
  result.initial_loss = mean_squared_error(net, pairs);

  Rng shuffle_rng = Rng::derive(config.seed, 1);
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Workspace ws(net.layer_dims());
  Gradients g;
  AdamState adam;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t len = std::min(config.batch_size, order.size() - start);
      const auto batch = std::span<const std::size_t>(order).subspan(start, len);
      g.values.assign(net.parameters().size(), 0.0);
      g.loss = accumulate(net, pairs, batch, static_cast<double>(len), g.values, ws) /
               static_cast<double>(len);
      adam_step(net, g, adam, config);
    }
  }
  result.final_loss = mean_squared_error(net, pairs);
  pilot::detail::logger().info("trained metric network on {} pairs: loss {} -> {}", pairs.size(),
                               result.initial_loss, result.final_loss);
  return result;
}

TrainResult train(const Corpus& corpus, const Embedder& e, const SourceSet& sources,
                  std::optional<std::string_view> exclude, const TrainConfig& config,
                  const PerformanceFn& performance) {
  config.validate();
  const auto pairs =
      make_training_pairs(corpus, e, sources, exclude, config.target_mode, performance);
  return train_on_pairs(pairs, config);
}

transfer::TransferRecommendation recommend_learned(const CorpusRecord& query,
                                                   const Corpus& corpus,
                                                   const MetricNetwork& net, const Embedder& e,
                                                   const SourceSet& sources) {
  const auto start = std::chrono::steady_clock::now();
  const auto q = transfer::build_representation(query, e, sources).concat;
  if (net.input_dim() != 2 * q.dim()) {
    throw DimensionError("network input dim " + std::to_string(net.input_dim()) +
                         " does not match a representation pair of dim " +
                         std::to_string(2 * q.dim()));
  }
  const CorpusRecord* best = nullptr;
  double best_score = std::numeric_limits<double>::infinity();
  std::vector<double> input(net.input_dim());
  std::copy(q.values.begin(), q.values.end(), input.begin());
  for (const auto& r : corpus.records()) {
    if (r.id() == query.id() || !transfer::is_eligible_donor(r, sources)) continue;
    const auto rep = transfer::build_representation(r, e, sources).concat;
    std::copy(rep.values.begin(), rep.values.end(), input.begin() + static_cast<std::ptrdiff_t>(q.dim()));
    const double s = net.forward(input);
    if (best == nullptr || s < best_score || (s == best_score && r.id() < best->id())) {
      best = &r;
      best_score = s;
    }
  }
  if (best == nullptr) throw LookupError("corpus has no eligible donor for learned transfer");
  transfer::TransferRecommendation rec{query.id(), best->id(), best->find(SourceTag::H)->pipeline,
                                       best_score, 0};
  rec.elapsed_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  return rec;
}

// Checkpoints ---------------------------------------------------------------

namespace {

constexpr std::string_view kCheckpointFormat = "pipeline-pilot-metricnet";

}  // namespace

std::string checkpoint_to_json(const Checkpoint& c) {
  using detail::ordered_json;
  ordered_json j = ordered_json::object();
  j["format"] = kCheckpointFormat;
  j["version"] = 1;
  j["seed"] = c.config.seed;
  j["layer_dims"] = c.net.layer_dims();
  ordered_json layers = ordered_json::array();
  for (std::size_t l = 0; l < c.net.layer_count(); ++l) {
    ordered_json layer = ordered_json::object();
    const auto w = c.net.weights(l);
    const auto b = c.net.biases(l);
    layer["weights"] = std::vector<double>(w.begin(), w.end());
    layer["biases"] = std::vector<double>(b.begin(), b.end());
    layers.push_back(std::move(layer));
  }
  j["layers"] = std::move(layers);
  ordered_json cfg = ordered_json::object();
  cfg["batch_size"] = c.config.batch_size;
  cfg["epochs"] = c.config.epochs;
  cfg["learning_rate"] = c.config.learning_rate;
  cfg["adam_beta1"] = c.config.adam_beta1;
  cfg["adam_beta2"] = c.config.adam_beta2;
  cfg["adam_eps"] = c.config.adam_eps;
  cfg["seed"] = c.config.seed;
  cfg["hidden"] = c.config.hidden;
  cfg["target_mode"] = std::string(to_string(c.config.target_mode));
  j["config"] = std::move(cfg);
  j["sources"] = c.sources.to_string();
  j["embedder"] = c.embedder;
  j["embedding_dim"] = c.embedding_dim;
  return detail::dump(j);
}

Checkpoint checkpoint_from_json(std::string_view text) {
  const auto j = detail::parse_json(text);
  if (!j.is_object() || j.value("format", std::string()) != kCheckpointFormat) {
    throw ValidationError("not a metric network checkpoint");
  }
  Checkpoint c;
  const auto& cfg = detail::required<detail::json>(j, "config", "checkpoint");
  c.config.batch_size = detail::required<std::size_t>(cfg, "batch_size", "config");
  c.config.epochs = detail::required<std::size_t>(cfg, "epochs", "config");
  c.config.learning_rate = detail::required<double>(cfg, "learning_rate", "config");
  c.config.adam_beta1 = detail::required<double>(cfg, "adam_beta1", "config");
  c.config.adam_beta2 = detail::required<double>(cfg, "adam_beta2", "config");
  c.config.adam_eps = detail::required<double>(cfg, "adam_eps", "config");
  c.config.seed = detail::required<std::uint64_t>(cfg, "seed", "config");
  c.config.hidden = detail::required<std::vector<std::size_t>>(cfg, "hidden", "config");
  c.config.target_mode = parse_target_mode(detail::required<std::string>(cfg, "target_mode", "config"));
  c.config.validate();

  c.net = MetricNetwork(detail::required<std::vector<std::size_t>>(j, "layer_dims", "checkpoint"));
  const auto& layers = detail::required<detail::json>(j, "layers", "checkpoint");
  if (!layers.is_array() || layers.size() != c.net.layer_count()) {
    throw ValidationError("checkpoint layer count does not match layer_dims");
  }
  for (std::size_t l = 0; l < c.net.layer_count(); ++l) {
    const auto w = detail::required<std::vector<double>>(layers[l], "weights", "layer");
    const auto b = detail::required<std::vector<double>>(layers[l], "biases", "layer");
    auto nw = c.net.weights(l);
    auto nb = c.net.biases(l);
    if (w.size() != nw.size() || b.size() != nb.size()) {
      throw DimensionError("checkpoint layer " + std::to_string(l) + " has the wrong size");
    }
    std::copy(w.begin(), w.end(), nw.begin());
    std::copy(b.begin(), b.end(), nb.begin());
  }
  c.sources = SourceSet::parse(detail::required<std::string>(j, "sources", "checkpoint"));
  c.embedder = detail::required<std::string>(j, "embedder", "checkpoint");
  c.embedding_dim = detail::required<std::size_t>(j, "embedding_dim", "checkpoint");
  return c;
}

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << checkpoint_to_json(c) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return checkpoint_from_json(buf.str());
}

}  // namespace pilot::metricnet
