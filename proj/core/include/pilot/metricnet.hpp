#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pilot/corpus.hpp"
#include "pilot/embed.hpp"
#include "pilot/transfer.hpp"

namespace pilot::metricnet {

/// `pipeline_distance`: targets are L2 distances between the two datasets'
/// human pipeline embeddings. `performance`: targets are the loss (1 − accuracy,
/// or rmse) of the second dataset's human pipeline evaluated on the first.
enum class TargetMode { pipeline_distance, performance };

std::string_view to_string(TargetMode m);
TargetMode parse_target_mode(std::string_view s);

struct TrainConfig {
  std::size_t batch_size = 16;
  std::size_t epochs = 1200;
  double learning_rate = 0.001;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  std::vector<std::size_t> hidden = {256, 128, 64};
  TargetMode target_mode = TargetMode::pipeline_distance;

  /// Throws ValidationError for non-positive sizes, rates or betas outside [0,1).
  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

/// Fully connected net: rectifier hidden layers, softplus scalar output.
/// Parameters live in one flat buffer, layer by layer, weights (row-major,
/// out × in) before biases.
class MetricNetwork {
 public:
  MetricNetwork() = default;
  /// Zero-initialized network with the given layer widths; the last must be 1.
  explicit MetricNetwork(std::vector<std::size_t> layer_dims);

  /// Weights uniform in ±1/√fan_in from a seeded stream, biases zero.
  static MetricNetwork init(std::size_t input_dim, const TrainConfig& config);

  const std::vector<std::size_t>& layer_dims() const noexcept { return dims_; }
  std::size_t input_dim() const { return dims_.empty() ? 0 : dims_.front(); }
  std::size_t layer_count() const { return dims_.empty() ? 0 : dims_.size() - 1; }

  std::span<double> parameters() noexcept { return params_; }
  std::span<const double> parameters() const noexcept { return params_; }
  std::span<double> weights(std::size_t layer);
  std::span<const double> weights(std::size_t layer) const;
  std::span<double> biases(std::size_t layer);
  std::span<const double> biases(std::size_t layer) const;

  /// Non-negative predicted distance. Throws DimensionError on input size mismatch.
  double forward(std::span<const double> input) const;

  bool operator==(const MetricNetwork&) const = default;

 private:
  std::size_t weight_offset(std::size_t layer) const;
  std::size_t bias_offset(std::size_t layer) const;

  std::vector<std::size_t> dims_;
  std::vector<double> params_;
  std::vector<std::size_t> offsets_;  // start of each layer's block
};

double softplus(double z);

struct TrainingPair {
  std::vector<double> input;
  double target = 0.0;
};

/// Mean over the batch of (forward(x) − target)².
double mean_squared_error(const MetricNetwork& net, std::span<const TrainingPair> batch);

struct Gradients {
  std::vector<double> values;  // same layout as MetricNetwork::parameters()
  double loss = 0.0;
};

/// Backpropagated gradient of mean_squared_error. Throws ValidationError on an empty batch.
Gradients gradients(const MetricNetwork& net, std::span<const TrainingPair> batch);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;  // number of updates applied
};

/// One Adam update with bias correction on a raw parameter buffer. `step`
/// counts from 1.
void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> m,
                 std::span<double> v, std::uint64_t step, const TrainConfig& config);

/// Advances `state.step` and updates the network in place.
void adam_step(MetricNetwork& net, const Gradients& grads, AdamState& state,
               const TrainConfig& config);

/// Loss of the donor's human pipeline evaluated on the query dataset; lower is better.
using PerformanceFn = std::function<double(const CorpusRecord& query, const CorpusRecord& donor)>;

/// Evaluates donor pipelines on the query's local data (loaded once per
/// record). The loss is 1 − accuracy, or rmse; a failed classification
/// evaluation costs 1. Throws LookupError for records without data, and
/// rethrows failures on regression tasks, whose loss has no upper bound.
PerformanceFn performance_from_data(const Corpus& corpus, const Protocol& protocol,
                                    std::uint64_t seed);

/// Every ordered pair (i, j), i ≠ j, over donors other than `exclude`.
/// Input is X_i followed by X_j. Throws ValidationError with fewer than two donors.
std::vector<TrainingPair> make_training_pairs(const Corpus& corpus, const Embedder& e,
                                              const SourceSet& sources,
                                              std::optional<std::string_view> exclude,
                                              TargetMode mode = TargetMode::pipeline_distance,
                                              const PerformanceFn& performance = {});

struct TrainResult {
  MetricNetwork net;
  double initial_loss = 0.0;
  double final_loss = 0.0;
};

/// Minibatch Adam on MSE with a seeded shuffle each epoch.
TrainResult train_on_pairs(std::span<const TrainingPair> pairs, const TrainConfig& config);

TrainResult train(const Corpus& corpus, const Embedder& e, const SourceSet& sources,
                  std::optional<std::string_view> exclude, const TrainConfig& config,
                  const PerformanceFn& performance = {});

/// Donor minimizing forward(X_query ++ X_donor); ties go to the smallest id.
transfer::TransferRecommendation recommend_learned(const CorpusRecord& query,
                                                   const Corpus& corpus,
                                                   const MetricNetwork& net, const Embedder& e,
                                                   const SourceSet& sources);

struct Checkpoint {
  MetricNetwork net;
  TrainConfig config;
  SourceSet sources;
  std::string embedder;
  std::size_t embedding_dim = 0;

  bool operator==(const Checkpoint&) const = default;
};

std::string checkpoint_to_json(const Checkpoint& c);
Checkpoint checkpoint_from_json(std::string_view text);
void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace pilot::metricnet
