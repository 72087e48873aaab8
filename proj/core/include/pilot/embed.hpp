#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pilot/corpus.hpp"
#include "pilot/pipeline.hpp"

namespace pilot {

inline constexpr std::size_t kDefaultEmbeddingDim = 512;

struct EmbeddingVector {
  std::vector<double> values;

  EmbeddingVector() = default;
  explicit EmbeddingVector(std::vector<double> v) : values(std::move(v)) {}
  static EmbeddingVector zeros(std::size_t dim) { return EmbeddingVector(std::vector<double>(dim)); }

  std::size_t dim() const noexcept { return values.size(); }
  bool is_zero() const;
  bool operator==(const EmbeddingVector&) const = default;
};

double l2_norm(const EmbeddingVector& v);
/// Euclidean distance. Throws DimensionError on mismatch.
double distance(const EmbeddingVector& a, const EmbeddingVector& b);
double distance(std::span<const double> a, std::span<const double> b);
/// Cosine similarity; 0 when either vector is zero.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

/// FNV-1a, 64-bit: offset basis 0xcbf29ce484222325, prime 0x100000001b3.
std::uint64_t fnv1a64(std::string_view bytes);

/// Lowercased ASCII alphanumeric runs; bytes >= 0x80 count as word characters
/// so UTF-8 words stay whole.
std::vector<std::string> tokenize(std::string_view text);

/// Lookup keys shared with the vector exporter.
std::string metadata_key(std::string_view dataset_id);
std::string pipeline_key(std::string_view dataset_id, SourceTag source);

/// Identifies a corpus pipeline for embedders that look vectors up by key.
struct PipelineKey {
  std::string dataset_id;
  SourceTag source = SourceTag::H;
};

/// Maps metadata and pipelines to fixed-dimension vectors. Deterministic.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::string name() const = 0;
  virtual std::size_t dim() const = 0;
  virtual EmbeddingVector embed_metadata(const DatasetMetadata& m) const = 0;
  virtual EmbeddingVector embed_pipeline(const Pipeline& p, const PipelineKey& key) const = 0;
};

/// Signed feature hashing of word unigrams, word bigrams and in-word
/// character trigrams, L2-normalized.
///
/// Features are hashed as "w:<tok>", "b:<tok1> <tok2>" and "c:<tri>", where
/// trigrams run over "^<tok>$". Bucket is h % dim, sign is + when bit 63 of h
/// is clear. Text with no tokens maps to the zero vector.
class HashedNGramEmbedder final : public Embedder {
 public:
  explicit HashedNGramEmbedder(std::size_t dim = kDefaultEmbeddingDim);

  std::string name() const override { return "builtin"; }
  std::size_t dim() const override { return dim_; }

  EmbeddingVector embed_text(std::string_view text) const;
  EmbeddingVector embed_metadata(const DatasetMetadata& m) const override;
  /// embed_stage_texts over canonical_text(p).
  EmbeddingVector embed_pipeline(const Pipeline& p, const PipelineKey& key) const override;
  /// Mean of the text vectors, renormalized to unit length. When every text
  /// embeds to the same vector, that vector is returned unchanged.
  EmbeddingVector embed_stage_texts(std::span<const std::string> texts) const;

 private:
  std::size_t dim_;
};

/// Precomputed vectors keyed by metadata_key / pipeline_key. Absent keys are
/// errors, never fallbacks.
class ExternalVectorStore final : public Embedder {
 public:
  explicit ExternalVectorStore(std::size_t dim = 0) : dim_(dim) {}

  std::string name() const override { return "external"; }
  std::size_t dim() const override { return dim_; }
  std::size_t size() const noexcept { return vectors_.size(); }
  bool contains(std::string_view key) const { return vectors_.find(key) != vectors_.end(); }

  /// Throws DimensionError if the vector does not match the store's dim
  /// (a dim-0 store adopts the first vector's dim), ConflictError on duplicates.
  void insert(std::string key, EmbeddingVector v);
  /// Throws LookupError for absent keys.
  const EmbeddingVector& lookup(std::string_view key) const;
  const std::map<std::string, EmbeddingVector, std::less<>>& entries() const { return vectors_; }

  EmbeddingVector embed_metadata(const DatasetMetadata& m) const override;
  EmbeddingVector embed_pipeline(const Pipeline& p, const PipelineKey& key) const override;

 private:
  std::size_t dim_;
  std::map<std::string, EmbeddingVector, std::less<>> vectors_;
};

EmbeddingVector embed_metadata(const DatasetMetadata& m, const Embedder& e);
EmbeddingVector embed_pipeline(const Pipeline& p, const Embedder& e, const PipelineKey& key = {});

/// JSONL lines `{"key": .., "dim": .., "values": [..]}`. `declared_dim`
/// fixes the store dim (required for an empty file to have one).
ExternalVectorStore parse_vectors(std::string_view text,
                                  std::optional<std::size_t> declared_dim = std::nullopt);
ExternalVectorStore load_vectors(const std::filesystem::path& path,
                                 std::optional<std::size_t> declared_dim = std::nullopt);
std::string vectors_to_jsonl(const ExternalVectorStore& store);
void save_vectors(const ExternalVectorStore& store, const std::filesystem::path& path);

}  // namespace pilot
