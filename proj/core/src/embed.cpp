#include "pilot/embed.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <fstream>
#include <sstream>

#include "json_util.hpp"
#include "pilot/error.hpp"

namespace pilot {

bool EmbeddingVector::is_zero() const {
  for (double v : values) {
    if (v != 0.0) return false;
  }
  return true;
}

double l2_norm(const EmbeddingVector& v) {
  double ss = 0.0;
  for (double x : v.values) ss += x * x;
  return std::sqrt(ss);
}

double distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionError("distance between vectors of dim " + std::to_string(a.size()) + " and " +
                         std::to_string(b.size()));
  }
  double ss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    ss += d * d;
  }
  return std::sqrt(ss);
}

double distance(const EmbeddingVector& a, const EmbeddingVector& b) {
  return distance(std::span<const double>(a.values), std::span<const double>(b.values));
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) throw DimensionError("cosine of vectors with different dims");
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  double dot = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) dot += a.values[i] * b.values[i];
  return dot / (na * nb);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (unsigned char c : text) {
    if (c >= 0x80 || std::isalnum(c)) {
      cur += static_cast<char>(c < 0x80 ? std::tolower(c) : c);
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

std::string metadata_key(std::string_view dataset_id) { return "meta:" + std::string(dataset_id); }

std::string pipeline_key(std::string_view dataset_id, SourceTag source) {
  return "pipe:" + std::string(dataset_id) + ":" + std::string(1, to_char(source));
}

namespace {

void normalize(std::vector<double>& v) {
  double ss = 0.0;
  for (double x : v) ss += x * x;
  if (ss == 0.0) return;
  const double inv = 1.0 / std::sqrt(ss);
  for (double& x : v) x *= inv;
}

}  // namespace

HashedNGramEmbedder::HashedNGramEmbedder(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw ValidationError("embedding dim must be positive");
}

EmbeddingVector HashedNGramEmbedder::embed_text(std::string_view text) const {
  const auto tokens = tokenize(text);
  std::vector<double> signed_counts(dim_, 0.0);
  std::vector<double> counts(dim_, 0.0);
  if (tokens.empty()) return EmbeddingVector(std::move(signed_counts));
  auto add = [&](const std::string& feature) {
    const std::uint64_t h = fnv1a64(feature);
    const std::size_t bucket = h % dim_;
    signed_counts[bucket] += (h >> 63) != 0 ? -1.0 : 1.0;
    counts[bucket] += 1.0;
  };
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    add("w:" + tokens[i]);
    if (i + 1 < tokens.size()) add("b:" + tokens[i] + " " + tokens[i + 1]);
    const std::string padded = "^" + tokens[i] + "$";
    for (std::size_t c = 0; c + 3 <= padded.size(); ++c) add("c:" + padded.substr(c, 3));
  }
  // Signed counts can cancel exactly; fall back to plain counts so nonempty
  // text always has unit norm.
  auto& v = std::all_of(signed_counts.begin(), signed_counts.end(), [](double x) { return x == 0.0; })
                ? counts
                : signed_counts;
  normalize(v);
  return EmbeddingVector(std::move(v));
}

EmbeddingVector HashedNGramEmbedder::embed_metadata(const DatasetMetadata& m) const {
  return embed_text(metadata_document(m));
}

EmbeddingVector HashedNGramEmbedder::embed_pipeline(const Pipeline& p, const PipelineKey&) const {
  const auto texts = canonical_text(p);
  return embed_stage_texts(texts);
}

EmbeddingVector HashedNGramEmbedder::embed_stage_texts(std::span<const std::string> texts) const {
  if (texts.empty()) return EmbeddingVector::zeros(dim_);
  std::vector<EmbeddingVector> vs;
  vs.reserve(texts.size());
  for (const auto& t : texts) vs.push_back(embed_text(t));
  // The mean of identical vectors is that vector; return it exactly rather
  // than a rounded recomputation.
  if (std::all_of(vs.begin(), vs.end(), [&](const auto& v) { return v == vs.front(); })) {
    return vs.front();
  }
  std::vector<double> mean(dim_, 0.0);
  for (const auto& v : vs) {
    for (std::size_t i = 0; i < dim_; ++i) mean[i] += v.values[i];
  }
  for (double& x : mean) x /= static_cast<double>(vs.size());
  normalize(mean);
  return EmbeddingVector(std::move(mean));
}

void ExternalVectorStore::insert(std::string key, EmbeddingVector v) {
  if (dim_ == 0) dim_ = v.dim();
  if (v.dim() != dim_) {
    throw DimensionError("vector '" + key + "' has dim " + std::to_string(v.dim()) +
                         ", store dim is " + std::to_string(dim_));
  }
  auto [it, inserted] = vectors_.emplace(std::move(key), std::move(v));
  if (!inserted) throw ConflictError("duplicate vector key '" + it->first + "'");
}

const EmbeddingVector& ExternalVectorStore::lookup(std::string_view key) const {
  auto it = vectors_.find(key);
  if (it == vectors_.end()) throw LookupError("no vector for key '" + std::string(key) + "'");
  return it->second;
}

EmbeddingVector ExternalVectorStore::embed_metadata(const DatasetMetadata& m) const {
  return lookup(metadata_key(m.id));
}

EmbeddingVector ExternalVectorStore::embed_pipeline(const Pipeline&, const PipelineKey& key) const {
  return lookup(pipeline_key(key.dataset_id, key.source));
}

EmbeddingVector embed_metadata(const DatasetMetadata& m, const Embedder& e) {
  return e.embed_metadata(m);
}

EmbeddingVector embed_pipeline(const Pipeline& p, const Embedder& e, const PipelineKey& key) {
  return e.embed_pipeline(p, key);
}

ExternalVectorStore parse_vectors(std::string_view text, std::optional<std::size_t> declared_dim) {
  ExternalVectorStore store(declared_dim.value_or(0));
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const auto j = detail::parse_json(line, line_no);
    if (!j.is_object() || !j.contains("key") || !j["key"].is_string() || !j.contains("dim") ||
        !j["dim"].is_number_unsigned() || !j.contains("values") || !j["values"].is_array()) {
      throw ParseError("vector entry needs string 'key', integer 'dim' and array 'values'", line_no);
    }
    const auto key = j["key"].get<std::string>();
    const auto dim = j["dim"].get<std::size_t>();
    std::vector<double> values;
    values.reserve(j["values"].size());
    for (const auto& x : j["values"]) {
      if (!x.is_number()) throw ParseError("vector '" + key + "' has a non-numeric value", line_no);
      values.push_back(x.get<double>());
    }
    if (values.size() != dim) {
      throw ParseError("vector '" + key + "' declares dim " + std::to_string(dim) + " but has " +
                           std::to_string(values.size()) + " values",
                       line_no);
    }
    if (store.dim() != 0 && dim != store.dim()) {
      throw DimensionError("line " + std::to_string(line_no) + ": vector '" + key + "' has dim " +
                           std::to_string(dim) + ", expected " + std::to_string(store.dim()));
    }
    store.insert(key, EmbeddingVector(std::move(values)));
  }
  return store;
}

ExternalVectorStore load_vectors(const std::filesystem::path& path,
                                 std::optional<std::size_t> declared_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_vectors(buf.str(), declared_dim);
}

std::string vectors_to_jsonl(const ExternalVectorStore& store) {
  std::string out;
  for (const auto& [key, v] : store.entries()) {
    detail::ordered_json j = detail::ordered_json::object();
    j["key"] = key;
    j["dim"] = v.dim();
    j["values"] = v.values;
    out += detail::dump(j);
    out += '\n';
  }
  return out;
}

void save_vectors(const ExternalVectorStore& store, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << vectors_to_jsonl(store);
}

}  // namespace pilot
