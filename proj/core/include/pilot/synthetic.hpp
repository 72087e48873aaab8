#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "pilot/corpus.hpp"
#include "pilot/tabular.hpp"

// Generators for reference corpora and datasets with known structure.
namespace pilot::synthetic {

/// Two Gaussian classes ("neg", "pos") in the plane, with every point at
/// least `margin` from the separating line x + y = 0.
TabularDataset separable_blobs(std::size_t rows, double margin, std::uint64_t seed);

/// Random numeric and categorical features; rows with equal features always
/// share a label.
TabularDataset label_consistent(std::size_t rows, std::size_t numeric_cols,
                                std::size_t categorical_cols, std::size_t classes,
                                std::uint64_t seed);

struct ClusteredOptions {
  std::size_t clusters = 3;  // at most 3 distinct generators; more repeat them
  std::size_t per_cluster = 10;
  std::size_t rows = 200;
  std::uint64_t seed = 0;
};

/// Datasets in families that each favour their own human pipeline, described
/// with family-specific vocabulary.
struct ClusteredCorpus {
  Corpus corpus;
  std::map<std::string, TabularDataset> data;
  std::map<std::string, std::size_t> cluster;
};

ClusteredCorpus clustered_corpus(const ClusteredOptions& options);

/// Writes corpus.jsonl plus one CSV per dataset under `dir/data/`. Returns the corpus path.
std::filesystem::path write_clustered(const ClusteredCorpus& c, const std::filesystem::path& dir);

/// Metadata-only donors with human pipelines drawn from a few templates.
Corpus random_corpus(std::size_t records, std::uint64_t seed);

}  // namespace pilot::synthetic
