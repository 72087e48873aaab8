#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace pilot {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (JSON, JSONL, CSV). `line` is 1-based when known.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what, std::optional<std::size_t> line = std::nullopt)
      : Error(line ? "line " + std::to_string(*line) + ": " + what : what), line_(line) {}
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  std::optional<std::size_t> line_;
};

/// Two entries claim the same identity (duplicate corpus id, key collision).
class ConflictError : public Error {
 public:
  using Error::Error;
};

/// A value violates a documented invariant. Pipeline errors carry the stage index.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what,
                           std::optional<std::size_t> stage = std::nullopt)
      : Error(stage ? "stage " + std::to_string(*stage) + ": " + what : what), stage_(stage) {}
  std::optional<std::size_t> stage_index() const noexcept { return stage_; }

 private:
  std::optional<std::size_t> stage_;
};

/// Vector or layer dimensions disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A required entry is absent: unknown id, store miss, no eligible donor.
class LookupError : public Error {
 public:
  using Error::Error;
};

/// Prediction-time columns do not match the columns seen at fit time.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// A pipeline stage failed while fitting or applying.
class StageError : public Error {
 public:
  StageError(std::size_t stage, std::string primitive, std::string cause,
             std::optional<std::size_t> fold = std::nullopt)
      : Error(format(stage, primitive, cause, fold)),
        stage_(stage),
        primitive_(std::move(primitive)),
        cause_(std::move(cause)),
        fold_(fold) {}

  std::size_t stage_index() const noexcept { return stage_; }
  const std::string& primitive() const noexcept { return primitive_; }
  const std::string& cause() const noexcept { return cause_; }
  std::optional<std::size_t> fold() const noexcept { return fold_; }

  StageError with_fold(std::size_t fold) const { return {stage_, primitive_, cause_, fold}; }

 private:
  static std::string format(std::size_t stage, const std::string& primitive,
                            const std::string& cause, std::optional<std::size_t> fold) {
    std::string s = "stage " + std::to_string(stage) + " (" + primitive + ")";
    if (fold) s += " in fold " + std::to_string(*fold);
    return s + ": " + cause;
  }

  std::size_t stage_;
  std::string primitive_;
  std::string cause_;
  std::optional<std::size_t> fold_;
};

/// A file could not be accessed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace pilot
