#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace pilot {

/// Stage kinds in the only order a pipeline may list them.
enum class StageKind { preprocessor, feature_extractor, feature_selector, estimator, postprocessor };

inline constexpr StageKind kAllStageKinds[] = {
    StageKind::preprocessor, StageKind::feature_extractor, StageKind::feature_selector,
    StageKind::estimator, StageKind::postprocessor};

std::string_view to_string(StageKind k);
std::optional<StageKind> parse_stage_kind(std::string_view s);

using ParamValue = std::variant<double, std::int64_t, std::string, bool>;
using ParamMap = std::map<std::string, ParamValue, std::less<>>;

/// Shortest round-trip decimal; integral values keep a trailing ".0".
std::string format_real(double v);
std::string format_param(const ParamValue& v);

enum class ParamType { real, integer, string, boolean };

struct ParamSpec {
  std::string name;
  ParamType type = ParamType::real;
  double min = 0.0;  // inclusive bounds, numeric types only
  double max = 0.0;
  ParamValue default_value;
  std::vector<std::string> choices;  // string type only; empty means any
};

struct PrimitiveDescriptor {
  std::string name;
  StageKind kind = StageKind::preprocessor;
  std::string signature;  // call string with defaults, e.g. "knn_classifier(k=5)"
  std::string doc_header;
  std::vector<ParamSpec> params;  // in signature order

  const ParamSpec* find_param(std::string_view param) const;
  ParamMap defaults() const;
  /// Throws ValidationError on unknown keys, wrong types or out-of-range values.
  void check(const ParamMap& params, std::optional<std::size_t> stage = std::nullopt) const;
  /// Signature with the given (complete) parameter values substituted.
  std::string call_string(const ParamMap& params) const;
};

/// The built-in primitive set, in stable order.
std::span<const PrimitiveDescriptor> registry();
const PrimitiveDescriptor* find_primitive(std::string_view name);

struct StageSpec {
  StageKind kind = StageKind::estimator;
  std::string primitive;
  ParamMap params;  // always complete once validated: defaults are materialized

  bool operator==(const StageSpec&) const = default;
};

/// Ordered chain of stages holding exactly one estimator.
class Pipeline {
 public:
  Pipeline() = default;

  /// Validates and fills defaults; throws ValidationError naming the stage index.
  explicit Pipeline(std::vector<StageSpec> stages);

  const std::vector<StageSpec>& stages() const noexcept { return stages_; }
  std::size_t size() const noexcept { return stages_.size(); }
  bool empty() const noexcept { return stages_.empty(); }
  const StageSpec& estimator() const;

  bool operator==(const Pipeline&) const = default;

 private:
  std::vector<StageSpec> stages_;
};

/// Checks every invariant of a stage list; returns it with defaults materialized.
std::vector<StageSpec> validate_stages(std::vector<StageSpec> stages);

/// `{"stages":[{"kind":..,"primitive":..,"params":{..}}, ..]}`
Pipeline parse_pipeline(std::string_view json_text);
/// Canonical compact JSON: stage keys in schema order, params sorted, explicit defaults.
std::string serialize_pipeline(const Pipeline& p);

/// One line per stage, in stage order: the call string, a spaced U+2014 dash, then the doc header.
std::vector<std::string> canonical_text(const Pipeline& p);

}  // namespace pilot
