#include "pilot/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <system_error>

#include "json_util.hpp"
#include "pilot/error.hpp"

namespace pilot {

std::string_view to_string(StageKind k) {
  switch (k) {
    case StageKind::preprocessor: return "preprocessor";
    case StageKind::feature_extractor: return "feature_extractor";
    case StageKind::feature_selector: return "feature_selector";
    case StageKind::estimator: return "estimator";
    case StageKind::postprocessor: return "postprocessor";
  }
  return "unknown";
}

std::optional<StageKind> parse_stage_kind(std::string_view s) {
  for (auto k : kAllStageKinds) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

std::string format_real(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, ptr);
  if (std::isfinite(v) && s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

std::string format_param(const ParamValue& v) {
  struct Visitor {
    std::string operator()(double d) const { return format_real(d); }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(const std::string& s) const { return "'" + s + "'"; }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
  };
  return std::visit(Visitor{}, v);
}

namespace {

std::string_view type_name(ParamType t) {
  switch (t) {
    case ParamType::real: return "real";
    case ParamType::integer: return "integer";
    case ParamType::string: return "string";
    case ParamType::boolean: return "boolean";
  }
  return "unknown";
}

/// Converts compatible representations (an integer for a real parameter, an
/// integral real for an integer one) and range-checks the result.
ParamValue coerce(const PrimitiveDescriptor& d, const ParamSpec& spec, const ParamValue& value,
                  std::optional<std::size_t> stage) {
  auto fail = [&](const std::string& why) -> ValidationError {
    return ValidationError(d.name + " parameter '" + spec.name + "' " + why, stage);
  };
  auto check_range = [&](double x) {
    if (!(x >= spec.min && x <= spec.max)) {
      throw fail("= " + format_real(x) + " is outside [" + format_real(spec.min) + ", " +
                 format_real(spec.max) + "]");
    }
  };
  switch (spec.type) {
    case ParamType::real: {
      double x;
      if (auto* r = std::get_if<double>(&value)) {
        x = *r;
      } else if (auto* i = std::get_if<std::int64_t>(&value)) {
        x = static_cast<double>(*i);
      } else {
        throw fail("must be a real number");
      }
      check_range(x);
      return x;
    }
    case ParamType::integer: {
      std::int64_t x;
      if (auto* i = std::get_if<std::int64_t>(&value)) {
        x = *i;
      } else if (auto* r = std::get_if<double>(&value);
                 r != nullptr && std::isfinite(*r) && std::trunc(*r) == *r &&
                 std::abs(*r) < 9.0e15) {
        x = static_cast<std::int64_t>(*r);
      } else {
        throw fail("must be an integer");
      }
      check_range(static_cast<double>(x));
      return x;
    }
    case ParamType::string: {
      auto* s = std::get_if<std::string>(&value);
      if (s == nullptr) throw fail("must be a string");
      if (!spec.choices.empty() &&
          std::find(spec.choices.begin(), spec.choices.end(), *s) == spec.choices.end()) {
        throw fail("has unsupported value '" + *s + "'");
      }
      return *s;
    }
    case ParamType::boolean:
      if (!std::holds_alternative<bool>(value)) throw fail("must be a boolean");
      return value;
  }
  throw fail("has unsupported type " + std::string(type_name(spec.type)));
}

ParamMap normalize_params(const PrimitiveDescriptor& d, const ParamMap& given,
                          std::optional<std::size_t> stage) {
  for (const auto& [name, value] : given) {
    if (d.find_param(name) == nullptr) {
      throw ValidationError(d.name + " has no parameter '" + name + "'", stage);
    }
  }
  ParamMap out;
  for (const auto& spec : d.params) {
    auto it = given.find(spec.name);
    out.emplace(spec.name,
                coerce(d, spec, it == given.end() ? spec.default_value : it->second, stage));
  }
  return out;
}

}  // namespace

const ParamSpec* PrimitiveDescriptor::find_param(std::string_view param) const {
  for (const auto& p : params) {
    if (p.name == param) return &p;
  }
  return nullptr;
}

ParamMap PrimitiveDescriptor::defaults() const {
  ParamMap m;
  for (const auto& p : params) m.emplace(p.name, p.default_value);
  return m;
}

void PrimitiveDescriptor::check(const ParamMap& given, std::optional<std::size_t> stage) const {
  normalize_params(*this, given, stage);
}

std::string PrimitiveDescriptor::call_string(const ParamMap& values) const {
  std::string s = name + "(";
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i > 0) s += ", ";
    auto it = values.find(params[i].name);
    s += params[i].name + "=" +
         format_param(it == values.end() ? params[i].default_value : it->second);
  }
  return s + ")";
}

std::vector<StageSpec> validate_stages(std::vector<StageSpec> stages) {
  if (stages.empty()) throw ValidationError("pipeline has no stages");
  std::optional<std::size_t> estimator_at;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    auto& stage = stages[i];
    const auto* d = find_primitive(stage.primitive);
    if (d == nullptr) throw ValidationError("unknown primitive '" + stage.primitive + "'", i);
    if (d->kind != stage.kind) {
      throw ValidationError(stage.primitive + " is a " + std::string(to_string(d->kind)) +
                                ", not a " + std::string(to_string(stage.kind)),
                            i);
    }
    if (i > 0 && stage.kind < stages[i - 1].kind) {
      throw ValidationError("ordering violation: " + std::string(to_string(stage.kind)) +
                                " after " + std::string(to_string(stages[i - 1].kind)),
                            i);
    }
    if (stage.kind == StageKind::estimator) {
      if (estimator_at) throw ValidationError("pipeline has more than one estimator", i);
      estimator_at = i;
    }
    stage.params = normalize_params(*d, stage.params, i);
  }
  if (!estimator_at) throw ValidationError("pipeline has no estimator");
  return stages;
}

Pipeline::Pipeline(std::vector<StageSpec> stages) : stages_(validate_stages(std::move(stages))) {}

const StageSpec& Pipeline::estimator() const {
  for (const auto& s : stages_) {
    if (s.kind == StageKind::estimator) return s;
  }
  throw ValidationError("pipeline has no estimator");
}

std::vector<std::string> canonical_text(const Pipeline& p) {
  std::vector<std::string> out;
  out.reserve(p.size());
  for (const auto& s : p.stages()) {
    const auto* d = find_primitive(s.primitive);
    out.push_back(d->call_string(s.params) + " — " + d->doc_header);
  }
  return out;
}

namespace detail {

ordered_json pipeline_to_json(const Pipeline& p) {
  ordered_json stages = ordered_json::array();
  for (const auto& s : p.stages()) {
    ordered_json params = ordered_json::object();
    for (const auto& [name, value] : s.params) {  // ParamMap iterates sorted
      std::visit([&](const auto& v) { params[name] = v; }, value);
    }
    ordered_json stage = ordered_json::object();
    stage["kind"] = std::string(to_string(s.kind));
    stage["primitive"] = s.primitive;
    stage["params"] = std::move(params);
    stages.push_back(std::move(stage));
  }
  ordered_json doc = ordered_json::object();
  doc["stages"] = std::move(stages);
  return doc;
}

Pipeline pipeline_from_json(const json& doc) {
  if (!doc.is_object()) throw ValidationError("pipeline document must be a JSON object");
  auto it = doc.find("stages");
  if (it == doc.end() || !it->is_array()) {
    throw ValidationError("pipeline document needs a 'stages' array");
  }
  std::vector<StageSpec> stages;
  for (std::size_t i = 0; i < it->size(); ++i) {
    const auto& js = (*it)[i];
    if (!js.is_object()) throw ValidationError("stage must be an object", i);
    auto kind_it = js.find("kind");
    if (kind_it == js.end() || !kind_it->is_string()) {
      throw ValidationError("stage needs a string 'kind'", i);
    }
    auto kind = parse_stage_kind(kind_it->get<std::string>());
    if (!kind) throw ValidationError("unknown stage kind '" + kind_it->get<std::string>() + "'", i);
    auto prim_it = js.find("primitive");
    if (prim_it == js.end() || !prim_it->is_string()) {
      throw ValidationError("stage needs a string 'primitive'", i);
    }
    StageSpec stage{*kind, prim_it->get<std::string>(), {}};
    if (auto params_it = js.find("params"); params_it != js.end() && !params_it->is_null()) {
      if (!params_it->is_object()) throw ValidationError("'params' must be an object", i);
      for (const auto& [name, value] : params_it->items()) {
        if (value.is_boolean()) {
          stage.params.emplace(name, value.get<bool>());
        } else if (value.is_number_integer()) {
          stage.params.emplace(name, value.get<std::int64_t>());
        } else if (value.is_number_float()) {
          stage.params.emplace(name, value.get<double>());
        } else if (value.is_string()) {
          stage.params.emplace(name, value.get<std::string>());
        } else {
          throw ValidationError("parameter '" + name + "' must be a scalar", i);
        }
      }
    }
    for (const auto& [key, value] : js.items()) {
      if (key != "kind" && key != "primitive" && key != "params") {
        throw ValidationError("unexpected stage key '" + key + "'", i);
      }
    }
    stages.push_back(std::move(stage));
  }
  return Pipeline(std::move(stages));
}

json parse_json(std::string_view text, std::optional<std::size_t> line) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), line);
  }
}

}  // namespace detail

Pipeline parse_pipeline(std::string_view json_text) {
  return detail::pipeline_from_json(detail::parse_json(json_text));
}

std::string serialize_pipeline(const Pipeline& p) { return detail::dump(detail::pipeline_to_json(p)); }

}  // namespace pilot
