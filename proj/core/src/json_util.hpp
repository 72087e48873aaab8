#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "pilot/error.hpp"
#include "pilot/pipeline.hpp"

namespace pilot::detail {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

/// Parses text, mapping nlohmann exceptions to ParseError.
json parse_json(std::string_view text, std::optional<std::size_t> line = std::nullopt);

ordered_json pipeline_to_json(const Pipeline& p);
Pipeline pipeline_from_json(const json& doc);

/// Compact dump with UTF-8 passed through unchanged.
inline std::string dump(const ordered_json& j) { return j.dump(-1, ' ', false); }

/// Value of `key` as type T, or ValidationError naming the key.
template <typename T>
T required(const json& obj, std::string_view key, std::string_view context) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ValidationError(std::string(context) + ": missing key '" + std::string(key) + "'");
  }
  try {
    return it->template get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string(context) + ": key '" + std::string(key) +
                          "' has the wrong type");
  }
}

}  // namespace pilot::detail
