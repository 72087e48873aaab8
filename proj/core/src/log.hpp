#pragma once

#include <spdlog/spdlog.h>

namespace pilot::detail {

/// Library logger writing to stderr. Level comes from PIPELINE_PILOT_LOG
/// (trace, debug, info, warn, error, off); default warn.
spdlog::logger& logger();

}  // namespace pilot::detail
