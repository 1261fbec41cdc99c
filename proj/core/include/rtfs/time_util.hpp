#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "rtfs/fleet.hpp"

namespace rtfs {

/// "YYYY-MM-DDTHH:MM:SS.mmmZ"
std::string format_utc(UtcTime time);

/// Accepts "YYYY-MM-DDTHH:MM:SS[.fff]Z" (fraction up to millisecond
/// resolution; extra digits are truncated). Returns nullopt on malformed input.
std::optional<UtcTime> parse_utc(std::string_view text);

UtcTime utc_now();

/// Seconds from `from` to `to`.
double seconds_between(UtcTime from, UtcTime to);

} // namespace rtfs
