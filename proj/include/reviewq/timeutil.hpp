#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace reviewq {

using Timestamp = std::chrono::sys_seconds;

/// Parses "YYYY-MM-DDTHH:MM:SSZ" (ISO-8601 UTC) and the review server's
/// "YYYY-MM-DD HH:MM:SS.fffffffff" form. Fractional seconds are dropped.
/// Throws ContractError on anything else.
Timestamp parse_timestamp(std::string_view text);

/// ISO-8601 UTC, second precision: "2024-01-01T02:30:00Z".
std::string format_timestamp(Timestamp ts);

/// Review-server form: "2024-01-01 02:30:00.000000000".
std::string format_server_timestamp(Timestamp ts);

inline double minutes_between(Timestamp from, Timestamp to) {
  return std::chrono::duration<double>(to - from).count() / 60.0;
}

} // namespace reviewq
