#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace reldisc {

using Timestamp = std::chrono::sys_seconds;

/// Parses an ISO-8601 date-time ("2021-10-11T08:30:00Z", optional fraction,
/// "Z" or a numeric offset) and normalizes it to UTC. Fractional seconds are
/// truncated. Throws ValidationError on anything else.
Timestamp parse_timestamp(std::string_view text);

/// Canonical UTC form, e.g. "2021-10-11T08:30:00Z".
std::string format_timestamp(Timestamp ts);

}  // namespace reldisc
