#pragma once

#include <chrono>
#include <functional>
#include <string>
#include <string_view>

namespace arise {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

// Source of "now"; injected everywhere a timestamp is stamped so tests can
// pin time.
using Clock = std::function<Timestamp()>;

Timestamp system_now();

// "YYYY-MM-DDTHH:MM:SSZ", with ".mmm" inserted before the Z when the
// timestamp carries a sub-second part.
std::string format_rfc3339(Timestamp t);

// Accepts full RFC 3339 date-times: 'T' or 't' separator, optional
// fractional seconds (truncated to milliseconds), and a Z or +hh:mm offset.
// Throws ParseError.
Timestamp parse_rfc3339(std::string_view text);

}  // namespace arise
