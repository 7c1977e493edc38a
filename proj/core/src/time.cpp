#include "arise/time.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>

#include "arise/errors.hpp"

namespace arise {
namespace {

using namespace std::chrono;

int read_digits(std::string_view text, std::size_t& pos, std::size_t count) {
  if (pos + count > text.size()) throw ParseError("timestamp truncated: '" + std::string(text) + "'");
  int value = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const char c = text[pos + i];
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      throw ParseError("timestamp has non-digit at offset " + std::to_string(pos + i) + ": '" +
                       std::string(text) + "'");
    }
    value = value * 10 + (c - '0');
  }
  pos += count;
  return value;
}

void expect(std::string_view text, std::size_t& pos, std::string_view accepted) {
  if (pos >= text.size() || accepted.find(text[pos]) == std::string_view::npos) {
    throw ParseError("malformed timestamp '" + std::string(text) + "'");
  }
  ++pos;
}

}  // namespace

Timestamp system_now() { return time_point_cast<milliseconds>(system_clock::now()); }

std::string format_rfc3339(Timestamp t) {
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss tod{t - day};
  char buf[40];
  const auto ms = tod.subseconds().count();
  if (ms == 0) {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                  static_cast<int>(tod.seconds().count()));
  } else {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                  static_cast<int>(tod.seconds().count()), static_cast<int>(ms));
  }
  return buf;
}

Timestamp parse_rfc3339(std::string_view text) {
  std::size_t pos = 0;
  const int y = read_digits(text, pos, 4);
  expect(text, pos, "-");
  const int mo = read_digits(text, pos, 2);
  expect(text, pos, "-");
  const int d = read_digits(text, pos, 2);
  expect(text, pos, "Tt ");
  const int hh = read_digits(text, pos, 2);
  expect(text, pos, ":");
  const int mm = read_digits(text, pos, 2);
  expect(text, pos, ":");
  const int ss = read_digits(text, pos, 2);

  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 60) {
    throw ParseError("timestamp out of range: '" + std::string(text) + "'");
  }

  int millis = 0;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    std::size_t digits = 0;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      if (digits < 3) millis = millis * 10 + (text[pos] - '0');
      ++digits;
      ++pos;
    }
    if (digits == 0) throw ParseError("empty fractional seconds in '" + std::string(text) + "'");
    for (std::size_t i = digits; i < 3; ++i) millis *= 10;
  }

  if (pos >= text.size()) throw ParseError("timestamp lacks a UTC offset: '" + std::string(text) + "'");
  minutes offset{0};
  if (text[pos] == 'Z' || text[pos] == 'z') {
    ++pos;
  } else {
    const char sign = text[pos];
    expect(text, pos, "+-");
    const int oh = read_digits(text, pos, 2);
    expect(text, pos, ":");
    const int om = read_digits(text, pos, 2);
    if (oh > 23 || om > 59) throw ParseError("bad UTC offset in '" + std::string(text) + "'");
    offset = hours{oh} + minutes{om};
    if (sign == '-') offset = -offset;
  }
  if (pos != text.size()) throw ParseError("trailing characters in timestamp '" + std::string(text) + "'");

  const auto local = sys_days{ymd} + hours{hh} + minutes{mm} + seconds{ss} + milliseconds{millis};
  return time_point_cast<milliseconds>(local - offset);
}

}  // namespace arise
