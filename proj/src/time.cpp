#include "odke/time.hpp"

#include <charconv>
#include <cstdio>

#include "odke/error.hpp"

namespace odke {

namespace {

int parse_fixed(std::string_view text, std::size_t pos, std::size_t len) {
  if (pos + len > text.size()) throw ParseError("timestamp too short: " + std::string(text));
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, value);
  if (ec != std::errc{} || ptr != text.data() + pos + len)
    throw ParseError("bad timestamp field: " + std::string(text));
  return value;
}

void expect_char(std::string_view text, std::size_t pos, char c) {
  if (pos >= text.size() || text[pos] != c)
    throw ParseError("bad timestamp separator: " + std::string(text));
}

}  // namespace

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss hms{t - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", int(ymd.year()),
                unsigned(ymd.month()), unsigned(ymd.day()), int(hms.hours().count()),
                int(hms.minutes().count()), int(hms.seconds().count()));
  return buf;
}

Timestamp parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  const int y = parse_fixed(text, 0, 4);
  expect_char(text, 4, '-');
  const int mo = parse_fixed(text, 5, 2);
  expect_char(text, 7, '-');
  const int d = parse_fixed(text, 8, 2);
  const year_month_day ymd{year{y}, month{unsigned(mo)}, day{unsigned(d)}};
  if (!ymd.ok()) throw ParseError("invalid calendar date: " + std::string(text));
  Timestamp t{sys_days{ymd}};
  if (text.size() == 10) return t;
  expect_char(text, 10, 'T');
  const int hh = parse_fixed(text, 11, 2);
  expect_char(text, 13, ':');
  const int mm = parse_fixed(text, 14, 2);
  expect_char(text, 16, ':');
  const int ss = parse_fixed(text, 17, 2);
  expect_char(text, 19, 'Z');
  if (text.size() != 20 || hh > 23 || mm > 59 || ss > 60)
    throw ParseError("invalid time of day: " + std::string(text));
  return t + hours{hh} + minutes{mm} + seconds{ss};
}

std::int64_t whole_days_between(Timestamp from, Timestamp to) {
  using namespace std::chrono;
  return floor<days>(to - from).count();
}

}  // namespace odke
