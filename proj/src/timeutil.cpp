#include "reviewq/timeutil.hpp"

#include "reviewq/errors.hpp"

#include <cstdio>

namespace reviewq {

namespace {

bool digits(std::string_view s, std::size_t pos, std::size_t n, int &out) {
  if (pos + n > s.size())
    return false;
  int v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    if (s[i] < '0' || s[i] > '9')
      return false;
    v = v * 10 + (s[i] - '0');
  }
  out = v;
  return true;
}

} // namespace

Timestamp parse_timestamp(std::string_view text) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  bool ok = text.size() >= 19 && digits(text, 0, 4, y) && text[4] == '-' &&
            digits(text, 5, 2, mo) && text[7] == '-' && digits(text, 8, 2, d) &&
            (text[10] == 'T' || text[10] == ' ') && digits(text, 11, 2, h) &&
            text[13] == ':' && digits(text, 14, 2, mi) && text[16] == ':' &&
            digits(text, 17, 2, s);
  if (ok) {
    std::string_view rest = text.substr(19);
    if (!rest.empty() && rest.front() == '.') {
      std::size_t i = 1;
      while (i < rest.size() && rest[i] >= '0' && rest[i] <= '9')
        ++i;
      rest.remove_prefix(i);
    }
    ok = rest.empty() || rest == "Z";
  }
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ok || !ymd.ok() || h > 23 || mi > 59 || s > 60)
    throw ContractError("invalid timestamp '" + std::string(text) + "'");
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
}

namespace {

std::string format_with(Timestamp ts, const char *fmt) {
  using namespace std::chrono;
  const auto day_point = floor<days>(ts);
  const year_month_day ymd{day_point};
  const hh_mm_ss hms{ts - day_point};
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()),
                static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

} // namespace

std::string format_timestamp(Timestamp ts) {
  return format_with(ts, "%04d-%02u-%02uT%02d:%02d:%02dZ");
}

std::string format_server_timestamp(Timestamp ts) {
  return format_with(ts, "%04d-%02u-%02u %02d:%02d:%02d.000000000");
}

} // namespace reviewq
