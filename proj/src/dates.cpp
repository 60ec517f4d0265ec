#include "epicap/dates.hpp"

#include <chrono>
#include <cstdio>

#include "epicap/error.hpp"

namespace epicap {

namespace {

namespace chr = std::chrono;

bool all_digits(const std::string& s, size_t from, size_t to) {
  for (size_t i = from; i < to; ++i)
    if (s[i] < '0' || s[i] > '9') return false;
  return true;
}

}  // namespace

Date Date::from_ymd(int year, int month, int day) {
  chr::year_month_day ymd{chr::year{year}, chr::month{unsigned(month)},
                          chr::day{unsigned(day)}};
  if (!ymd.ok()) throw Error("dates.parse", "invalid calendar day");
  auto days = chr::sys_days(ymd).time_since_epoch().count();
  return Date(static_cast<std::int32_t>(days));
}

Date Date::parse(const std::string& iso) {
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-' ||
      !all_digits(iso, 0, 4) || !all_digits(iso, 5, 7) || !all_digits(iso, 8, 10))
    throw Error("dates.parse", "expected YYYY-MM-DD, got '" + iso + "'");
  int y = std::stoi(iso.substr(0, 4));
  int m = std::stoi(iso.substr(5, 2));
  int d = std::stoi(iso.substr(8, 2));
  return from_ymd(y, m, d);
}

std::string Date::to_string() const {
  chr::sys_days days{chr::days{serial_}};
  chr::year_month_day ymd{days};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", int(ymd.year()),
                unsigned(ymd.month()), unsigned(ymd.day()));
  return buf;
}

DateRange DateRange::parse(const std::string& text) {
  auto colon = text.find(':');
  if (colon == std::string::npos)
    throw Error("dates.parse", "expected YYYY-MM-DD:YYYY-MM-DD, got '" + text + "'");
  DateRange r{Date::parse(text.substr(0, colon)), Date::parse(text.substr(colon + 1))};
  if (r.first > r.last)
    throw Error("dates.parse", "range start after end: '" + text + "'");
  return r;
}

std::string DateRange::to_string() const {
  return first.to_string() + ":" + last.to_string();
}

}  // namespace epicap
