#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace epicap {

/// Calendar day with no intraday resolution, stored as days since 1970-01-01.
class Date {
 public:
  Date() = default;
  explicit Date(std::int32_t serial) : serial_(serial) {}

  /// Parses strict ISO 8601 "YYYY-MM-DD". Throws Error("dates.parse") otherwise.
  static Date parse(const std::string& iso);
  static Date from_ymd(int year, int month, int day);

  std::string to_string() const;
  std::int32_t serial() const { return serial_; }

  Date prev() const { return Date(serial_ - 1); }
  Date next() const { return Date(serial_ + 1); }

  friend Date operator+(Date d, int days) { return Date(d.serial_ + days); }
  friend int operator-(Date a, Date b) { return a.serial_ - b.serial_; }
  auto operator<=>(const Date&) const = default;

 private:
  std::int32_t serial_ = 0;
};

/// Inclusive range of calendar days.
struct DateRange {
  Date first;
  Date last;

  int size() const { return last - first + 1; }
  bool contains(Date d) const { return first <= d && d <= last; }

  /// Parses "YYYY-MM-DD:YYYY-MM-DD". Throws on malformed input or first > last.
  static DateRange parse(const std::string& text);
  std::string to_string() const;
};

}  // namespace epicap
