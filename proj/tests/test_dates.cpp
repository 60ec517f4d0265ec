#include <doctest.h>

#include "epicap/dates.hpp"
#include "epicap/error.hpp"

using epicap::Date;
using epicap::DateRange;

TEST_CASE("date parse and format round-trip") {
  Date d = Date::parse("2020-01-23");
  CHECK(d.to_string() == "2020-01-23");
  CHECK(Date::parse("1970-01-01").serial() == 0);
  CHECK(Date::parse("2020-02-29").to_string() == "2020-02-29");  // leap year
}

TEST_CASE("date arithmetic") {
  Date d = Date::parse("2020-01-31");
  CHECK((d + 1).to_string() == "2020-02-01");
  CHECK(d.next().to_string() == "2020-02-01");
  CHECK((d + 29).to_string() == "2020-02-29");
  CHECK((d + 30).to_string() == "2020-03-01");
  CHECK(Date::parse("2020-03-04") - Date::parse("2020-01-24") == 40);
  CHECK(Date::parse("2020-03-17") - Date::parse("2020-01-25") == 52);
  CHECK(Date::parse("2020-01-24") < Date::parse("2020-01-25"));
}

TEST_CASE("date parse rejects malformed input") {
  CHECK_THROWS_AS(Date::parse("2020-13-01"), epicap::Error);
  CHECK_THROWS_AS(Date::parse("2021-02-29"), epicap::Error);  // not a leap year
  CHECK_THROWS_AS(Date::parse("2020/01/23"), epicap::Error);
  CHECK_THROWS_AS(Date::parse("2020-1-23"), epicap::Error);
  CHECK_THROWS_AS(Date::parse("20-01-23"), epicap::Error);
  CHECK_THROWS_AS(Date::parse(""), epicap::Error);
  CHECK_THROWS_AS(Date::parse("2020-01-23x"), epicap::Error);
}

TEST_CASE("date range") {
  DateRange r = DateRange::parse("2020-01-24:2020-03-04");
  CHECK(r.size() == 41);
  CHECK(r.contains(Date::parse("2020-01-24")));
  CHECK(r.contains(Date::parse("2020-03-04")));
  CHECK(!r.contains(Date::parse("2020-03-05")));
  CHECK(r.to_string() == "2020-01-24:2020-03-04");

  CHECK(DateRange::parse("2020-01-25:2020-03-17").size() == 53);
  CHECK(DateRange::parse("2020-01-29:2020-03-04").size() == 36);
  CHECK(DateRange::parse("2020-02-01:2020-02-01").size() == 1);
  CHECK_THROWS_AS(DateRange::parse("2020-02-02:2020-02-01"), epicap::Error);
  CHECK_THROWS_AS(DateRange::parse("2020-02-02"), epicap::Error);
}
