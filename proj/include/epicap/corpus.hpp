#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "epicap/dates.hpp"

namespace epicap {

/// One city-day of cumulative counts.
struct CumulativeRecord {
  std::string city;
  Date date;
  std::int64_t cum_confirmed = 0;
  std::int64_t cum_deaths = 0;
  std::int64_t cum_recovered = 0;

  bool operator==(const CumulativeRecord&) const = default;
};

/// City-day panel of cumulative counts, sorted by (city, date).
class CumulativeCorpus {
 public:
  CumulativeCorpus() = default;
  /// Sorts, normalizes city names, rejects duplicate (city, date) pairs.
  explicit CumulativeCorpus(std::vector<CumulativeRecord> records);

  const std::vector<CumulativeRecord>& records() const { return records_; }
  std::vector<std::string> cities() const;
  DateRange date_range() const;  // throws on empty corpus
  const CumulativeRecord* find(std::string_view city, Date d) const;
  bool empty() const { return records_.empty(); }

  bool operator==(const CumulativeCorpus&) const = default;

 private:
  std::vector<CumulativeRecord> records_;
};

class PopulationTable {
 public:
  PopulationTable() = default;
  explicit PopulationTable(std::map<std::string, std::int64_t> entries)
      : entries_(std::move(entries)) {}

  const std::map<std::string, std::int64_t>& entries() const { return entries_; }
  std::int64_t at(std::string_view city) const;  // throws on unknown city
  bool contains(std::string_view city) const;

 private:
  std::map<std::string, std::int64_t> entries_;
};

enum class IssueKind {
  Nonmonotonic,
  MissingDay,
  CdExceedsCc,
  CrExceedsCc,
  NegativeCount,
};

std::string_view issue_kind_name(IssueKind k);

struct ValidationIssue {
  std::string city;
  std::optional<Date> date;
  IssueKind kind;
  std::string detail;
  bool repaired = false;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool clean() const { return issues.empty(); }
  nlohmann::json to_json() const;
};

enum class ValidationPolicy { Strict, Clamp };

/// Lower-cases and trims a city name into its id form.
std::string normalize_city(std::string_view name);

/// Reads `date,city,cum_confirmed,cum_deaths,cum_recovered`. The schema id
/// names the one supported layout so future snapshots can extend it.
CumulativeCorpus load_cumulative(const std::string& path,
                                 std::string_view schema = "cumulative_v1");

void save_cumulative(const CumulativeCorpus& corpus, const std::string& path);

/// Reads `city,population`.
PopulationTable load_population(const std::string& path);

/// Strict: returns the corpus untouched plus every issue found.
/// Clamp: additionally raises nonmonotonic cumulative values to the running
/// maximum, marking those issues repaired.
std::pair<CumulativeCorpus, ValidationReport> validate(
    const CumulativeCorpus& corpus, ValidationPolicy policy);

/// Every corpus city must have a population strictly above its maximum
/// cumulative confirmed count.
void check_population_coverage(const CumulativeCorpus& corpus,
                               const PopulationTable& pop);

/// HTTPS GET of a CSV snapshot into dest (atomic: temp file + rename).
/// When a SHA-256 hex digest is given the download must match byte-exactly;
/// mismatches delete the partial file.
std::string fetch_snapshot(const std::string& url, const std::string& dest,
                           const std::optional<std::string>& checksum = {});

/// SHA-256 hex digest of a file's bytes.
std::string sha256_file(const std::string& path);

}  // namespace epicap
