#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "epicap/corpus.hpp"
#include "epicap/dates.hpp"

namespace epicap {

enum class RateKind { InfectionSpeed, DeathRate, FatalityRatio };

/// Short id used in file names and reports: speed / death / fatality.
std::string_view rate_kind_name(RateKind k);
RateKind rate_kind_from_name(std::string_view name);

struct RateCell {
  double value = 0.0;
  bool missing = true;
  bool negative = false;     // unrepaired nonmonotonic input, kept but flagged
  std::string reason;        // why the cell is missing
};

/// City x day matrix of one rate series.
struct RateSurface {
  RateKind kind = RateKind::InfectionSpeed;
  std::vector<std::string> cities;
  std::vector<Date> dates;
  std::vector<std::vector<RateCell>> cells;  // cells[city][day]

  const RateCell& at(std::size_t city, std::size_t day) const {
    return cells[city][day];
  }
  /// Non-missing values of one day's cross-section, in city order.
  std::vector<double> day_sample(std::size_t day) const;
  std::size_t day_index(Date d) const;  // throws when d is not a surface date
};

/// Cross-sectional descriptive statistics. Skewness is the adjusted
/// Fisher-Pearson sample skewness and excess_kurtosis carries the standard
/// small-sample bias correction; both are absent when undefined (sd = 0, or
/// n < 3 / n < 4 respectively).
struct StatsRow {
  double mean = 0.0;
  double sd = 0.0;
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::optional<double> skewness;
  std::optional<double> excess_kurtosis;
  int n = 0;
};

/// New confirmed cases at t over the population not yet confirmed at t-1.
double infection_speed(const CumulativeCorpus& corpus,
                       const PopulationTable& pop, std::string_view city,
                       Date t);

/// New deaths at t over cases still active at t-1.
double death_rate(const CumulativeCorpus& corpus, std::string_view city,
                  Date t);

/// Cumulative deaths over cumulative confirmed at t.
double fatality_ratio(const CumulativeCorpus& corpus, std::string_view city,
                      Date t);

/// Applies the per-cell operation over every (city, day) in the window;
/// cells whose inputs are unavailable are marked missing with a reason.
RateSurface rate_surface(const CumulativeCorpus& corpus,
                         const PopulationTable& pop, RateKind kind,
                         const DateRange& window);

StatsRow sample_stats(std::vector<double> values);  // throws on empty input

StatsRow cross_section_stats(const RateSurface& surface, Date t);

/// `date,mean,sd,median,min,max,skewness,excess_kurtosis,n`; undefined
/// statistics serialize as empty fields. Days with no usable cells are
/// skipped.
void write_stats_csv(const RateSurface& surface, const std::string& path);

/// Long format `date,city,value,status,reason` (status ok|negative|missing).
void write_surface_csv(const RateSurface& surface, const std::string& path);

}  // namespace epicap
