#include "epicap/rates.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "epicap/error.hpp"

namespace epicap {

namespace {

const CumulativeRecord& require_record(const CumulativeCorpus& corpus,
                                       std::string_view city, Date d) {
  const CumulativeRecord* r = corpus.find(city, d);
  if (!r)
    throw Error("rates.missing_record", "no record for " + std::string(city) +
                                            " at " + d.to_string());
  return *r;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string_view rate_kind_name(RateKind k) {
  switch (k) {
    case RateKind::InfectionSpeed: return "speed";
    case RateKind::DeathRate: return "death";
    case RateKind::FatalityRatio: return "fatality";
  }
  return "unknown";
}

RateKind rate_kind_from_name(std::string_view name) {
  if (name == "speed") return RateKind::InfectionSpeed;
  if (name == "death") return RateKind::DeathRate;
  if (name == "fatality") return RateKind::FatalityRatio;
  throw Error("rates.unknown_kind",
              "unknown rate kind '" + std::string(name) + "'");
}

std::vector<double> RateSurface::day_sample(std::size_t day) const {
  std::vector<double> out;
  for (const auto& row : cells)
    if (!row[day].missing) out.push_back(row[day].value);
  return out;
}

std::size_t RateSurface::day_index(Date d) const {
  for (std::size_t i = 0; i < dates.size(); ++i)
    if (dates[i] == d) return i;
  throw Error("rates.unknown_date",
              d.to_string() + " is not part of this surface");
}

double infection_speed(const CumulativeCorpus& corpus,
                       const PopulationTable& pop, std::string_view city,
                       Date t) {
  const auto& prev = require_record(corpus, city, t.prev());
  const auto& cur = require_record(corpus, city, t);
  double tp = static_cast<double>(pop.at(city));
  if (tp <= static_cast<double>(prev.cum_confirmed))
    throw Error("rates.population_exceeded",
                std::string(city) + ": population does not exceed confirmed at " +
                    prev.date.to_string());
  return static_cast<double>(cur.cum_confirmed - prev.cum_confirmed) /
         (tp - static_cast<double>(prev.cum_confirmed));
}

double death_rate(const CumulativeCorpus& corpus, std::string_view city,
                  Date t) {
  const auto& prev = require_record(corpus, city, t.prev());
  const auto& cur = require_record(corpus, city, t);
  std::int64_t active =
      prev.cum_confirmed - prev.cum_deaths - prev.cum_recovered;
  if (active <= 0)
    throw Error("rates.no_active_cases",
                "no active cases in " + std::string(city) + " at " +
                    prev.date.to_string());
  return static_cast<double>(cur.cum_deaths - prev.cum_deaths) /
         static_cast<double>(active);
}

double fatality_ratio(const CumulativeCorpus& corpus, std::string_view city,
                      Date t) {
  const auto& cur = require_record(corpus, city, t);
  if (cur.cum_confirmed == 0)
    throw Error("rates.no_confirmed_cases",
                "no confirmed cases in " + std::string(city) + " at " +
                    t.to_string());
  return static_cast<double>(cur.cum_deaths) /
         static_cast<double>(cur.cum_confirmed);
}

RateSurface rate_surface(const CumulativeCorpus& corpus,
                         const PopulationTable& pop, RateKind kind,
                         const DateRange& window) {
  DateRange have = corpus.date_range();
  if (window.first < have.first || window.last > have.last)
    throw Error("rates.window", "window " + window.to_string() +
                                    " is not inside the corpus range " +
                                    have.to_string());
  RateSurface s;
  s.kind = kind;
  s.cities = corpus.cities();
  for (Date d = window.first; d <= window.last; d = d.next())
    s.dates.push_back(d);
  s.cells.resize(s.cities.size());
  for (std::size_t c = 0; c < s.cities.size(); ++c) {
    s.cells[c].resize(s.dates.size());
    for (std::size_t t = 0; t < s.dates.size(); ++t) {
      RateCell& cell = s.cells[c][t];
      try {
        switch (kind) {
          case RateKind::InfectionSpeed:
            cell.value = infection_speed(corpus, pop, s.cities[c], s.dates[t]);
            break;
          case RateKind::DeathRate:
            cell.value = death_rate(corpus, s.cities[c], s.dates[t]);
            break;
          case RateKind::FatalityRatio:
            cell.value = fatality_ratio(corpus, s.cities[c], s.dates[t]);
            break;
        }
        cell.missing = false;
        cell.negative = cell.value < 0.0;
      } catch (const Error& e) {
        cell.missing = true;
        cell.reason = e.what();
      }
    }
  }
  return s;
}

StatsRow sample_stats(std::vector<double> values) {
  if (values.empty())
    throw Error("rates.empty_sample", "statistics need at least one value");
  // Sorting first makes every statistic exactly invariant under permutation
  // of the input (summation order is fixed), not merely up to rounding.
  std::sort(values.begin(), values.end());
  StatsRow row;
  row.n = static_cast<int>(values.size());
  if (values.front() == values.back()) {
    // Constant sample: report it exactly instead of through rounded sums.
    row.mean = row.median = row.min = row.max = values.front();
    return row;
  }
  double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  row.mean = sum / n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : values) {
    double d = v - row.mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  row.sd = row.n > 1 ? std::sqrt(m2 * n / (n - 1.0)) : 0.0;

  row.min = values.front();
  row.max = values.back();
  std::size_t h = values.size() / 2;
  row.median = values.size() % 2 == 1
                   ? values[h]
                   : 0.5 * (values[h - 1] + values[h]);

  if (m2 > 0.0) {
    if (row.n >= 3) {
      double g1 = m3 / std::pow(m2, 1.5);
      row.skewness = g1 * std::sqrt(n * (n - 1.0)) / (n - 2.0);
    }
    if (row.n >= 4) {
      double g2 = m4 / (m2 * m2) - 3.0;
      row.excess_kurtosis =
          ((n + 1.0) * g2 + 6.0) * (n - 1.0) / ((n - 2.0) * (n - 3.0));
    }
  }
  return row;
}

StatsRow cross_section_stats(const RateSurface& surface, Date t) {
  auto sample = surface.day_sample(surface.day_index(t));
  if (sample.empty())
    throw Error("rates.empty_cross_section",
                "no usable cells at " + t.to_string());
  return sample_stats(std::move(sample));
}

void write_stats_csv(const RateSurface& surface, const std::string& path) {
  std::ofstream out(path);
  if (!out)
    throw Error("rates.io", "cannot write '" + path + "'");
  out << "date,mean,sd,median,min,max,skewness,excess_kurtosis,n\n";
  for (std::size_t t = 0; t < surface.dates.size(); ++t) {
    auto sample = surface.day_sample(t);
    if (sample.empty()) continue;
    StatsRow r = sample_stats(std::move(sample));
    out << surface.dates[t].to_string() << ',' << format_double(r.mean) << ','
        << format_double(r.sd) << ',' << format_double(r.median) << ','
        << format_double(r.min) << ',' << format_double(r.max) << ',';
    if (r.skewness) out << format_double(*r.skewness);
    out << ',';
    if (r.excess_kurtosis) out << format_double(*r.excess_kurtosis);
    out << ',' << r.n << '\n';
  }
  if (!out)
    throw Error("rates.io", "write to '" + path + "' failed");
}

void write_surface_csv(const RateSurface& surface, const std::string& path) {
  std::ofstream out(path);
  if (!out)
    throw Error("rates.io", "cannot write '" + path + "'");
  out << "date,city,value,status,reason\n";
  for (std::size_t t = 0; t < surface.dates.size(); ++t) {
    for (std::size_t c = 0; c < surface.cities.size(); ++c) {
      const RateCell& cell = surface.cells[c][t];
      out << surface.dates[t].to_string() << ',' << surface.cities[c] << ',';
      if (!cell.missing) out << format_double(cell.value);
      out << ',';
      if (cell.missing)
        out << "missing";
      else if (cell.negative)
        out << "negative";
      else
        out << "ok";
      out << ',' << cell.reason << '\n';
    }
  }
  if (!out)
    throw Error("rates.io", "write to '" + path + "' failed");
}

}  // namespace epicap
