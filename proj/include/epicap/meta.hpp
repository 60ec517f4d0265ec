#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "epicap/fitting.hpp"
#include "epicap/rates.hpp"

namespace epicap {

/// Descriptive statistics of each parameter of a fitted-day trace, in the
/// family's parameter order. Days whose first-stage fit failed are excluded
/// from the sample; their count is carried in excluded_days.
struct TraceStatsTable {
  DistributionId id = DistributionId::Normal;
  std::vector<std::pair<std::string, StatsRow>> rows;
  int excluded_days = 0;
};

/// Requires at least four fitted days.
TraceStatsTable trace_stats(const ParameterTrace& trace);

/// `param,mean,sd,median,min,max,skewness,kurtosis`; undefined statistics
/// serialize as empty fields.
void write_trace_stats_csv(const TraceStatsTable& table,
                           const std::string& path);

/// Second-stage fit: a parameter's day series treated as a sample of its own.
struct ParameterDistributionFit {
  std::string param;
  FitResult best;                 // always ranked.front()
  std::vector<FitResult> ranked;  // top three candidates
};

ParameterDistributionFit fit_parameter_distribution(
    const ParameterTrace& trace, std::string_view param,
    const std::vector<DistributionId>& catalog, const FitOptions& options);

/// fit_parameter_distribution for every parameter of the trace's family.
std::vector<ParameterDistributionFit> fit_all_parameters(
    const ParameterTrace& trace, const std::vector<DistributionId>& catalog,
    const FitOptions& options);

/// {param, best:{family,params,ks,...}, ranked:[...]}.
nlohmann::json parameter_fit_to_json(const ParameterDistributionFit& fit);

}  // namespace epicap
