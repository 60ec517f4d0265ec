#include "epicap/meta.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "epicap/error.hpp"

namespace epicap {

namespace {

constexpr int kMinTraceDays = 4;

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void require_enough_days(const ParameterTrace& trace) {
  if (trace.values.size() < static_cast<std::size_t>(kMinTraceDays))
    throw Error("meta.too_few_days",
                "parameter statistics need at least " +
                    std::to_string(kMinTraceDays) + " fitted days, got " +
                    std::to_string(trace.values.size()));
}

std::vector<double> column(const ParameterTrace& trace, std::size_t j) {
  std::vector<double> col;
  col.reserve(trace.values.size());
  for (const auto& v : trace.values) col.push_back(v[j]);
  return col;
}

}  // namespace

TraceStatsTable trace_stats(const ParameterTrace& trace) {
  require_enough_days(trace);
  TraceStatsTable out;
  out.id = trace.id;
  out.excluded_days = static_cast<int>(trace.failures.size());
  const auto& names = param_names(trace.id);
  for (std::size_t j = 0; j < names.size(); ++j)
    out.rows.emplace_back(names[j], sample_stats(column(trace, j)));
  return out;
}

void write_trace_stats_csv(const TraceStatsTable& table,
                           const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error("meta.io", "cannot open " + path + " for writing");
  out << "param,mean,sd,median,min,max,skewness,kurtosis\n";
  for (const auto& [name, row] : table.rows) {
    out << name << ',' << g17(row.mean) << ',' << g17(row.sd) << ','
        << g17(row.median) << ',' << g17(row.min) << ',' << g17(row.max)
        << ',' << (row.skewness ? g17(*row.skewness) : "") << ','
        << (row.excess_kurtosis ? g17(*row.excess_kurtosis) : "") << '\n';
  }
}

ParameterDistributionFit fit_parameter_distribution(
    const ParameterTrace& trace, std::string_view param,
    const std::vector<DistributionId>& catalog, const FitOptions& options) {
  require_enough_days(trace);
  const auto& names = param_names(trace.id);
  std::size_t j = names.size();
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == param) j = i;
  if (j == names.size()) {
    std::string have;
    for (const auto& n : names) have += (have.empty() ? "" : ", ") + n;
    throw Error("meta.unknown_parameter",
                std::string(family_name(trace.id)) + " has no parameter '" +
                    std::string(param) + "' (have " + have + ")");
  }
  auto ranked = rank_candidates(column(trace, j), catalog, options);
  if (ranked.size() > 3) ranked.resize(3);
  ParameterDistributionFit out;
  out.param = std::string(param);
  out.ranked = std::move(ranked);
  out.best = out.ranked.front();
  return out;
}

std::vector<ParameterDistributionFit> fit_all_parameters(
    const ParameterTrace& trace, const std::vector<DistributionId>& catalog,
    const FitOptions& options) {
  std::vector<ParameterDistributionFit> out;
  for (const auto& name : param_names(trace.id))
    out.push_back(fit_parameter_distribution(trace, name, catalog, options));
  return out;
}

nlohmann::json parameter_fit_to_json(const ParameterDistributionFit& fit) {
  auto enrich = [](const FitResult& fr) {
    nlohmann::json j = distribution_to_json(Distribution{fr.id, fr.params});
    j["ks"] = fr.ks;
    j["log_likelihood"] = fr.log_likelihood;
    j["converged"] = fr.converged;
    return j;
  };
  nlohmann::json ranked = nlohmann::json::array();
  for (const auto& fr : fit.ranked) ranked.push_back(enrich(fr));
  return {{"param", fit.param},
          {"best", enrich(fit.best)},
          {"ranked", std::move(ranked)}};
}

}  // namespace epicap
