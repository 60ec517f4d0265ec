#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "epicap/distributions.hpp"
#include "epicap/rates.hpp"

namespace epicap {

struct FitOptions {
  int restarts = 8;        // jittered simplex starts per fit
  int max_iters = 2000;    // simplex iterations per start
  double tol = 1e-10;      // relative objective-spread convergence threshold
  int min_day_sample = 5;  // cross-sections smaller than this are skipped
  std::uint64_t seed = 2020;
};

struct FitResult {
  DistributionId id = DistributionId::Normal;
  std::vector<double> params;
  double log_likelihood = 0.0;
  double ks = 1.0;
  int n = 0;
  bool converged = false;
  int restarts_used = 0;
  int zeros_perturbed = 0;
};

/// Maximum likelihood via derivative-free simplex search in an unconstrained
/// reparameterization (log for positive parameters, log-gap for location
/// thresholds; Beta4 boundaries are anchored at data min/max padded by 1e-6
/// of the range), moment-style initialization, `restarts` jittered starts.
/// Normal uses its closed form directly.
///
/// Exact zeros in the sample of an always-bounded-support family are
/// perturbed to half the smallest positive data value when 0 is the sample
/// minimum; the count is reported in zeros_perturbed.
///
/// Throws on degenerate (constant) samples and samples smaller than
/// arity + 1; returns converged=false with the best point found when the
/// search exhausts its budget.
FitResult fit_mle(DistributionId id, std::vector<double> data,
                  const FitOptions& options);

/// D = max over sorted data of max(i/n - F(x_i), F(x_i) - (i-1)/n).
double ks_statistic(DistributionId id, const std::vector<double>& params,
                    std::vector<double> data);

/// Fit every catalog family and sort: ascending KS, converged fits before
/// non-converged, ties to the family with fewer parameters, then to catalog
/// order. Families whose fit throws are dropped; if all fail, the error
/// carries every failure reason.
std::vector<FitResult> rank_candidates(const std::vector<double>& data,
                                       const std::vector<DistributionId>& catalog,
                                       const FitOptions& options);

/// The ranking order used by rank_candidates, exposed for direct testing.
/// catalog_pos maps each family to its position in the candidate catalog.
void sort_ranked(std::vector<FitResult>& results,
                 const std::vector<DistributionId>& catalog);

struct DaySelection {
  Date date;
  int n = 0;
  std::vector<FitResult> top;  // best three candidates, ranked
};

struct SelectionSummary {
  RateKind kind = RateKind::InfectionSpeed;
  std::vector<DaySelection> per_day;
  std::vector<Date> skipped_days;  // cross-sections below min_day_sample
  DistributionId winner = DistributionId::Normal;
  int winner_day_count = 0;
  int total_days = 0;
  nlohmann::json to_json() const;
};

/// Ranks the catalog on every usable day and names the modal per-day winner;
/// modal ties go to the family with the lower mean KS over the days it won.
/// Per-fit seeds derive from (options.seed, day, family), so results are
/// independent of evaluation order.
SelectionSummary daily_selection(const RateSurface& surface,
                                 const std::vector<DistributionId>& catalog,
                                 const FitOptions& options);

struct ParameterTrace {
  DistributionId id = DistributionId::Normal;
  std::vector<Date> days;                   // days with a fitted vector
  std::vector<std::vector<double>> values;  // aligned with days
  std::vector<bool> converged;              // aligned with days
  std::vector<Date> failures;               // days where the fit threw
};

/// Refits one family on every usable day of the surface.
ParameterTrace refit_winner(const RateSurface& surface, DistributionId id,
                            const FitOptions& options);

/// `date,<param names...>,converged`.
void write_trace_csv(const ParameterTrace& trace, const std::string& path);
ParameterTrace load_trace_csv(const std::string& path, DistributionId id);

}  // namespace epicap
