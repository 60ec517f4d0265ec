#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "epicap/distributions.hpp"

namespace epicap {

enum class ContractVariant { VectorBarrier, ScalarBarrier };
enum class ExceedanceRule { AnyComponent, AllComponents };
enum class TriggerState { NotTriggered, Triggered, CapExceeded };

std::string_view variant_name(ContractVariant v);
ContractVariant variant_from_name(std::string_view name);
std::string_view rule_name(ExceedanceRule r);
ExceedanceRule rule_from_name(std::string_view name);
std::string_view trigger_state_name(TriggerState s);

/// Piecewise-linear map from an event-parameter vector to money, one knot
/// list per component, summed across components. Inside a knot list the map
/// interpolates; below the first knot it is flat, above the last it extends
/// the final slope. statistical_death_value records the per-death money
/// figure the knots were built from.
struct LossMap {
  std::vector<std::vector<std::array<double, 2>>> knots;  // [(point, money)]
  double statistical_death_value = 0.0;

  double component_loss(std::size_t c, double x) const;
  double operator()(const std::vector<double>& theta) const;
};

/// Parametric contract: payouts attach when the observed event parameters
/// exceed the trigger under the exceedance rule and saturate at the barrier.
/// Both boundaries are closed: theta at the trigger pays, theta at the
/// barrier is capped.
struct ContractSpec {
  ContractVariant variant = ContractVariant::ScalarBarrier;
  ExceedanceRule rule = ExceedanceRule::AnyComponent;
  std::vector<std::string> event_params;  // VectorBarrier: mu_s, mu_d; ScalarBarrier: xi
  std::vector<double> trigger;
  std::vector<double> barrier;
  LossMap loss;
  std::string currency = "USD";

  void validate() const;  // throws contract.bad_spec
  nlohmann::json to_json() const;
  static ContractSpec from_json(const nlohmann::json& j);
};

TriggerState evaluate_trigger(const ContractSpec& spec,
                              const std::vector<double>& theta);

/// amount is 0 when not triggered, the loss map at the componentwise
/// min(theta, barrier) when triggered, and the loss map at the barrier when
/// capped; evaluated_at carries the point the loss map was applied to.
struct PayoutResult {
  bool triggered = false;
  bool capped = false;
  double amount = 0.0;
  std::vector<double> evaluated_at;
};

PayoutResult payout(const ContractSpec& spec, const std::vector<double>& theta);

struct McResult {
  double estimate = 0.0;
  double std_error = 0.0;
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
};

/// Monte Carlo expected payout with independently sampled components, one
/// model per event parameter. Draws are partitioned into fixed blocks with
/// per-block derived seeds and merged in block order, so the result is
/// bit-identical for any worker count. Requires n >= 100.
McResult expected_payout_mc(const ContractSpec& spec,
                            const std::vector<Distribution>& components,
                            std::uint64_t n, std::uint64_t seed,
                            int workers = 0);

/// Mean of the worst ceil((1 - level) * n) samples; level 0 gives the plain
/// mean. Boundary products within 1e-9 of an integer resolve to it.
double expected_shortfall(std::vector<double> samples, double level);

/// {estimate, std_error, n, seed, currency, independent_components,
///  es_levels:{level: value}} from one simulation run; the estimate and
/// std_error are bit-identical with expected_payout_mc at the same seed.
nlohmann::json pricing_report(const ContractSpec& spec,
                              const std::vector<Distribution>& components,
                              std::uint64_t n, std::uint64_t seed,
                              const std::vector<double>& es_levels = {0.95,
                                                                      0.99},
                              int workers = 0);

}  // namespace epicap
