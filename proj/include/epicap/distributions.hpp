#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "epicap/rng.hpp"

namespace epicap {

enum class DistributionId {
  GEV,
  Normal,
  JohnsonSB,
  Beta4,
  Burr4,
  InverseGaussian3,
  GeneralizedPareto,
  Weibull3,
  HyperbolicSecant,
  PointMass,  // degenerate single-atom extension; not part of default_catalog()
};

/// A family id plus its parameter vector, in the family's canonical order:
///   GEV:               k, sigma, mu
///   Normal:            mu, sigma
///   JohnsonSB:         gamma, delta, lambda, xi
///   Beta4:             alpha1, alpha2, a, b
///   Burr4:             k, alpha, beta, gamma
///   InverseGaussian3:  lambda, mu, gamma
///   GeneralizedPareto: k, sigma, mu
///   Weibull3:          alpha, beta, gamma
///   HyperbolicSecant:  mu, sigma
///   PointMass:         mu
struct Distribution {
  DistributionId id;
  std::vector<double> params;
};

struct Support {
  double lo;
  double hi;
};

std::string_view family_name(DistributionId id);
DistributionId family_from_name(std::string_view name);
const std::vector<std::string>& param_names(DistributionId id);
std::size_t param_count(DistributionId id);

/// The nine fittable families, in registry order (used as the tie-break of
/// last resort when ranking candidate fits).
const std::vector<DistributionId>& default_catalog();

/// Throws Error("dist.invalid_params") when the vector has the wrong arity or
/// violates a positivity / ordering constraint.
void validate_params(const Distribution& d);

Support support(const Distribution& d);

/// Density. Zero outside the support; +inf at boundary singularities
/// (e.g. Beta4 with alpha1 < 1 at its lower edge).
double pdf(const Distribution& d, double x);

/// ln pdf; -inf where the density is zero.
double log_pdf(const Distribution& d, double x);

double cdf(const Distribution& d, double x);

/// Inverse CDF for q in (0,1). Families without a closed form
/// (InverseGaussian3, Beta4) are inverted numerically to 1e-12 on probability.
double quantile(const Distribution& d, double q);

/// Inverse-transform sampling from `u`.
double sample(const Distribution& d, UniformStream& u);

std::vector<double> sample_n(const Distribution& d, std::size_t n,
                             std::uint64_t seed);

/// `{family, params:{name: value}}`.
nlohmann::json distribution_to_json(const Distribution& d);
Distribution distribution_from_json(const nlohmann::json& j);

}  // namespace epicap
