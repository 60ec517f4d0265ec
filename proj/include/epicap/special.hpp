#pragma once

namespace epicap::special {

// Special functions needed by the distribution catalog. Relative error is
// below 1e-13 on standard test points (see tests/test_distributions.cpp).

/// Standard normal CDF.
double norm_cdf(double z);

/// Standard normal quantile, q in (0,1).
double norm_quantile(double q);

/// Standard normal log-density constant aside: log of the standard normal CDF,
/// stable far into the lower tail.
double log_norm_cdf(double z);

/// ln Gamma(x), x > 0.
double log_gamma(double x);

/// ln B(a, b) = ln Gamma(a) + ln Gamma(b) - ln Gamma(a+b).
double log_beta(double a, double b);

/// Regularized incomplete beta I_x(a, b), x in [0,1].
double reg_inc_beta(double a, double b, double x);

/// Gamma(x) for moderate x (used by moment-based initializers).
double gamma_fn(double x);

}  // namespace epicap::special
