#include "epicap/special.hpp"

#include <cmath>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "epicap/error.hpp"

namespace epicap::special {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
}

double norm_cdf(double z) {
  // erfc keeps full relative accuracy in the lower tail.
  return 0.5 * std::erfc(-z / kSqrt2);
}

double norm_quantile(double q) {
  if (!(q > 0.0 && q < 1.0))
    throw Error("special.domain", "norm_quantile needs q in (0,1)");
  return -kSqrt2 * boost::math::erfc_inv(2.0 * q);
}

double log_norm_cdf(double z) {
  // The direct form is exact wherever the cdf is still a normal double;
  // beyond that the Mills-ratio asymptotic expansion takes over.
  if (z > -37.0) return std::log(norm_cdf(z));
  double z2 = z * z;
  double series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2) +
                  105.0 / (z2 * z2 * z2 * z2);
  return -0.5 * z2 - 0.5 * std::log(2.0 * M_PI) - std::log(-z) + std::log(series);
}

double log_gamma(double x) { return std::lgamma(x); }

double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double reg_inc_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return boost::math::ibeta(a, b, x);
}

double gamma_fn(double x) { return std::tgamma(x); }

}  // namespace epicap::special
