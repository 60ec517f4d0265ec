#include <doctest.h>

#include <cmath>

#include "epicap/error.hpp"
#include "epicap/special.hpp"

namespace sp = epicap::special;

// Reference values computed with 30-digit arithmetic and frozen here.

TEST_CASE("normal cdf") {
  CHECK(sp::norm_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(sp::norm_cdf(1.0) ==
        doctest::Approx(0.841344746068542948585).epsilon(1e-14));
  CHECK(sp::norm_cdf(-1.96) ==
        doctest::Approx(0.0249978951482204362128).epsilon(1e-13));
  CHECK(sp::norm_cdf(2.5) ==
        doctest::Approx(0.993790334674223864833).epsilon(1e-14));
  // No premature underflow while the value is still representable.
  CHECK(sp::norm_cdf(-37.0) > 0.0);
}

TEST_CASE("normal quantile inverts the cdf") {
  CHECK(sp::norm_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(sp::norm_quantile(0.975) ==
        doctest::Approx(1.95996398454005423552).epsilon(1e-13));
  CHECK(sp::norm_quantile(1e-9) ==
        doctest::Approx(-5.99780701500768687156).epsilon(1e-13));
  for (double q : {1e-12, 1e-6, 0.01, 0.3, 0.5, 0.77, 0.999, 1.0 - 1e-10}) {
    CHECK(sp::norm_cdf(sp::norm_quantile(q)) ==
          doctest::Approx(q).epsilon(1e-12));
  }
  CHECK_THROWS_AS(sp::norm_quantile(0.0), epicap::Error);
  CHECK_THROWS_AS(sp::norm_quantile(1.0), epicap::Error);
}

TEST_CASE("log normal cdf covers the deep tail") {
  CHECK(sp::log_norm_cdf(-5.0) ==
        doctest::Approx(-15.0649983939887257361).epsilon(1e-13));
  CHECK(sp::log_norm_cdf(-30.0) ==
        doctest::Approx(-454.321243956343197107).epsilon(1e-13));
  CHECK(sp::log_norm_cdf(-100.0) ==
        doctest::Approx(-5005.52420869420508863).epsilon(1e-13));
  CHECK(sp::log_norm_cdf(1.0) ==
        doctest::Approx(std::log(0.841344746068542948585)).epsilon(1e-14));
}

TEST_CASE("gamma and beta helpers") {
  CHECK(sp::log_gamma(0.5) ==
        doctest::Approx(0.572364942924700087072).epsilon(1e-14));
  CHECK(sp::log_gamma(7.3) ==
        doctest::Approx(7.14789252302224869210).epsilon(1e-14));
  CHECK(sp::gamma_fn(4.5) ==
        doctest::Approx(11.6317283965674489291).epsilon(1e-14));
  CHECK(sp::log_beta(0.30959, 0.59326) ==
        doctest::Approx(1.40722931235022882537).epsilon(1e-13));
  CHECK(sp::reg_inc_beta(2.0, 3.0, 0.4) ==
        doctest::Approx(0.5248).epsilon(1e-13));
  CHECK(sp::reg_inc_beta(0.30959, 0.59326, 0.2) ==
        doctest::Approx(0.490542855342973680886).epsilon(1e-13));
  CHECK(sp::reg_inc_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(sp::reg_inc_beta(2.0, 3.0, 1.0) == 1.0);
}
