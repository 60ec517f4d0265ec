#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <doctest.h>

#include "epicap/contract.hpp"
#include "epicap/error.hpp"
#include "epicap/rng.hpp"

using namespace epicap;

namespace {

/// Scalar contract paying theta * 1e9 between 0.001 and 0.003.
ContractSpec scalar_contract() {
  ContractSpec spec;
  spec.variant = ContractVariant::ScalarBarrier;
  spec.event_params = {"xi"};
  spec.trigger = {0.001};
  spec.barrier = {0.003};
  spec.loss.knots = {{{0.0, 0.0}, {0.004, 4.0e6}}};
  spec.loss.statistical_death_value = 1.0e6;
  return spec;
}

ContractSpec vector_contract(ExceedanceRule rule) {
  ContractSpec spec;
  spec.variant = ContractVariant::VectorBarrier;
  spec.rule = rule;
  spec.event_params = {"mu_s", "mu_d"};
  spec.trigger = {1.0, 10.0};
  spec.barrier = {2.0, 20.0};
  spec.loss.knots = {{{1.0, 0.0}, {2.0, 5.0e6}},
                     {{10.0, 0.0}, {20.0, 2.0e6}}};
  return spec;
}

ContractSpec random_contract(UniformStream& u) {
  ContractSpec spec;
  bool vec = u.next() < 0.5;
  spec.variant =
      vec ? ContractVariant::VectorBarrier : ContractVariant::ScalarBarrier;
  spec.rule = u.next() < 0.5 ? ExceedanceRule::AnyComponent
                             : ExceedanceRule::AllComponents;
  spec.event_params =
      vec ? std::vector<std::string>{"mu_s", "mu_d"}
          : std::vector<std::string>{"xi"};
  for (std::size_t c = 0; c < spec.event_params.size(); ++c) {
    double t = u.next();
    spec.trigger.push_back(t);
    spec.barrier.push_back(t + 0.2 + u.next());
    std::vector<std::array<double, 2>> ks;
    double x = -0.5, v = 0.0;
    int nk = 2 + static_cast<int>(u.next() * 3);
    for (int i = 0; i < nk; ++i) {
      ks.push_back({x, v});
      x += 0.3 + u.next();
      v += u.next() * 1.0e6;
    }
    spec.loss.knots.push_back(std::move(ks));
  }
  return spec;
}

}  // namespace

TEST_CASE("piecewise linear losses interpolate, clamp and extrapolate") {
  auto spec = scalar_contract();
  CHECK(spec.loss({0.002}) == doctest::Approx(2.0e6).epsilon(1e-12));
  CHECK(spec.loss({-1.0}) == 0.0);           // flat before the first knot
  CHECK(spec.loss({0.005}) ==                // final slope continues
        doctest::Approx(5.0e6).epsilon(1e-12));

  LossMap two;
  two.knots = {{{0.0, 0.0}, {1.0, 10.0}, {2.0, 12.0}},
               {{0.0, 1.0}, {4.0, 5.0}}};
  CHECK(two({1.5, 2.0}) == doctest::Approx(11.0 + 3.0).epsilon(1e-12));
}

TEST_CASE("trigger and barrier boundaries are closed") {
  auto spec = scalar_contract();
  CHECK(evaluate_trigger(spec, {0.0005}) == TriggerState::NotTriggered);
  CHECK(evaluate_trigger(spec, {0.001}) == TriggerState::Triggered);
  CHECK(evaluate_trigger(spec, {0.002}) == TriggerState::Triggered);
  CHECK(evaluate_trigger(spec, {0.003}) == TriggerState::CapExceeded);
  CHECK(evaluate_trigger(spec, {0.01}) == TriggerState::CapExceeded);
}

TEST_CASE("payout follows the trigger state") {
  auto spec = scalar_contract();
  auto below = payout(spec, {0.0005});
  CHECK(!below.triggered);
  CHECK(below.amount == 0.0);

  auto mid = payout(spec, {0.002});
  CHECK(mid.triggered);
  CHECK(!mid.capped);
  CHECK(mid.amount == doctest::Approx(2.0e6).epsilon(1e-12));

  auto at_trigger = payout(spec, {0.001});
  CHECK(at_trigger.triggered);
  CHECK(at_trigger.amount == doctest::Approx(1.0e6).epsilon(1e-12));

  auto capped = payout(spec, {0.01});
  CHECK(capped.capped);
  CHECK(capped.amount == doctest::Approx(3.0e6).epsilon(1e-12));
  CHECK(capped.evaluated_at == spec.barrier);
}

TEST_CASE("exceedance rules differ on mixed vectors") {
  auto any = vector_contract(ExceedanceRule::AnyComponent);
  auto all = vector_contract(ExceedanceRule::AllComponents);

  // One component past its barrier, the other below its trigger.
  CHECK(evaluate_trigger(any, {3.0, 5.0}) == TriggerState::CapExceeded);
  CHECK(payout(any, {3.0, 5.0}).amount == any.loss(any.barrier));
  CHECK(evaluate_trigger(all, {3.0, 5.0}) == TriggerState::NotTriggered);

  CHECK(evaluate_trigger(any, {1.5, 15.0}) == TriggerState::Triggered);
  CHECK(evaluate_trigger(all, {1.5, 15.0}) == TriggerState::Triggered);
  CHECK(evaluate_trigger(all, {3.0, 25.0}) == TriggerState::CapExceeded);
  CHECK(evaluate_trigger(all, {0.5, 5.0}) == TriggerState::NotTriggered);

  // Partial exceedance under AllComponents pays at the clamped point.
  auto partial = payout(all, {5.0, 15.0});
  CHECK(partial.triggered);
  CHECK(!partial.capped);
  CHECK(partial.evaluated_at == std::vector<double>{2.0, 15.0});
  CHECK(partial.amount == all.loss({2.0, 15.0}));
}

TEST_CASE("payouts are monotone, bounded and cap idempotent") {
  UniformStream u(424242);
  for (int rep = 0; rep < 2000; ++rep) {
    auto spec = random_contract(u);
    std::size_t k = spec.event_params.size();
    std::vector<double> lo(k), hi(k);
    for (std::size_t c = 0; c < k; ++c) {
      lo[c] = -1.0 + u.next() * (spec.barrier[c] + 2.0);
      hi[c] = lo[c] + u.next() * 2.0;
    }
    auto pl = payout(spec, lo), ph = payout(spec, hi);
    double cap = spec.loss(spec.barrier);
    double tol = 1e-9 * (1.0 + cap);
    CHECK(pl.amount <= ph.amount + tol);
    CHECK(pl.amount >= 0.0);
    CHECK(ph.amount >= 0.0);
    CHECK(pl.amount <= cap + tol);
    CHECK(ph.amount <= cap + tol);
    if (pl.triggered) {
      auto clamped = lo;
      for (std::size_t c = 0; c < k; ++c)
        clamped[c] = std::min(lo[c], spec.barrier[c]);
      CHECK(payout(spec, clamped).amount == pl.amount);
    }
  }
}

TEST_CASE("uniform event parameters price to the hand integral") {
  auto spec = scalar_contract();
  std::vector<Distribution> comps{
      {DistributionId::Beta4, {1.0, 1.0, 0.0, 0.004}}};
  auto mc = expected_payout_mc(spec, comps, 100000, 99);
  CHECK(mc.n == 100000);
  CHECK(mc.std_error > 0.0);
  CHECK(std::abs(mc.estimate - 1.75e6) <= 3.0 * mc.std_error);
}

TEST_CASE("point mass components price exactly") {
  auto spec = scalar_contract();
  std::vector<Distribution> comps{{DistributionId::PointMass, {0.002}}};
  auto mc = expected_payout_mc(spec, comps, 5000, 7);
  CHECK(mc.estimate == payout(spec, {0.002}).amount);
  CHECK(mc.std_error == 0.0);
}

TEST_CASE("pricing is independent of the worker count") {
  auto spec = vector_contract(ExceedanceRule::AnyComponent);
  std::vector<Distribution> comps{
      {DistributionId::Normal, {1.2, 0.5}},
      {DistributionId::Weibull3, {1.5, 6.0, 8.0}}};
  auto a = expected_payout_mc(spec, comps, 20000, 31, 1);
  auto b = expected_payout_mc(spec, comps, 20000, 31, 7);
  CHECK(a.estimate == b.estimate);
  CHECK(a.std_error == b.std_error);
  auto c = expected_payout_mc(spec, comps, 20000, 31);
  CHECK(c.estimate == a.estimate);
}

TEST_CASE("standard errors shrink like the square root of the draw count") {
  auto spec = scalar_contract();
  std::vector<Distribution> comps{
      {DistributionId::Beta4, {1.0, 1.0, 0.0, 0.004}}};
  double r2 = 0.0, r4 = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    auto base = expected_payout_mc(spec, comps, 400, mix_seed(5, rep));
    auto twice = expected_payout_mc(spec, comps, 800, mix_seed(6, rep));
    auto quad = expected_payout_mc(spec, comps, 1600, mix_seed(7, rep));
    r2 += twice.std_error / base.std_error;
    r4 += quad.std_error / base.std_error;
  }
  r2 /= 50.0;
  r4 /= 50.0;
  CHECK(r2 == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.2));
  CHECK(r4 == doctest::Approx(0.5).epsilon(0.2));
}

TEST_CASE("expected shortfall averages the worst tail") {
  std::vector<double> ladder(100);
  std::iota(ladder.begin(), ladder.end(), 1.0);
  CHECK(expected_shortfall(ladder, 0.95) == 98.0);
  CHECK(expected_shortfall(ladder, 0.99) == 100.0);
  CHECK(expected_shortfall(ladder, 0.0) == 50.5);
  CHECK(expected_shortfall({7.0, 7.0, 7.0}, 0.5) == 7.0);

  UniformStream u(88);
  std::vector<double> sample;
  for (int i = 0; i < 500; ++i) sample.push_back(u.next() * 100.0);
  double mean = std::accumulate(sample.begin(), sample.end(), 0.0) / 500.0;
  double prev = 0.0;
  for (double level : {0.0, 0.5, 0.9, 0.95, 0.99}) {
    double es = expected_shortfall(sample, level);
    CHECK(es >= mean - 1e-9);
    CHECK(es >= prev - 1e-9);
    prev = es;
  }

  try {
    expected_shortfall({}, 0.95);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == "contract.empty_samples");
  }
  try {
    expected_shortfall(ladder, 1.0);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == "contract.bad_level");
  }
  try {
    expected_shortfall(ladder, -0.1);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == "contract.bad_level");
  }
}

TEST_CASE("contract specs survive a json round trip") {
  auto spec = vector_contract(ExceedanceRule::AllComponents);
  spec.loss.statistical_death_value = 2.5e5;
  spec.currency = "EUR";
  auto j = spec.to_json();
  auto back = ContractSpec::from_json(j);
  CHECK(back.to_json() == j);
  CHECK(back.rule == ExceedanceRule::AllComponents);
  CHECK(back.trigger == spec.trigger);
  CHECK(back.barrier == spec.barrier);
  CHECK(back.loss.knots == spec.loss.knots);
  CHECK(back.currency == "EUR");
}

TEST_CASE("invalid specs and inputs are refused") {
  auto spec = scalar_contract();
  spec.trigger = {0.005};  // above the barrier
  try {
    spec.validate();
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == "contract.bad_spec");
  }

  auto j = scalar_contract().to_json();
  j["loss_map"]["knots"]["xi"] = {{0.0, 5.0}, {1.0, 1.0}};  // decreasing money
  try {
    ContractSpec::from_json(j);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == "contract.bad_spec");
  }
  j.erase("trigger");
  try {
    ContractSpec::from_json(j);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == "contract.bad_json");
  }

  auto good = scalar_contract();
  try {
    evaluate_trigger(good, {0.001, 0.002});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == "contract.shape_mismatch");
  }
  try {
    expected_payout_mc(good, {{DistributionId::Normal, {0.0, -1.0}}}, 1000, 1);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == "contract.bad_component");
  }
  try {
    expected_payout_mc(good, {{DistributionId::PointMass, {0.002}}}, 50, 1);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == "contract.too_few_draws");
  }
}

TEST_CASE("pricing reports carry the simulation and its tail averages") {
  auto spec = scalar_contract();
  std::vector<Distribution> comps{
      {DistributionId::Beta4, {1.0, 1.0, 0.0, 0.004}}};
  auto mc = expected_payout_mc(spec, comps, 20000, 12);
  auto report = pricing_report(spec, comps, 20000, 12);
  CHECK(report["estimate"].get<double>() == mc.estimate);
  CHECK(report["std_error"].get<double>() == mc.std_error);
  CHECK(report["n"] == 20000);
  CHECK(report["seed"] == 12);
  CHECK(report["currency"] == "USD");
  CHECK(report["independent_components"] == true);
  REQUIRE(report["es_levels"].contains("0.95"));
  REQUIRE(report["es_levels"].contains("0.99"));
  double es95 = report["es_levels"]["0.95"].get<double>();
  double es99 = report["es_levels"]["0.99"].get<double>();
  CHECK(es95 >= mc.estimate);
  CHECK(es99 >= es95);
  CHECK(es99 <= spec.loss(spec.barrier) + 1e-9);
  CHECK(report["components"][0]["event_param"] == "xi");
  CHECK(report["components"][0]["family"] == "Beta4");
}
