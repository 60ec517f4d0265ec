#include <algorithm>
#include <cmath>
#include <vector>

#include <doctest.h>

#include "epicap/error.hpp"
#include "epicap/meta.hpp"
#include "epicap/rng.hpp"
#include "test_util.hpp"

using namespace epicap;

namespace {

ParameterTrace synthetic_trace(DistributionId id, std::size_t days,
                               std::uint64_t seed) {
  ParameterTrace tr;
  tr.id = id;
  UniformStream u(seed);
  Date d0 = Date::parse("2020-01-24");
  for (std::size_t i = 0; i < days; ++i) {
    tr.days.push_back(d0 + static_cast<int>(i));
    std::vector<double> row;
    for (std::size_t j = 0; j < param_count(id); ++j)
      row.push_back(0.2 + j + 0.6 * u.next());
    tr.values.push_back(std::move(row));
    tr.converged.push_back(true);
  }
  return tr;
}

}  // namespace

TEST_CASE("trace statistics match direct moment computation") {
  auto tr = synthetic_trace(DistributionId::GEV, 40, 11);
  auto table = trace_stats(tr);
  REQUIRE(table.rows.size() == 3);
  CHECK(table.id == DistributionId::GEV);
  CHECK(table.excluded_days == 0);
  CHECK(table.rows[0].first == "k");
  CHECK(table.rows[1].first == "sigma");
  CHECK(table.rows[2].first == "mu");

  for (std::size_t j = 0; j < 3; ++j) {
    std::vector<double> col;
    for (const auto& v : tr.values) col.push_back(v[j]);
    std::sort(col.begin(), col.end());
    double n = static_cast<double>(col.size());
    double mean = 0;
    for (double x : col) mean += x;
    mean /= n;
    double m2 = 0, m3 = 0, m4 = 0;
    for (double x : col) {
      double d = x - mean;
      m2 += d * d;
      m3 += d * d * d;
      m4 += d * d * d * d;
    }
    double sd = std::sqrt(m2 / (n - 1));
    double g1 = (m3 / n) / std::pow(m2 / n, 1.5);
    double skew = std::sqrt(n * (n - 1)) / (n - 2) * g1;
    double g2 = (m4 / n) / ((m2 / n) * (m2 / n)) - 3.0;
    double kurt =
        (n - 1) / ((n - 2) * (n - 3)) * ((n + 1) * g2 + 6.0);

    const auto& row = table.rows[j].second;
    CHECK(row.n == 40);
    CHECK(row.mean == doctest::Approx(mean).epsilon(1e-12));
    CHECK(row.sd == doctest::Approx(sd).epsilon(1e-12));
    CHECK(row.median ==
          doctest::Approx(0.5 * (col[19] + col[20])).epsilon(1e-12));
    CHECK(row.min == col.front());
    CHECK(row.max == col.back());
    REQUIRE(row.skewness.has_value());
    CHECK(*row.skewness == doctest::Approx(skew).epsilon(1e-10));
    REQUIRE(row.excess_kurtosis.has_value());
    CHECK(*row.excess_kurtosis == doctest::Approx(kurt).epsilon(1e-10));
  }
}

TEST_CASE("constant traces report undefined shape statistics") {
  ParameterTrace tr;
  tr.id = DistributionId::Normal;
  Date d0 = Date::parse("2020-02-01");
  for (int i = 0; i < 6; ++i) {
    tr.days.push_back(d0 + i);
    tr.values.push_back({0.4, 0.1});
    tr.converged.push_back(true);
  }
  auto table = trace_stats(tr);
  const auto& mu = table.rows[0].second;
  CHECK(mu.sd == 0.0);
  CHECK(mu.mean == 0.4);
  CHECK(!mu.skewness.has_value());
  CHECK(!mu.excess_kurtosis.has_value());
}

TEST_CASE("short traces are rejected") {
  auto tr = synthetic_trace(DistributionId::Normal, 3, 5);
  try {
    trace_stats(tr);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == "meta.too_few_days");
  }
  FitOptions opt;
  try {
    fit_parameter_distribution(tr, "mu", default_catalog(), opt);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == "meta.too_few_days");
  }
}

TEST_CASE("failed first-stage days are carried as an exclusion count") {
  auto tr = synthetic_trace(DistributionId::Normal, 8, 21);
  tr.failures = {Date::parse("2020-03-01"), Date::parse("2020-03-02")};
  CHECK(trace_stats(tr).excluded_days == 2);
}

TEST_CASE("parameter series fits rank the catalog on the column") {
  auto tr = synthetic_trace(DistributionId::GEV, 45, 33);
  FitOptions opt;
  opt.restarts = 2;
  std::vector<DistributionId> catalog{
      DistributionId::Normal, DistributionId::Weibull3,
      DistributionId::HyperbolicSecant, DistributionId::GeneralizedPareto};
  auto fit = fit_parameter_distribution(tr, "sigma", catalog, opt);
  CHECK(fit.param == "sigma");
  REQUIRE(!fit.ranked.empty());
  CHECK(fit.ranked.size() <= 3);
  CHECK(fit.best.id == fit.ranked[0].id);
  CHECK(fit.best.params == fit.ranked[0].params);
  for (std::size_t i = 1; i < fit.ranked.size(); ++i) {
    if (fit.ranked[i - 1].converged == fit.ranked[i].converged)
      CHECK(fit.ranked[i - 1].ks <= fit.ranked[i].ks);
  }
  // The winner beats every converged rival on the same series.
  std::vector<double> col;
  for (const auto& v : tr.values) col.push_back(v[1]);
  for (auto id : catalog) {
    FitResult rival;
    try {
      rival = fit_mle(id, col, opt);
    } catch (const Error&) {
      continue;
    }
    if (rival.converged && fit.best.converged)
      CHECK(fit.best.ks <= rival.ks + 1e-15);
  }

  try {
    fit_parameter_distribution(tr, "alpha", catalog, opt);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == "meta.unknown_parameter");
  }
}

TEST_CASE("day order does not matter to either meta output") {
  auto tr = synthetic_trace(DistributionId::Normal, 24, 99);
  auto shuffled = tr;
  UniformStream u(3);
  for (std::size_t i = shuffled.values.size(); i > 1; --i) {
    auto k = static_cast<std::size_t>(u.next() * i);
    std::swap(shuffled.values[i - 1], shuffled.values[k]);
    std::swap(shuffled.days[i - 1], shuffled.days[k]);
  }
  auto a = trace_stats(tr), b = trace_stats(shuffled);
  for (std::size_t j = 0; j < a.rows.size(); ++j) {
    CHECK(a.rows[j].second.mean == b.rows[j].second.mean);
    CHECK(a.rows[j].second.sd == b.rows[j].second.sd);
    CHECK(a.rows[j].second.median == b.rows[j].second.median);
  }
  FitOptions opt;
  opt.restarts = 2;
  std::vector<DistributionId> catalog{DistributionId::Normal,
                                      DistributionId::HyperbolicSecant};
  auto fa = fit_parameter_distribution(tr, "mu", catalog, opt);
  auto fb = fit_parameter_distribution(shuffled, "mu", catalog, opt);
  CHECK(fa.best.id == fb.best.id);
  CHECK(fa.best.params == fb.best.params);
  CHECK(fa.best.ks == fb.best.ks);
}

TEST_CASE("trace stats csv lays out one row per parameter") {
  auto tr = synthetic_trace(DistributionId::GEV, 12, 44);
  testutil::TempDir dir;
  auto path = dir.file("stats.csv");
  write_trace_stats_csv(trace_stats(tr), path);
  auto text = testutil::read_file(path);
  auto first_line = text.substr(0, text.find('\n'));
  CHECK(first_line == "param,mean,sd,median,min,max,skewness,kurtosis");
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
  CHECK(text.find("\nk,") != std::string::npos);
  CHECK(text.find("\nsigma,") != std::string::npos);
  CHECK(text.find("\nmu,") != std::string::npos);
}

TEST_CASE("parameter fit serialization carries best and ranked") {
  auto tr = synthetic_trace(DistributionId::Normal, 20, 7);
  FitOptions opt;
  opt.restarts = 2;
  std::vector<DistributionId> catalog{DistributionId::Normal,
                                      DistributionId::HyperbolicSecant};
  auto fit = fit_parameter_distribution(tr, "sigma", catalog, opt);
  auto j = parameter_fit_to_json(fit);
  CHECK(j["param"] == "sigma");
  CHECK(j["best"]["family"] == std::string(family_name(fit.best.id)));
  CHECK(j["best"]["ks"] == fit.best.ks);
  REQUIRE(j["ranked"].is_array());
  CHECK(j["ranked"].size() == fit.ranked.size());
  CHECK(j["ranked"][0] == j["best"]);
}
