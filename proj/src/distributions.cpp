#include "epicap/distributions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "epicap/error.hpp"
#include "epicap/special.hpp"

namespace epicap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLn2Pi = 1.8378770664093453;  // ln(2*pi)

/// ln(1 + e^t) without overflow.
double log1pexp(double t) {
  if (t > 36.0) return t;
  return std::log1p(std::exp(t));
}

struct FamilyInfo {
  DistributionId id;
  std::string_view name;
  std::vector<std::string> params;
};

const std::array<FamilyInfo, 10>& families() {
  static const std::array<FamilyInfo, 10> table = {{
      {DistributionId::GEV, "GEV", {"k", "sigma", "mu"}},
      {DistributionId::Normal, "Normal", {"mu", "sigma"}},
      {DistributionId::JohnsonSB, "JohnsonSB", {"gamma", "delta", "lambda", "xi"}},
      {DistributionId::Beta4, "Beta4", {"alpha1", "alpha2", "a", "b"}},
      {DistributionId::Burr4, "Burr4", {"k", "alpha", "beta", "gamma"}},
      {DistributionId::InverseGaussian3, "InverseGaussian3", {"lambda", "mu", "gamma"}},
      {DistributionId::GeneralizedPareto, "GeneralizedPareto", {"k", "sigma", "mu"}},
      {DistributionId::Weibull3, "Weibull3", {"alpha", "beta", "gamma"}},
      {DistributionId::HyperbolicSecant, "HyperbolicSecant", {"mu", "sigma"}},
      {DistributionId::PointMass, "PointMass", {"mu"}},
  }};
  return table;
}

const FamilyInfo& info(DistributionId id) {
  for (const auto& f : families())
    if (f.id == id) return f;
  throw Error("dist.unknown_family", "unknown distribution id");
}

[[noreturn]] void bad_params(DistributionId id, const std::string& why) {
  throw Error("dist.invalid_params",
              std::string(family_name(id)) + ": " + why);
}

void require_positive(DistributionId id, const std::string& name, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) bad_params(id, name + " must be > 0");
}

void require_finite(DistributionId id, const std::string& name, double v) {
  if (!std::isfinite(v)) bad_params(id, name + " must be finite");
}

}  // namespace

std::string_view family_name(DistributionId id) { return info(id).name; }

DistributionId family_from_name(std::string_view name) {
  for (const auto& f : families())
    if (f.name == name) return f.id;
  throw Error("dist.unknown_family",
              "unknown distribution family '" + std::string(name) + "'");
}

const std::vector<std::string>& param_names(DistributionId id) {
  return info(id).params;
}

std::size_t param_count(DistributionId id) { return info(id).params.size(); }

const std::vector<DistributionId>& default_catalog() {
  static const std::vector<DistributionId> cat = {
      DistributionId::GEV,
      DistributionId::Normal,
      DistributionId::JohnsonSB,
      DistributionId::Beta4,
      DistributionId::Burr4,
      DistributionId::InverseGaussian3,
      DistributionId::GeneralizedPareto,
      DistributionId::Weibull3,
      DistributionId::HyperbolicSecant,
  };
  return cat;
}

void validate_params(const Distribution& d) {
  const auto& p = d.params;
  if (p.size() != param_count(d.id))
    bad_params(d.id, "expected " + std::to_string(param_count(d.id)) +
                         " parameters, got " + std::to_string(p.size()));
  for (std::size_t i = 0; i < p.size(); ++i)
    require_finite(d.id, param_names(d.id)[i], p[i]);
  switch (d.id) {
    case DistributionId::GEV:
    case DistributionId::GeneralizedPareto:
      require_positive(d.id, "sigma", p[1]);
      break;
    case DistributionId::Normal:
    case DistributionId::HyperbolicSecant:
      require_positive(d.id, "sigma", p[1]);
      break;
    case DistributionId::JohnsonSB:
      require_positive(d.id, "delta", p[1]);
      require_positive(d.id, "lambda", p[2]);
      break;
    case DistributionId::Beta4:
      require_positive(d.id, "alpha1", p[0]);
      require_positive(d.id, "alpha2", p[1]);
      if (!(p[2] < p[3])) bad_params(d.id, "requires a < b");
      break;
    case DistributionId::Burr4:
      require_positive(d.id, "k", p[0]);
      require_positive(d.id, "alpha", p[1]);
      require_positive(d.id, "beta", p[2]);
      break;
    case DistributionId::InverseGaussian3:
      require_positive(d.id, "lambda", p[0]);
      require_positive(d.id, "mu", p[1]);
      break;
    case DistributionId::Weibull3:
      require_positive(d.id, "alpha", p[0]);
      require_positive(d.id, "beta", p[1]);
      break;
    case DistributionId::PointMass:
      break;
  }
}

Support support(const Distribution& d) {
  const auto& p = d.params;
  switch (d.id) {
    case DistributionId::GEV: {
      double k = p[0], sigma = p[1], mu = p[2];
      if (k > 0.0) return {mu - sigma / k, kInf};
      if (k < 0.0) return {kNegInf, mu - sigma / k};
      return {kNegInf, kInf};
    }
    case DistributionId::Normal:
    case DistributionId::HyperbolicSecant:
      return {kNegInf, kInf};
    case DistributionId::JohnsonSB:
      return {p[3], p[3] + p[2]};
    case DistributionId::Beta4:
      return {p[2], p[3]};
    case DistributionId::Burr4:
      return {p[3], kInf};
    case DistributionId::InverseGaussian3:
      return {p[2], kInf};
    case DistributionId::GeneralizedPareto: {
      double k = p[0], sigma = p[1], mu = p[2];
      if (k < 0.0) return {mu, mu - sigma / k};
      return {mu, kInf};
    }
    case DistributionId::Weibull3:
      return {p[2], kInf};
    case DistributionId::PointMass:
      return {p[0], p[0]};
  }
  throw Error("dist.unknown_family", "unknown distribution id");
}

double log_pdf(const Distribution& d, double x) {
  const auto& p = d.params;
  switch (d.id) {
    case DistributionId::GEV: {
      double k = p[0], sigma = p[1], mu = p[2];
      double z = (x - mu) / sigma;
      if (k == 0.0) return -std::log(sigma) - z - std::exp(-z);
      double w = k * z;
      if (1.0 + w <= 0.0) return kNegInf;
      double lnt = -std::log1p(w) / k;
      return -std::log(sigma) + (k + 1.0) * lnt - std::exp(lnt);
    }
    case DistributionId::Normal: {
      double mu = p[0], sigma = p[1];
      double z = (x - mu) / sigma;
      return -0.5 * z * z - std::log(sigma) - 0.5 * kLn2Pi;
    }
    case DistributionId::JohnsonSB: {
      double g = p[0], delta = p[1], lambda = p[2], xi = p[3];
      double z = (x - xi) / lambda;
      if (z <= 0.0 || z >= 1.0) return kNegInf;
      double u = g + delta * std::log(z / (1.0 - z));
      return std::log(delta) - std::log(lambda) - 0.5 * kLn2Pi -
             std::log(z) - std::log1p(-z) - 0.5 * u * u;
    }
    case DistributionId::Beta4: {
      double a1 = p[0], a2 = p[1], a = p[2], b = p[3];
      double z = (x - a) / (b - a);
      if (z < 0.0 || z > 1.0) return kNegInf;
      double base = -special::log_beta(a1, a2) - std::log(b - a);
      if (z == 0.0)
        return a1 < 1.0 ? kInf : (a1 == 1.0 ? base : kNegInf);
      if (z == 1.0)
        return a2 < 1.0 ? kInf : (a2 == 1.0 ? base : kNegInf);
      return (a1 - 1.0) * std::log(z) + (a2 - 1.0) * std::log1p(-z) + base;
    }
    case DistributionId::Burr4: {
      double k = p[0], alpha = p[1], beta = p[2], gamma = p[3];
      double y = (x - gamma) / beta;
      if (y < 0.0) return kNegInf;
      double base = std::log(alpha) + std::log(k) - std::log(beta);
      if (y == 0.0)
        return alpha < 1.0 ? kInf : (alpha == 1.0 ? base : kNegInf);
      double lny = std::log(y);
      return base + (alpha - 1.0) * lny - (k + 1.0) * log1pexp(alpha * lny);
    }
    case DistributionId::InverseGaussian3: {
      double lambda = p[0], mu = p[1], gamma = p[2];
      double y = x - gamma;
      if (y <= 0.0) return kNegInf;
      double dev = y - mu;
      return 0.5 * (std::log(lambda) - kLn2Pi - 3.0 * std::log(y)) -
             lambda * dev * dev / (2.0 * mu * mu * y);
    }
    case DistributionId::GeneralizedPareto: {
      double k = p[0], sigma = p[1], mu = p[2];
      double z = (x - mu) / sigma;
      if (z < 0.0) return kNegInf;
      if (k == 0.0) return -std::log(sigma) - z;
      double w = k * z;
      if (1.0 + w <= 0.0) return kNegInf;
      return -std::log(sigma) - (1.0 + 1.0 / k) * std::log1p(w);
    }
    case DistributionId::Weibull3: {
      double alpha = p[0], beta = p[1], gamma = p[2];
      double y = (x - gamma) / beta;
      if (y < 0.0) return kNegInf;
      double base = std::log(alpha) - std::log(beta);
      if (y == 0.0)
        return alpha < 1.0 ? kInf : (alpha == 1.0 ? base : kNegInf);
      double lny = std::log(y);
      return base + (alpha - 1.0) * lny - std::exp(alpha * lny);
    }
    case DistributionId::HyperbolicSecant: {
      double mu = p[0], sigma = p[1];
      double w = M_PI * (x - mu) / (2.0 * sigma);
      double aw = std::fabs(w);
      // ln sech(w) = ln 2 - |w| - ln(1 + e^{-2|w|})
      return -std::log(2.0 * sigma) + std::log(2.0) - aw -
             std::log1p(std::exp(-2.0 * aw));
    }
    case DistributionId::PointMass:
      return x == p[0] ? kInf : kNegInf;
  }
  throw Error("dist.unknown_family", "unknown distribution id");
}

double pdf(const Distribution& d, double x) {
  double lp = log_pdf(d, x);
  if (lp == kInf) return kInf;
  return std::exp(lp);
}

double cdf(const Distribution& d, double x) {
  const auto& p = d.params;
  switch (d.id) {
    case DistributionId::GEV: {
      double k = p[0], sigma = p[1], mu = p[2];
      double z = (x - mu) / sigma;
      if (k == 0.0) return std::exp(-std::exp(-z));
      double w = k * z;
      if (1.0 + w <= 0.0) return k > 0.0 ? 0.0 : 1.0;
      return std::exp(-std::exp(-std::log1p(w) / k));
    }
    case DistributionId::Normal:
      return special::norm_cdf((x - p[0]) / p[1]);
    case DistributionId::JohnsonSB: {
      double g = p[0], delta = p[1], lambda = p[2], xi = p[3];
      double z = (x - xi) / lambda;
      if (z <= 0.0) return 0.0;
      if (z >= 1.0) return 1.0;
      return special::norm_cdf(g + delta * std::log(z / (1.0 - z)));
    }
    case DistributionId::Beta4: {
      double z = (x - p[2]) / (p[3] - p[2]);
      return special::reg_inc_beta(p[0], p[1], std::clamp(z, 0.0, 1.0));
    }
    case DistributionId::Burr4: {
      double k = p[0], alpha = p[1], beta = p[2], gamma = p[3];
      double y = (x - gamma) / beta;
      if (y <= 0.0) return 0.0;
      return -std::expm1(-k * log1pexp(alpha * std::log(y)));
    }
    case DistributionId::InverseGaussian3: {
      double lambda = p[0], mu = p[1], gamma = p[2];
      double y = x - gamma;
      if (y <= 0.0) return 0.0;
      double r = std::sqrt(lambda / y);
      double s1 = r * (y / mu - 1.0);
      double s2 = -r * (y / mu + 1.0);
      double tail = 2.0 * lambda / mu + special::log_norm_cdf(s2);
      double F = special::norm_cdf(s1) +
                 (tail < -745.0 ? 0.0 : std::exp(tail));
      return std::clamp(F, 0.0, 1.0);
    }
    case DistributionId::GeneralizedPareto: {
      double k = p[0], sigma = p[1], mu = p[2];
      double z = (x - mu) / sigma;
      if (z <= 0.0) return 0.0;
      if (k == 0.0) return -std::expm1(-z);
      double w = k * z;
      if (1.0 + w <= 0.0) return 1.0;  // beyond the upper endpoint when k < 0
      return -std::expm1(-std::log1p(w) / k);
    }
    case DistributionId::Weibull3: {
      double alpha = p[0], beta = p[1], gamma = p[2];
      double y = (x - gamma) / beta;
      if (y <= 0.0) return 0.0;
      return -std::expm1(-std::exp(alpha * std::log(y)));
    }
    case DistributionId::HyperbolicSecant: {
      double w = M_PI * (x - p[0]) / (2.0 * p[1]);
      if (w > 0.0) return 1.0 - M_2_PI * std::atan(std::exp(-w));
      return M_2_PI * std::atan(std::exp(w));
    }
    case DistributionId::PointMass:
      return x < p[0] ? 0.0 : 1.0;
  }
  throw Error("dist.unknown_family", "unknown distribution id");
}

namespace {

/// Bracketed bisection with safeguarded Newton refinement; stops when
/// |cdf(x) - q| <= 1e-12 or the bracket degenerates.
double numeric_quantile(const Distribution& d, double q) {
  constexpr double kProbTol = 1e-12;
  Support sp = support(d);
  double lo = sp.lo, hi = sp.hi;
  if (!std::isfinite(hi)) {
    // Expand upward from the finite lower end until the bracket covers q.
    double scale = 1.0;
    if (d.id == DistributionId::InverseGaussian3)
      scale = d.params[1];  // mean offset
    double step = std::max(scale, 1e-300);
    hi = lo + step;
    while (cdf(d, hi) < q && std::isfinite(hi)) {
      step *= 2.0;
      hi = lo + step;
    }
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    double c = cdf(d, x);
    if (std::fabs(c - q) <= kProbTol) return x;
    if (c < q)
      lo = x;
    else
      hi = x;
    if (!(hi - lo > 0.0)) return x;
    // Newton step from the current iterate, kept inside the bracket.
    double f = pdf(d, x);
    double nx = (std::isfinite(f) && f > 0.0) ? x - (c - q) / f : x;
    if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
    if (nx == x) nx = 0.5 * (lo + hi);
    x = nx;
  }
  return x;
}

}  // namespace

double quantile(const Distribution& d, double q) {
  if (!(q > 0.0 && q < 1.0))
    throw Error("dist.quantile_domain", "quantile needs q in (0,1)");
  const auto& p = d.params;
  switch (d.id) {
    case DistributionId::GEV: {
      double k = p[0], sigma = p[1], mu = p[2];
      double ll = std::log(-std::log(q));
      if (k == 0.0) return mu - sigma * ll;
      return mu + sigma * std::expm1(-k * ll) / k;
    }
    case DistributionId::Normal:
      return p[0] + p[1] * special::norm_quantile(q);
    case DistributionId::JohnsonSB: {
      double v = (special::norm_quantile(q) - p[0]) / p[1];
      double z = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v))
                          : std::exp(v) / (1.0 + std::exp(v));
      return p[3] + p[2] * z;
    }
    case DistributionId::Beta4:
    case DistributionId::InverseGaussian3:
      return numeric_quantile(d, q);
    case DistributionId::Burr4: {
      double k = p[0], alpha = p[1], beta = p[2], gamma = p[3];
      double A = -std::log1p(-q) / k;           // (1+y^alpha) = e^A
      double lnya = std::log(std::expm1(A));    // ln(y^alpha)
      return gamma + beta * std::exp(lnya / alpha);
    }
    case DistributionId::GeneralizedPareto: {
      double k = p[0], sigma = p[1], mu = p[2];
      double l = std::log1p(-q);
      if (k == 0.0) return mu - sigma * l;
      return mu + sigma * std::expm1(-k * l) / k;
    }
    case DistributionId::Weibull3: {
      double alpha = p[0], beta = p[1], gamma = p[2];
      return gamma + beta * std::exp(std::log(-std::log1p(-q)) / alpha);
    }
    case DistributionId::HyperbolicSecant: {
      double mu = p[0], sigma = p[1];
      // Symmetric branches keep tail quantiles accurate.
      if (q <= 0.5)
        return mu + sigma * M_2_PI * std::log(std::tan(M_PI_2 * q));
      return mu - sigma * M_2_PI * std::log(std::tan(M_PI_2 * (1.0 - q)));
    }
    case DistributionId::PointMass:
      return p[0];
  }
  throw Error("dist.unknown_family", "unknown distribution id");
}

double sample(const Distribution& d, UniformStream& u) {
  return quantile(d, u.next());
}

std::vector<double> sample_n(const Distribution& d, std::size_t n,
                             std::uint64_t seed) {
  UniformStream u(seed);
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sample(d, u));
  return out;
}

nlohmann::json distribution_to_json(const Distribution& d) {
  nlohmann::json params = nlohmann::json::object();
  const auto& names = param_names(d.id);
  for (std::size_t i = 0; i < names.size(); ++i) params[names[i]] = d.params[i];
  return nlohmann::json{{"family", std::string(family_name(d.id))},
                        {"params", params}};
}

Distribution distribution_from_json(const nlohmann::json& j) {
  if (!j.contains("family") || !j.contains("params"))
    throw Error("dist.json", "distribution JSON needs 'family' and 'params'");
  Distribution d;
  d.id = family_from_name(j.at("family").get<std::string>());
  const auto& names = param_names(d.id);
  const auto& pj = j.at("params");
  for (const auto& name : names) {
    if (!pj.contains(name))
      throw Error("dist.json", "missing parameter '" + name + "' for " +
                                   std::string(family_name(d.id)));
    d.params.push_back(pj.at(name).get<double>());
  }
  validate_params(d);
  return d;
}

}  // namespace epicap
