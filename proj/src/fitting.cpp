#include "epicap/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "epicap/error.hpp"

namespace epicap {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEulerGamma = 0.57721566490153286;

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool always_bounded_below(DistributionId id) {
  switch (id) {
    case DistributionId::JohnsonSB:
    case DistributionId::Beta4:
    case DistributionId::Burr4:
    case DistributionId::InverseGaussian3:
    case DistributionId::GeneralizedPareto:
    case DistributionId::Weibull3:
      return true;
    default:
      return false;
  }
}

double quantile_sorted(const std::vector<double>& s, double p) {
  double pos = p * static_cast<double>(s.size() - 1);
  auto lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= s.size()) return s.back();
  double w = pos - static_cast<double>(lo);
  return s[lo] + w * (s[lo + 1] - s[lo]);
}

struct SampleStats {
  int n = 0;
  double mean = 0, sd = 0, min = 0, max = 0, range = 0;
  double b0 = 0, b1 = 0, b2 = 0;  // probability-weighted moments
};

SampleStats summarize(const std::vector<double>& sorted) {
  SampleStats st;
  st.n = static_cast<int>(sorted.size());
  double n = st.n;
  double sum = 0;
  for (double v : sorted) sum += v;
  st.mean = sum / n;
  double m2 = 0;
  for (double v : sorted) m2 += (v - st.mean) * (v - st.mean);
  st.sd = st.n > 1 ? std::sqrt(m2 / (n - 1)) : 0.0;
  st.min = sorted.front();
  st.max = sorted.back();
  st.range = st.max - st.min;
  double b1 = 0, b2 = 0;
  for (int i = 0; i < st.n; ++i) {
    double w1 = i / (n - 1);
    b1 += w1 * sorted[i];
    if (st.n > 2) b2 += w1 * ((i - 1) / (n - 2)) * sorted[i];
  }
  st.b0 = st.mean;
  st.b1 = b1 / n;
  st.b2 = b2 / n;
  return st;
}

// ---------------------------------------------------------------------------
// Unconstrained reparameterization per family: log for positive parameters,
// log of the gap below the sample minimum for location thresholds, fixed
// anchored boundaries for Beta4.

// Several families have an unbounded likelihood at solutions whose support
// boundary collapses onto an extreme data point (JohnsonSB with small delta;
// Burr4/Weibull3 with alpha < 1; GEV with |k| > 1; GeneralizedPareto with
// k < -1). Fitted boundaries are therefore kept a small range-relative gap
// away from the data: a hard floor built into the reparameterization where
// the boundary is always finite (JSB, Burr4, Weibull3), a conditional
// rejection where the spike exists only in part of the parameter space
// (GEV, GPD). The floors are well below the boundary gaps of non-degenerate
// optima, so they act purely as a guard rail.
constexpr double kJsbGapFloor = 0.01;    // per side, fraction of sample range
constexpr double kThreshGapFloor = 0.005;
constexpr double kTailGapFloor = 0.002;

// Some families also degenerate toward other parametric families along
// non-compact ridges (Burr4 with k->0, alpha->inf approaches a Pareto knee;
// threshold families with the location sent far below the data approach
// their normal/Gumbel limits), where the likelihood keeps creeping by
// ulps forever and fitted parameters blow up. Far-out caps — orders of
// magnitude beyond any non-degenerate optimum — terminate those ridges at
// an equivalent-fit point.
constexpr double kShapeCap = 200.0;      // Burr4 k and alpha, Weibull3 alpha
constexpr double kDeltaCap = 500.0;      // JohnsonSB delta
constexpr double kScaleCapRanges = 1e3;  // scale params, in sample ranges
constexpr double kGapCapRanges = 50.0;   // threshold gap, in sample ranges
constexpr double kTailShapeCap = 50.0;   // |k| of GEV / GeneralizedPareto

struct Model {
  DistributionId id = DistributionId::Normal;
  int dim = 0;
  double beta_a = 0, beta_b = 0;  // Beta4 anchors
  double xmin = 0, xmax = 0, range = 0;

  // Maps the search point to natural parameters; false when the point is
  // outside the usable region (overflow, boundary collapsed onto the data,
  // non-positive scale).
  bool natural(const double* u, std::vector<double>& p) const {
    auto pos = [](double w) {
      double v = std::exp(w);
      return (v > 0 && std::isfinite(v)) ? v : -1.0;
    };
    switch (id) {
      case DistributionId::GEV: {
        double k = u[0], s = pos(u[1]), mu = u[2];
        if (s < 0 || !std::isfinite(k) || !std::isfinite(mu)) return false;
        if (std::abs(k) > kTailShapeCap || s > kScaleCapRanges * range)
          return false;
        if (k > 1 && mu - s / k > xmin - kTailGapFloor * range) return false;
        if (k < -1 && mu - s / k < xmax + kTailGapFloor * range) return false;
        p = {k, s, mu};
        return true;
      }
      case DistributionId::JohnsonSB: {
        double d = pos(u[1]), gu = pos(u[2]), gl = pos(u[3]);
        if (d < 0 || gu < 0 || gl < 0 || !std::isfinite(u[0])) return false;
        if (d > kDeltaCap || gu > kGapCapRanges * range ||
            gl > kGapCapRanges * range)
          return false;
        double lo_gap = kJsbGapFloor * range + gl;
        double hi_gap = kJsbGapFloor * range + gu;
        double xi = xmin - lo_gap;
        double lambda = range + lo_gap + hi_gap;
        if (!(xi < xmin) || !(xi + lambda > xmax) || !std::isfinite(lambda))
          return false;
        p = {u[0], d, lambda, xi};
        return true;
      }
      case DistributionId::Beta4: {
        double a1 = pos(u[0]), a2 = pos(u[1]);
        if (a1 < 0 || a2 < 0) return false;
        p = {a1, a2, beta_a, beta_b};
        return true;
      }
      case DistributionId::Burr4: {
        double k = pos(u[0]), a = pos(u[1]), b = pos(u[2]), g = pos(u[3]);
        if (k < 0 || a < 0 || b < 0 || g < 0) return false;
        if (k > kShapeCap || a > kShapeCap || b > kScaleCapRanges * range ||
            g > kGapCapRanges * range)
          return false;
        double loc = xmin - (kThreshGapFloor * range + g);
        if (!(loc < xmin)) return false;
        p = {k, a, b, loc};
        return true;
      }
      case DistributionId::InverseGaussian3: {
        double l = pos(u[0]), m = pos(u[1]), g = pos(u[2]);
        if (l < 0 || m < 0 || g < 0) return false;
        if (g > kGapCapRanges * range || m > 2 * kGapCapRanges * range ||
            l > kScaleCapRanges * kGapCapRanges * range)
          return false;
        double loc = xmin - g;
        if (!(loc < xmin)) return false;
        p = {l, m, loc};
        return true;
      }
      case DistributionId::GeneralizedPareto: {
        double k = u[0], s = pos(u[1]), g = pos(u[2]);
        if (s < 0 || g < 0 || !std::isfinite(k)) return false;
        if (std::abs(k) > kTailShapeCap || s > kScaleCapRanges * range ||
            g > kGapCapRanges * range)
          return false;
        double loc = xmin - g;
        if (!(loc < xmin)) return false;
        if (k < -1 && loc - s / k < xmax + kTailGapFloor * range) return false;
        p = {k, s, loc};
        return true;
      }
      case DistributionId::Weibull3: {
        double a = pos(u[0]), b = pos(u[1]), g = pos(u[2]);
        if (a < 0 || b < 0 || g < 0) return false;
        if (a > kShapeCap || b > kScaleCapRanges * range ||
            g > kGapCapRanges * range)
          return false;
        double loc = xmin - (kThreshGapFloor * range + g);
        if (!(loc < xmin)) return false;
        p = {a, b, loc};
        return true;
      }
      case DistributionId::HyperbolicSecant: {
        double s = pos(u[1]);
        if (s < 0 || !std::isfinite(u[0])) return false;
        p = {u[0], s};
        return true;
      }
      default:
        return false;
    }
  }
};

Model make_model(DistributionId id, const SampleStats& st) {
  Model m;
  m.id = id;
  m.dim = static_cast<int>(param_count(id));
  m.xmin = st.min;
  m.xmax = st.max;
  m.range = st.range;
  if (id == DistributionId::Beta4) {
    m.dim = 2;  // boundaries are anchored, not searched
    double pad = 1e-6 * st.range;
    m.beta_a = std::min(st.min - pad, std::nextafter(st.min, -kInf));
    m.beta_b = std::max(st.max + pad, std::nextafter(st.max, kInf));
  }
  return m;
}

struct Objective {
  const Model* model;
  const std::vector<double>* data;
  mutable Distribution dist;

  double operator()(const double* u) const {
    if (!model->natural(u, dist.params)) return kInf;
    double nll = 0;
    for (double x : *data) {
      double lp = log_pdf(dist, x);
      if (!std::isfinite(lp)) return kInf;  // outside support or singular
      nll -= lp;
    }
    return std::isfinite(nll) ? nll : kInf;
  }
};

// ---------------------------------------------------------------------------
// Moment / L-moment style starting points, one primary and one coarse
// fallback per family, with initial simplex steps in search coordinates.

struct InitSpec {
  std::vector<double> u0;
  std::vector<double> steps;
};

void gev_lmoment_init(const SampleStats& st, std::vector<InitSpec>& out) {
  double sigma_g = st.sd * std::sqrt(6.0) / M_PI;
  if (!(sigma_g > 0) || !std::isfinite(sigma_g)) sigma_g = 1.0;
  InitSpec gumbel{{0.0, std::log(sigma_g), st.mean - kEulerGamma * sigma_g},
                  {0.2, 0.35, 0.5 * sigma_g}};

  double l1 = st.b0;
  double l2 = 2 * st.b1 - st.b0;
  double l3 = 6 * st.b2 - 6 * st.b1 + st.b0;
  if (l2 > 0 && std::isfinite(l3)) {
    double t3 = l3 / l2;
    double c = 2.0 / (3.0 + t3) - std::log(2.0) / std::log(3.0);
    double kap = 7.8590 * c + 2.9554 * c * c;  // Hosking's sign convention
    kap = std::clamp(kap, -0.98, 5.0);
    double sigma, mu;
    if (std::abs(kap) < 1e-6) {
      sigma = l2 / std::log(2.0);
      mu = l1 - kEulerGamma * sigma;
    } else {
      double g = std::tgamma(1.0 + kap);
      sigma = l2 * kap / ((1.0 - std::exp2(-kap)) * g);
      mu = l1 - sigma * (1.0 - g) / kap;
    }
    if (std::isfinite(sigma) && sigma > 0 && std::isfinite(mu)) {
      out.push_back({{-kap, std::log(sigma), mu}, {0.2, 0.35, 0.5 * sigma}});
    }
  }
  out.push_back(gumbel);
}

std::vector<InitSpec> make_inits(const Model& m, const SampleStats& st,
                                 const std::vector<double>& sorted) {
  std::vector<InitSpec> out;
  double R = st.range;
  switch (m.id) {
    case DistributionId::GEV:
      gev_lmoment_init(st, out);
      break;
    case DistributionId::HyperbolicSecant:
      out.push_back({{st.mean, std::log(st.sd)}, {0.3 * st.sd, 0.35}});
      break;
    case DistributionId::JohnsonSB: {
      double xi0 = st.min - 0.05 * R, lam0 = 1.1 * R;
      double mu_u = 0, m2_u = 0;
      for (double x : sorted) {
        double z = (x - xi0) / lam0;
        mu_u += std::log(z / (1 - z));
      }
      mu_u /= st.n;
      for (double x : sorted) {
        double z = (x - xi0) / lam0;
        double w = std::log(z / (1 - z)) - mu_u;
        m2_u += w * w;
      }
      double sd_u = std::sqrt(m2_u / std::max(1, st.n - 1));
      double delta0 = std::clamp(sd_u > 0 ? 1.0 / sd_u : 1.0, 0.05, 50.0);
      // both boundary gaps start at 5% of the range, 4% above the floor
      double g0 = std::log((0.05 - kJsbGapFloor) * R);
      out.push_back({{-mu_u * delta0, std::log(delta0), g0, g0},
                     {0.3, 0.3, 0.5, 0.5}});
      double gf = std::log((0.5 - kJsbGapFloor) * R);
      out.push_back({{0.0, 0.0, gf, gf}, {0.3, 0.3, 0.5, 0.5}});
      break;
    }
    case DistributionId::Beta4: {
      double span = m.beta_b - m.beta_a;
      double mz = (st.mean - m.beta_a) / span;
      double vz = (st.sd / span) * (st.sd / span);
      double common = vz > 0 ? mz * (1 - mz) / vz - 1.0 : 1.0;
      common = std::max(common, 0.02);
      double a1 = std::clamp(mz * common, 1e-3, 1e4);
      double a2 = std::clamp((1 - mz) * common, 1e-3, 1e4);
      out.push_back({{std::log(a1), std::log(a2)}, {0.35, 0.35}});
      out.push_back({{0.0, 0.0}, {0.5, 0.5}});
      break;
    }
    case DistributionId::Burr4: {
      double gap0 = 0.05 * R;
      double q25 = quantile_sorted(sorted, 0.25) - (st.min - gap0);
      double q50 = quantile_sorted(sorted, 0.50) - (st.min - gap0);
      double q75 = quantile_sorted(sorted, 0.75) - (st.min - gap0);
      double alpha0 = 2.0;
      if (q25 > 0 && q75 / q25 > 1.0001)
        alpha0 = std::clamp(std::log(9.0) / std::log(q75 / q25), 0.2, 50.0);
      double u3 = std::log((0.05 - kThreshGapFloor) * R);
      out.push_back({{0.0, std::log(alpha0), std::log(q50), u3},
                     {0.4, 0.3, 0.3, 0.5}});
      out.push_back({{0.0, std::log(2.0),
                      std::log(quantile_sorted(sorted, 0.5) - st.min + 0.5 * R),
                      std::log((0.5 - kThreshGapFloor) * R)},
                     {0.4, 0.3, 0.3, 0.5}});
      break;
    }
    case DistributionId::InverseGaussian3: {
      for (double frac : {0.1, 0.5}) {
        double gap0 = frac * R;
        double mu0 = st.mean - (st.min - gap0);
        double v = std::max(st.sd * st.sd, 1e-300);
        double lam0 = mu0 * mu0 * mu0 / v;
        if (!(lam0 > 0) || !std::isfinite(lam0)) lam0 = mu0;
        out.push_back({{std::log(lam0), std::log(mu0), std::log(gap0)},
                       {0.5, 0.3, 0.5}});
      }
      break;
    }
    case DistributionId::GeneralizedPareto: {
      double gap0 = 0.02 * R;
      double my = st.mean - (st.min - gap0);
      double vy = std::max(st.sd * st.sd, 1e-300);
      double k0 = std::clamp(0.5 * (1.0 - my * my / vy), -0.9, 0.9);
      // keep the upper endpoint of a short-tail start above the data
      if (k0 < 0) k0 = std::max(k0, -0.9 * my / (st.max - (st.min - gap0)));
      double s0 = my * (1.0 - k0);
      out.push_back({{k0, std::log(s0), std::log(gap0)}, {0.2, 0.3, 0.5}});
      out.push_back({{0.05, std::log(my), std::log(0.1 * R)}, {0.2, 0.3, 0.5}});
      break;
    }
    case DistributionId::Weibull3: {
      double gap0 = 0.05 * R;
      double mln = 0, m2ln = 0;
      for (double x : sorted) mln += std::log(x - (st.min - gap0));
      mln /= st.n;
      for (double x : sorted) {
        double w = std::log(x - (st.min - gap0)) - mln;
        m2ln += w * w;
      }
      double sdln = std::sqrt(m2ln / std::max(1, st.n - 1));
      double alpha0 =
          std::clamp(sdln > 0 ? M_PI / (std::sqrt(6.0) * sdln) : 1.0, 0.1, 50.0);
      double beta0 = std::exp(mln + kEulerGamma / alpha0);
      out.push_back({{std::log(alpha0), std::log(beta0),
                      std::log((0.05 - kThreshGapFloor) * R)},
                     {0.3, 0.3, 0.5}});
      out.push_back({{0.0, std::log(st.mean - st.min + 0.5 * R),
                      std::log((0.5 - kThreshGapFloor) * R)},
                     {0.3, 0.3, 0.5}});
      break;
    }
    default:
      break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Nelder-Mead simplex search; infeasible points carry +inf and are handled
// as ordinary worst values.

struct NmOut {
  std::vector<double> u;
  double f = kInf;
  bool converged = false;
};

NmOut nelder_mead(const Objective& f, const std::vector<double>& start,
                  const std::vector<double>& step, int max_iters, double tol) {
  const int d = static_cast<int>(start.size());
  std::vector<std::vector<double>> v(d + 1, start);
  std::vector<double> fv(d + 1);
  fv[0] = f(v[0].data());
  for (int i = 1; i <= d; ++i) {
    v[i][i - 1] += step[i - 1];
    fv[i] = f(v[i].data());
    for (int g = 0; g < 50 && !std::isfinite(fv[i]); ++g) {
      v[i][i - 1] = 0.5 * (v[i][i - 1] + start[i - 1]);
      fv[i] = f(v[i].data());
    }
  }

  std::vector<int> idx(d + 1);
  for (int i = 0; i <= d; ++i) idx[i] = i;
  auto order = [&] {
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
      return fv[a] < fv[b] || (fv[a] == fv[b] && a < b);
    });
  };

  std::vector<double> c(d), xr(d), xx(d);
  bool converged = false;
  for (int it = 0; it < max_iters; ++it) {
    order();
    int best = idx[0], worst = idx[d], second = idx[d - 1];
    if (std::isfinite(fv[best]) &&
        fv[worst] - fv[best] <= tol * (1.0 + std::abs(fv[best]))) {
      converged = true;
      break;
    }
    for (int j = 0; j < d; ++j) {
      double s = 0;
      for (int i = 0; i <= d; ++i)
        if (i != worst) s += v[i][j];
      c[j] = s / d;
    }
    for (int j = 0; j < d; ++j) xr[j] = c[j] + (c[j] - v[worst][j]);
    double fr = f(xr.data());
    bool shrink = false;
    if (fr < fv[best]) {
      for (int j = 0; j < d; ++j) xx[j] = c[j] + 2.0 * (c[j] - v[worst][j]);
      double fe = f(xx.data());
      if (fe < fr) {
        v[worst] = xx;
        fv[worst] = fe;
      } else {
        v[worst] = xr;
        fv[worst] = fr;
      }
    } else if (fr < fv[second]) {
      v[worst] = xr;
      fv[worst] = fr;
    } else if (fr < fv[worst]) {
      for (int j = 0; j < d; ++j) xx[j] = c[j] + 0.5 * (c[j] - v[worst][j]);
      double fc = f(xx.data());
      if (fc <= fr) {
        v[worst] = xx;
        fv[worst] = fc;
      } else {
        shrink = true;
      }
    } else {
      for (int j = 0; j < d; ++j) xx[j] = c[j] - 0.5 * (c[j] - v[worst][j]);
      double fc = f(xx.data());
      if (fc < fv[worst]) {
        v[worst] = xx;
        fv[worst] = fc;
      } else {
        shrink = true;
      }
    }
    if (shrink) {
      for (int i = 0; i <= d; ++i) {
        if (i == best) continue;
        for (int j = 0; j < d; ++j) v[i][j] = v[best][j] + 0.5 * (v[i][j] - v[best][j]);
        fv[i] = f(v[i].data());
      }
    }
  }
  order();
  return {v[idx[0]], fv[idx[0]], converged};
}

FitResult closed_form_normal(const std::vector<double>& data) {
  double n = static_cast<double>(data.size());
  double mean = 0;
  for (double x : data) mean += x;
  mean /= n;
  double m2 = 0;
  for (double x : data) m2 += (x - mean) * (x - mean);
  double sigma = std::sqrt(m2 / n);
  FitResult r;
  r.id = DistributionId::Normal;
  r.params = {mean, sigma};
  r.converged = true;
  r.restarts_used = 0;
  return r;
}

std::uint64_t day_stream(std::uint64_t base, Date d) {
  return mix_seed(base, static_cast<std::uint64_t>(d.serial()), 0xDA7EULL);
}

std::uint64_t family_stream(std::uint64_t base, DistributionId id) {
  return mix_seed(base, 1 + static_cast<std::uint64_t>(id), 0xFA31ULL);
}

FitOptions day_family_options(const FitOptions& options, Date d,
                              DistributionId id) {
  FitOptions o = options;
  o.seed = family_stream(day_stream(options.seed, d), id);
  return o;
}

}  // namespace

FitResult fit_mle(DistributionId id, std::vector<double> data,
                  const FitOptions& options) {
  if (id == DistributionId::PointMass)
    throw Error("fitting.unsupported_family",
                "PointMass has no continuous likelihood to maximize");
  auto arity = param_count(id);
  if (data.size() < arity + 1)
    throw Error("fitting.sample_too_small",
                "need at least " + std::to_string(arity + 1) + " points for " +
                    std::string(family_name(id)) + ", got " +
                    std::to_string(data.size()));
  for (double v : data)
    if (!std::isfinite(v))
      throw Error("fitting.nonfinite_data", "sample contains a non-finite value");
  std::sort(data.begin(), data.end());
  if (data.front() == data.back())
    throw Error("fitting.degenerate_sample",
                "all sample values equal " + g17(data.front()));

  int zeros = 0;
  if (always_bounded_below(id) && data.front() == 0.0) {
    double minpos = 0;
    for (double v : data)
      if (v > 0) {
        minpos = v;
        break;
      }
    double repl = minpos / 2;
    for (double& v : data)
      if (v == 0.0) {
        v = repl;
        ++zeros;
      }
    std::sort(data.begin(), data.end());
  }

  if (id == DistributionId::Normal) {
    FitResult r = closed_form_normal(data);
    Distribution d{id, r.params};
    double ll = 0;
    for (double x : data) ll += log_pdf(d, x);
    r.log_likelihood = ll;
    r.ks = ks_statistic(id, r.params, data);
    r.n = static_cast<int>(data.size());
    r.zeros_perturbed = zeros;
    return r;
  }

  SampleStats st = summarize(data);
  Model model = make_model(id, st);
  Objective obj{&model, &data, Distribution{id, {}}};
  std::vector<InitSpec> inits = make_inits(model, st, data);
  if (inits.empty())
    throw Error("fitting.no_feasible_start",
                std::string(family_name(id)) + ": no starting point");

  UniformStream rng(options.seed);
  int restarts = std::max(1, options.restarts);
  NmOut best;
  int used = 0;
  for (int r = 0; r < restarts; ++r) {
    const InitSpec& base = inits[r % inits.size()];
    std::vector<double> u = base.u0;
    if (r >= static_cast<int>(inits.size())) {
      double amp = 0.5 + 0.15 * (r - static_cast<int>(inits.size()));
      for (int j = 0; j < model.dim; ++j)
        u[j] += base.steps[j] * amp * (2.0 * rng.next() - 1.0);
    }
    double f0 = obj(u.data());
    for (int g = 0; g < 60 && !std::isfinite(f0); ++g) {
      for (int j = 0; j < model.dim; ++j) u[j] = 0.5 * (u[j] + base.u0[j]);
      f0 = obj(u.data());
    }
    if (!std::isfinite(f0)) continue;
    ++used;
    NmOut run = nelder_mead(obj, u, base.steps, options.max_iters, options.tol);
    std::vector<double> fine(base.steps);
    for (double& s : fine) s *= 0.08;
    NmOut pol = nelder_mead(obj, run.u, fine, options.max_iters / 2 + 1,
                            options.tol);
    if (pol.f <= run.f) {
      pol.converged = pol.converged || run.converged;
      run = pol;
    }
    if (run.f < best.f || (best.u.empty() && std::isfinite(run.f))) best = run;
  }
  if (best.u.empty() || !std::isfinite(best.f))
    throw Error("fitting.no_feasible_start",
                std::string(family_name(id)) +
                    ": no feasible starting point for this sample");

  FitResult r;
  r.id = id;
  model.natural(best.u.data(), r.params);
  validate_params(Distribution{id, r.params});
  r.log_likelihood = -best.f;
  r.ks = ks_statistic(id, r.params, data);
  r.n = static_cast<int>(data.size());
  r.converged = best.converged;
  r.restarts_used = used;
  r.zeros_perturbed = zeros;
  return r;
}

double ks_statistic(DistributionId id, const std::vector<double>& params,
                    std::vector<double> data) {
  if (data.empty()) throw Error("fitting.empty_sample", "no data for KS");
  Distribution d{id, params};
  validate_params(d);
  std::sort(data.begin(), data.end());
  double n = static_cast<double>(data.size());
  double worst = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    double F = cdf(d, data[i]);
    double hi = (static_cast<double>(i) + 1.0) / n - F;
    double lo = F - static_cast<double>(i) / n;
    worst = std::max({worst, hi, lo});
  }
  return worst;
}

void sort_ranked(std::vector<FitResult>& results,
                 const std::vector<DistributionId>& catalog) {
  auto pos = [&](DistributionId id) {
    for (std::size_t i = 0; i < catalog.size(); ++i)
      if (catalog[i] == id) return i;
    return catalog.size();
  };
  std::stable_sort(results.begin(), results.end(),
                   [&](const FitResult& a, const FitResult& b) {
                     if (a.converged != b.converged) return a.converged;
                     if (a.ks != b.ks) return a.ks < b.ks;
                     if (param_count(a.id) != param_count(b.id))
                       return param_count(a.id) < param_count(b.id);
                     return pos(a.id) < pos(b.id);
                   });
}

std::vector<FitResult> rank_candidates(const std::vector<double>& data,
                                       const std::vector<DistributionId>& catalog,
                                       const FitOptions& options) {
  if (catalog.empty())
    throw Error("fitting.empty_catalog", "no candidate families");
  std::vector<FitResult> out;
  std::string reasons;
  for (DistributionId id : catalog) {
    FitOptions o = options;
    o.seed = family_stream(options.seed, id);
    try {
      out.push_back(fit_mle(id, data, o));
    } catch (const Error& e) {
      if (!reasons.empty()) reasons += "; ";
      reasons += std::string(family_name(id)) + ": " + e.what();
    }
  }
  if (out.empty())
    throw Error("fitting.all_failed", "every candidate family failed: " + reasons);
  sort_ranked(out, catalog);
  return out;
}

nlohmann::json SelectionSummary::to_json() const {
  nlohmann::json per;
  for (const auto& day : per_day) {
    nlohmann::json top;
    for (const auto& fr : day.top) {
      nlohmann::json t = distribution_to_json(Distribution{fr.id, fr.params});
      t["ks"] = fr.ks;
      t["log_likelihood"] = fr.log_likelihood;
      t["converged"] = fr.converged;
      top.push_back(std::move(t));
    }
    per.push_back({{"date", day.date.to_string()},
                   {"n", day.n},
                   {"top", std::move(top)}});
  }
  nlohmann::json counts = nlohmann::json::object();
  std::map<std::string, int> tally;
  for (const auto& day : per_day)
    if (!day.top.empty()) ++tally[std::string(family_name(day.top[0].id))];
  for (const auto& [name, c] : tally) counts[name] = c;
  nlohmann::json skipped = nlohmann::json::array();
  for (Date d : skipped_days) skipped.push_back(d.to_string());
  return {{"kind", std::string(rate_kind_name(kind))},
          {"total_days", total_days},
          {"winner", std::string(family_name(winner))},
          {"winner_day_count", winner_day_count},
          {"first_place_counts", std::move(counts)},
          {"skipped_days", std::move(skipped)},
          {"per_day", std::move(per)}};
}

SelectionSummary daily_selection(const RateSurface& surface,
                                 const std::vector<DistributionId>& catalog,
                                 const FitOptions& options) {
  SelectionSummary s;
  s.kind = surface.kind;
  std::map<DistributionId, int> wins;
  std::map<DistributionId, double> ks_sum;
  for (std::size_t di = 0; di < surface.dates.size(); ++di) {
    Date date = surface.dates[di];
    std::vector<double> sample = surface.day_sample(di);
    if (static_cast<int>(sample.size()) < options.min_day_sample) {
      s.skipped_days.push_back(date);
      continue;
    }
    FitOptions day_opts = options;
    day_opts.seed = day_stream(options.seed, date);
    std::vector<FitResult> ranked;
    try {
      ranked = rank_candidates(sample, catalog, day_opts);
    } catch (const Error&) {
      s.skipped_days.push_back(date);
      continue;
    }
    DaySelection day;
    day.date = date;
    day.n = static_cast<int>(sample.size());
    day.top.assign(ranked.begin(),
                   ranked.begin() + std::min<std::size_t>(3, ranked.size()));
    ++wins[ranked[0].id];
    ks_sum[ranked[0].id] += ranked[0].ks;
    s.per_day.push_back(std::move(day));
  }
  s.total_days = static_cast<int>(s.per_day.size());
  if (s.per_day.empty())
    throw Error("fitting.no_usable_days",
                "no day in the window has a usable cross-section");
  bool have = false;
  int best_count = 0;
  double best_mean = kInf;
  for (DistributionId id : catalog) {
    auto it = wins.find(id);
    if (it == wins.end()) continue;
    double mean_ks = ks_sum[id] / it->second;
    if (!have || it->second > best_count ||
        (it->second == best_count && mean_ks < best_mean)) {
      have = true;
      s.winner = id;
      best_count = it->second;
      best_mean = mean_ks;
    }
  }
  s.winner_day_count = best_count;
  return s;
}

ParameterTrace refit_winner(const RateSurface& surface, DistributionId id,
                            const FitOptions& options) {
  ParameterTrace t;
  t.id = id;
  for (std::size_t di = 0; di < surface.dates.size(); ++di) {
    Date date = surface.dates[di];
    std::vector<double> sample = surface.day_sample(di);
    if (static_cast<int>(sample.size()) < options.min_day_sample) continue;
    try {
      FitResult fr = fit_mle(id, sample, day_family_options(options, date, id));
      t.days.push_back(date);
      t.values.push_back(fr.params);
      t.converged.push_back(fr.converged);
    } catch (const Error&) {
      t.failures.push_back(date);
    }
  }
  return t;
}

void write_trace_csv(const ParameterTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("fitting.io", "cannot open " + path + " for writing");
  out << "date";
  for (const auto& name : param_names(trace.id)) out << ',' << name;
  out << ",converged\n";
  for (std::size_t i = 0; i < trace.days.size(); ++i) {
    out << trace.days[i].to_string();
    for (double v : trace.values[i]) out << ',' << g17(v);
    out << ',' << (trace.converged[i] ? "true" : "false") << '\n';
  }
  if (!out.flush()) throw Error("fitting.io", "failed writing " + path);
}

ParameterTrace load_trace_csv(const std::string& path, DistributionId id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("fitting.io", "cannot open " + path);
  std::string expected = "date";
  for (const auto& name : param_names(id)) expected += "," + name;
  expected += ",converged";
  std::string line;
  if (!std::getline(in, line)) throw Error("fitting.io", path + " is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected)
    throw Error("fitting.trace_header",
                path + ": header does not match " + std::string(family_name(id)));
  ParameterTrace t;
  t.id = id;
  std::size_t arity = param_count(id);
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() != arity + 2)
      throw Error("fitting.trace_row",
                  path + " line " + std::to_string(lineno) + ": expected " +
                      std::to_string(arity + 2) + " fields");
    t.days.push_back(Date::parse(fields[0]));
    std::vector<double> vals;
    for (std::size_t i = 1; i <= arity; ++i) {
      std::size_t used = 0;
      double v = std::stod(fields[i], &used);
      if (used != fields[i].size())
        throw Error("fitting.trace_row", path + " line " +
                                             std::to_string(lineno) +
                                             ": bad number " + fields[i]);
      vals.push_back(v);
    }
    t.values.push_back(std::move(vals));
    if (fields[arity + 1] == "true" || fields[arity + 1] == "1")
      t.converged.push_back(true);
    else if (fields[arity + 1] == "false" || fields[arity + 1] == "0")
      t.converged.push_back(false);
    else
      throw Error("fitting.trace_row", path + " line " + std::to_string(lineno) +
                                           ": bad converged flag");
  }
  return t;
}

}  // namespace epicap
