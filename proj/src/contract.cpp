#include "epicap/contract.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <thread>

#include "epicap/error.hpp"
#include "epicap/rng.hpp"

namespace epicap {

namespace {

constexpr std::uint64_t kBlockSize = 2048;

const std::vector<std::string>& variant_params(ContractVariant v) {
  static const std::vector<std::string> vec{"mu_s", "mu_d"};
  static const std::vector<std::string> sca{"xi"};
  return v == ContractVariant::VectorBarrier ? vec : sca;
}

[[noreturn]] void bad_spec(const std::string& what) {
  throw Error("contract.bad_spec", what);
}

void require_shape(const ContractSpec& spec, const std::vector<double>& theta) {
  if (theta.size() != spec.event_params.size())
    throw Error("contract.shape_mismatch",
                "expected " + std::to_string(spec.event_params.size()) +
                    " event parameters, got " + std::to_string(theta.size()));
}

/// Streaming mean/variance cell; merging is associative enough to reduce
/// per-block cells in a fixed order, which keeps results independent of how
/// blocks were scheduled.
struct Acc {
  std::uint64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
};

Acc merge(const Acc& a, const Acc& b) {
  if (a.n == 0) return b;
  if (b.n == 0) return a;
  Acc out;
  out.n = a.n + b.n;
  double d = b.mean - a.mean;
  double nb = static_cast<double>(b.n), na = static_cast<double>(a.n);
  double nt = static_cast<double>(out.n);
  out.mean = a.mean + d * nb / nt;
  out.m2 = a.m2 + b.m2 + d * d * na * nb / nt;
  return out;
}

Acc reduce_tree(const std::vector<Acc>& cells, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return cells[lo];
  std::size_t mid = lo + (hi - lo) / 2;
  return merge(reduce_tree(cells, lo, mid), reduce_tree(cells, mid, hi));
}

Acc simulate(const ContractSpec& spec, const std::vector<Distribution>& comps,
             std::uint64_t n, std::uint64_t seed, int workers,
             std::vector<double>* keep) {
  std::uint64_t blocks = (n + kBlockSize - 1) / kBlockSize;
  std::vector<Acc> cells(blocks);
  if (keep) keep->assign(n, 0.0);

  int hw = static_cast<int>(std::thread::hardware_concurrency());
  int w = workers > 0 ? workers : std::clamp(hw, 1, 8);
  w = static_cast<int>(std::min<std::uint64_t>(w, blocks));

  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    std::vector<double> theta(comps.size());
    for (;;) {
      std::uint64_t b = next.fetch_add(1);
      if (b >= blocks) return;
      std::uint64_t first = b * kBlockSize;
      std::uint64_t count = std::min(kBlockSize, n - first);
      UniformStream u(mix_seed(seed, b, 0xB10CULL));
      Acc acc;
      for (std::uint64_t i = 0; i < count; ++i) {
        for (std::size_t c = 0; c < comps.size(); ++c)
          theta[c] = quantile(comps[c], u.next());
        double amount = payout(spec, theta).amount;
        acc.add(amount);
        if (keep) (*keep)[first + i] = amount;
      }
      cells[b] = acc;
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < w; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return reduce_tree(cells, 0, cells.size());
}

void check_components(const ContractSpec& spec,
                      const std::vector<Distribution>& comps) {
  if (comps.size() != spec.event_params.size())
    throw Error("contract.shape_mismatch",
                "contract has " + std::to_string(spec.event_params.size()) +
                    " event parameters but " + std::to_string(comps.size()) +
                    " component distributions were given");
  for (std::size_t c = 0; c < comps.size(); ++c) {
    try {
      validate_params(comps[c]);
    } catch (const Error& e) {
      throw Error("contract.bad_component",
                  "component " + spec.event_params[c] + ": " + e.what());
    }
  }
}

std::string level_key(double level) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", level);
  return buf;
}

}  // namespace

std::string_view variant_name(ContractVariant v) {
  return v == ContractVariant::VectorBarrier ? "VectorBarrier"
                                             : "ScalarBarrier";
}

ContractVariant variant_from_name(std::string_view name) {
  if (name == "VectorBarrier") return ContractVariant::VectorBarrier;
  if (name == "ScalarBarrier") return ContractVariant::ScalarBarrier;
  throw Error("contract.bad_json",
              "unknown contract variant '" + std::string(name) + "'");
}

std::string_view rule_name(ExceedanceRule r) {
  return r == ExceedanceRule::AnyComponent ? "AnyComponent" : "AllComponents";
}

ExceedanceRule rule_from_name(std::string_view name) {
  if (name == "AnyComponent") return ExceedanceRule::AnyComponent;
  if (name == "AllComponents") return ExceedanceRule::AllComponents;
  throw Error("contract.bad_json",
              "unknown exceedance rule '" + std::string(name) + "'");
}

std::string_view trigger_state_name(TriggerState s) {
  switch (s) {
    case TriggerState::NotTriggered:
      return "NotTriggered";
    case TriggerState::Triggered:
      return "Triggered";
    case TriggerState::CapExceeded:
      return "CapExceeded";
  }
  return "NotTriggered";
}

double LossMap::component_loss(std::size_t c, double x) const {
  const auto& ks = knots[c];
  if (ks.empty()) return 0.0;
  if (x <= ks.front()[0]) return ks.front()[1];
  if (x >= ks.back()[0]) {
    if (ks.size() == 1) return ks.back()[1];
    const auto& a = ks[ks.size() - 2];
    const auto& b = ks.back();
    double slope = (b[1] - a[1]) / (b[0] - a[0]);
    return b[1] + slope * (x - b[0]);
  }
  auto it = std::upper_bound(
      ks.begin(), ks.end(), x,
      [](double v, const std::array<double, 2>& k) { return v < k[0]; });
  const auto& b = *it;
  const auto& a = *(it - 1);
  double t = (x - a[0]) / (b[0] - a[0]);
  return a[1] + t * (b[1] - a[1]);
}

double LossMap::operator()(const std::vector<double>& theta) const {
  double total = 0.0;
  for (std::size_t c = 0; c < theta.size(); ++c)
    total += component_loss(c, theta[c]);
  return total;
}

void ContractSpec::validate() const {
  const auto& names = variant_params(variant);
  if (event_params != names) {
    std::string want;
    for (const auto& n : names) want += (want.empty() ? "" : ", ") + n;
    bad_spec(std::string(variant_name(variant)) + " event parameters must be " +
             want);
  }
  std::size_t k = names.size();
  if (trigger.size() != k || barrier.size() != k || loss.knots.size() != k)
    bad_spec("trigger, barrier and loss knots must cover every event parameter");
  for (std::size_t c = 0; c < k; ++c) {
    if (!std::isfinite(trigger[c]) || !std::isfinite(barrier[c]))
      bad_spec("non-finite trigger or barrier for " + names[c]);
    if (trigger[c] > barrier[c])
      bad_spec("trigger above barrier for " + names[c]);
    const auto& ks = loss.knots[c];
    if (ks.empty()) bad_spec("no loss knots for " + names[c]);
    for (std::size_t i = 0; i < ks.size(); ++i) {
      if (!std::isfinite(ks[i][0]) || !std::isfinite(ks[i][1]))
        bad_spec("non-finite loss knot for " + names[c]);
      if (i > 0 && ks[i][0] <= ks[i - 1][0])
        bad_spec("loss knot points must increase for " + names[c]);
      if (i > 0 && ks[i][1] < ks[i - 1][1])
        bad_spec("loss knot amounts must not decrease for " + names[c]);
    }
  }
  if (loss(trigger) < 0.0) bad_spec("loss at the trigger must not be negative");
}

nlohmann::json ContractSpec::to_json() const {
  nlohmann::json trig = nlohmann::json::object();
  nlohmann::json barr = nlohmann::json::object();
  nlohmann::json knots = nlohmann::json::object();
  for (std::size_t c = 0; c < event_params.size(); ++c) {
    trig[event_params[c]] = trigger[c];
    barr[event_params[c]] = barrier[c];
    nlohmann::json list = nlohmann::json::array();
    for (const auto& k : loss.knots[c]) list.push_back({k[0], k[1]});
    knots[event_params[c]] = std::move(list);
  }
  return {{"variant", std::string(variant_name(variant))},
          {"exceedance_rule", std::string(rule_name(rule))},
          {"event_params", event_params},
          {"trigger", std::move(trig)},
          {"barrier", std::move(barr)},
          {"loss_map",
           {{"kind", "PiecewiseLinear"},
            {"knots", std::move(knots)},
            {"statistical_death_value", loss.statistical_death_value}}},
          {"currency", currency}};
}

ContractSpec ContractSpec::from_json(const nlohmann::json& j) {
  try {
    ContractSpec spec;
    spec.variant = variant_from_name(j.at("variant").get<std::string>());
    spec.event_params = variant_params(spec.variant);
    if (j.contains("exceedance_rule"))
      spec.rule = rule_from_name(j.at("exceedance_rule").get<std::string>());
    const auto& lm = j.at("loss_map");
    if (lm.at("kind").get<std::string>() != "PiecewiseLinear")
      throw Error("contract.bad_json", "unknown loss map kind");
    if (lm.contains("statistical_death_value"))
      spec.loss.statistical_death_value =
          lm.at("statistical_death_value").get<double>();
    for (const auto& name : spec.event_params) {
      spec.trigger.push_back(j.at("trigger").at(name).get<double>());
      spec.barrier.push_back(j.at("barrier").at(name).get<double>());
      std::vector<std::array<double, 2>> ks;
      for (const auto& pair : lm.at("knots").at(name))
        ks.push_back({pair.at(0).get<double>(), pair.at(1).get<double>()});
      spec.loss.knots.push_back(std::move(ks));
    }
    if (j.contains("currency"))
      spec.currency = j.at("currency").get<std::string>();
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw Error("contract.bad_json", e.what());
  }
}

TriggerState evaluate_trigger(const ContractSpec& spec,
                              const std::vector<double>& theta) {
  require_shape(spec, theta);
  auto meets = [&](const std::vector<double>& level) {
    if (spec.rule == ExceedanceRule::AnyComponent) {
      for (std::size_t c = 0; c < theta.size(); ++c)
        if (theta[c] >= level[c]) return true;
      return false;
    }
    for (std::size_t c = 0; c < theta.size(); ++c)
      if (theta[c] < level[c]) return false;
    return true;
  };
  if (meets(spec.barrier)) return TriggerState::CapExceeded;
  if (meets(spec.trigger)) return TriggerState::Triggered;
  return TriggerState::NotTriggered;
}

PayoutResult payout(const ContractSpec& spec, const std::vector<double>& theta) {
  PayoutResult out;
  switch (evaluate_trigger(spec, theta)) {
    case TriggerState::NotTriggered:
      out.evaluated_at = theta;
      return out;
    case TriggerState::Triggered: {
      out.triggered = true;
      out.evaluated_at = theta;
      for (std::size_t c = 0; c < theta.size(); ++c)
        out.evaluated_at[c] = std::min(theta[c], spec.barrier[c]);
      out.amount = spec.loss(out.evaluated_at);
      return out;
    }
    case TriggerState::CapExceeded:
      out.triggered = true;
      out.capped = true;
      out.evaluated_at = spec.barrier;
      out.amount = spec.loss(spec.barrier);
      return out;
  }
  return out;
}

McResult expected_payout_mc(const ContractSpec& spec,
                            const std::vector<Distribution>& components,
                            std::uint64_t n, std::uint64_t seed, int workers) {
  spec.validate();
  check_components(spec, components);
  if (n < 100)
    throw Error("contract.too_few_draws",
                "need at least 100 draws, got " + std::to_string(n));
  Acc acc = simulate(spec, components, n, seed, workers, nullptr);
  McResult out;
  out.estimate = acc.mean;
  double var = acc.m2 / static_cast<double>(acc.n - 1);
  out.std_error = std::sqrt(var / static_cast<double>(acc.n));
  out.n = n;
  out.seed = seed;
  return out;
}

double expected_shortfall(std::vector<double> samples, double level) {
  if (samples.empty())
    throw Error("contract.empty_samples",
                "expected shortfall needs at least one sample");
  if (!(level >= 0.0) || level >= 1.0)
    throw Error("contract.bad_level",
                "tail level must lie in [0, 1), got " + std::to_string(level));
  std::sort(samples.begin(), samples.end(), std::greater<>());
  double want = (1.0 - level) * static_cast<double>(samples.size());
  auto k = static_cast<std::size_t>(std::ceil(want - 1e-9));
  k = std::clamp<std::size_t>(k, 1, samples.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += samples[i];
  return sum / static_cast<double>(k);
}

nlohmann::json pricing_report(const ContractSpec& spec,
                              const std::vector<Distribution>& components,
                              std::uint64_t n, std::uint64_t seed,
                              const std::vector<double>& es_levels,
                              int workers) {
  spec.validate();
  check_components(spec, components);
  if (n < 100)
    throw Error("contract.too_few_draws",
                "need at least 100 draws, got " + std::to_string(n));
  std::vector<double> samples;
  Acc acc = simulate(spec, components, n, seed, workers, &samples);
  double var = acc.m2 / static_cast<double>(acc.n - 1);
  nlohmann::json es = nlohmann::json::object();
  for (double level : es_levels)
    es[level_key(level)] = expected_shortfall(samples, level);
  nlohmann::json comps = nlohmann::json::array();
  for (std::size_t c = 0; c < components.size(); ++c) {
    nlohmann::json cj = distribution_to_json(components[c]);
    cj["event_param"] = spec.event_params[c];
    comps.push_back(std::move(cj));
  }
  return {{"estimate", acc.mean},
          {"std_error", std::sqrt(var / static_cast<double>(acc.n))},
          {"n", n},
          {"seed", seed},
          {"currency", spec.currency},
          {"independent_components", true},
          {"components", std::move(comps)},
          {"es_levels", std::move(es)}};
}

}  // namespace epicap
