#include "epicap/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "epicap/contract.hpp"
#include "epicap/error.hpp"
#include "epicap/meta.hpp"
#include "epicap/rates.hpp"
#include "epicap/rng.hpp"

namespace fs = std::filesystem;

namespace epicap {

namespace {

const std::vector<RateKind> kKinds{RateKind::InfectionSpeed,
                                   RateKind::DeathRate,
                                   RateKind::FatalityRatio};

std::string_view policy_name(ValidationPolicy p) {
  return p == ValidationPolicy::Strict ? "strict" : "clamp";
}

ValidationPolicy policy_from_name(std::string_view name) {
  if (name == "strict") return ValidationPolicy::Strict;
  if (name == "clamp") return ValidationPolicy::Clamp;
  throw Error("pipeline.bad_config",
              "unknown validation policy '" + std::string(name) + "'");
}

/// In-memory results shared by chained stages.
struct StageState {
  CumulativeCorpus corpus;
  PopulationTable pop;
  ValidationReport report;
  bool ingested = false;
  std::map<RateKind, RateSurface> surfaces;
  std::map<RateKind, SelectionSummary> selections;
  std::map<RateKind, ParameterTrace> traces;
  std::map<RateKind, std::vector<ParameterDistributionFit>> paramfits;
};

/// Files written and inputs read by the current invocation, for the manifest.
struct RunLog {
  std::map<std::string, std::string> inputs;   // path -> sha256
  std::vector<std::string> outputs;            // relative to out dir
  std::vector<std::string> notes;
};

void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec)
    throw Error("pipeline.io", "cannot create directory " + p.string() + ": " +
                                   ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  ensure_dir(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error("pipeline.io", "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error("pipeline.io", "failed writing " + path.string());
}

void write_report(const PipelineConfig& cfg, RunLog& log,
                  const std::string& rel, const nlohmann::json& j) {
  write_text(fs::path(cfg.out) / rel, j.dump(2) + "\n");
  log.outputs.push_back(rel);
}

nlohmann::json read_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error("pipeline.missing_upstream",
                path.string() + " not found; run the upstream command first");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error("pipeline.bad_report", path.string() + ": " + e.what());
  }
}

const DateRange& window_for(const PipelineConfig& cfg, RateKind kind) {
  switch (kind) {
    case RateKind::InfectionSpeed:
      return cfg.window_speed;
    case RateKind::DeathRate:
      return cfg.window_death;
    case RateKind::FatalityRatio:
      return cfg.window_fatality;
  }
  throw Error("pipeline.bad_config", "unknown rate kind");
}

void require_input(const std::string& what, const std::string& path) {
  if (path.empty())
    throw Error("pipeline.bad_config", "no " + what + " path configured");
  if (!fs::exists(path))
    throw Error("pipeline.missing_input", what + " file not found: " + path);
}

void ensure_ingested(const PipelineConfig& cfg, StageState& state,
                     RunLog& log) {
  if (state.ingested) return;
  require_input("data", cfg.data);
  require_input("population", cfg.population);
  auto raw = load_cumulative(cfg.data);
  state.pop = load_population(cfg.population);
  auto [corpus, report] = validate(raw, cfg.policy);
  state.corpus = std::move(corpus);
  state.report = std::move(report);
  check_population_coverage(state.corpus, state.pop);
  state.ingested = true;

  log.inputs[cfg.data] = sha256_file(cfg.data);
  log.inputs[cfg.population] = sha256_file(cfg.population);

  int repaired = 0;
  for (const auto& issue : state.report.issues) repaired += issue.repaired;
  log.notes.push_back(
      "validation: " + std::to_string(state.report.issues.size()) +
      " issue(s), " + std::to_string(repaired) + " repaired, policy " +
      std::string(policy_name(cfg.policy)));

  // Surface the sharpest reporting discontinuity in the inputs.
  const CumulativeRecord* prev = nullptr;
  std::int64_t jump = 0;
  std::string where;
  for (const auto& rec : state.corpus.records()) {
    if (prev && prev->city == rec.city && rec.date == prev->date + 1 &&
        rec.cum_confirmed - prev->cum_confirmed > jump) {
      jump = rec.cum_confirmed - prev->cum_confirmed;
      where = rec.city + " on " + rec.date.to_string();
    }
    prev = &rec;
  }
  if (jump > 0)
    log.notes.push_back("largest one-day confirmed increase: +" +
                        std::to_string(jump) + " in " + where);
}

void ensure_surfaces(const PipelineConfig& cfg, StageState& state,
                     RunLog& log) {
  ensure_ingested(cfg, state, log);
  if (!state.surfaces.empty()) return;
  for (RateKind kind : kKinds)
    state.surfaces.emplace(
        kind, rate_surface(state.corpus, state.pop, kind, window_for(cfg, kind)));
}

void stage_ingest(const PipelineConfig& cfg, StageState& state, RunLog& log) {
  ensure_ingested(cfg, state, log);
  write_report(cfg, log, "validation.json", state.report.to_json());
}

void stage_rates(const PipelineConfig& cfg, StageState& state, RunLog& log) {
  ensure_surfaces(cfg, state, log);
  for (RateKind kind : kKinds) {
    auto name = std::string(rate_kind_name(kind));
    const auto& surface = state.surfaces.at(kind);
    auto surface_rel = "rates/" + name + ".csv";
    auto stats_rel = "rates/" + name + "_stats.csv";
    ensure_dir(fs::path(cfg.out) / "rates");
    write_surface_csv(surface, (fs::path(cfg.out) / surface_rel).string());
    write_stats_csv(surface, (fs::path(cfg.out) / stats_rel).string());
    log.outputs.push_back(surface_rel);
    log.outputs.push_back(stats_rel);
  }
}

void stage_fit(const PipelineConfig& cfg, StageState& state, RunLog& log) {
  ensure_surfaces(cfg, state, log);
  FitOptions options = cfg.fitting;
  options.seed = cfg.seed;
  nlohmann::json selection = nlohmann::json::object();
  for (RateKind kind : kKinds) {
    auto name = std::string(rate_kind_name(kind));
    const auto& surface = state.surfaces.at(kind);
    auto sel = daily_selection(surface, cfg.catalog, options);
    auto trace = refit_winner(surface, sel.winner, options);
    selection[name] = sel.to_json();
    auto trace_rel = "fits/trace_" + name + ".csv";
    ensure_dir(fs::path(cfg.out) / "fits");
    write_trace_csv(trace, (fs::path(cfg.out) / trace_rel).string());
    log.outputs.push_back(trace_rel);
    state.selections.emplace(kind, std::move(sel));
    state.traces.emplace(kind, std::move(trace));
  }
  write_report(cfg, log, "fits/selection.json", selection);
}

/// Loads the fit outputs from disk for the standalone meta command.
void load_fit_outputs(const PipelineConfig& cfg, StageState& state) {
  auto selection = read_json_file(fs::path(cfg.out) / "fits" / "selection.json");
  for (RateKind kind : kKinds) {
    auto name = std::string(rate_kind_name(kind));
    if (!selection.contains(name))
      throw Error("pipeline.bad_report",
                  "fits/selection.json has no '" + name + "' entry");
    auto winner =
        family_from_name(selection.at(name).at("winner").get<std::string>());
    auto trace_path = fs::path(cfg.out) / "fits" / ("trace_" + name + ".csv");
    if (!fs::exists(trace_path))
      throw Error("pipeline.missing_upstream",
                  trace_path.string() + " not found; run the fit command first");
    state.traces.emplace(kind, load_trace_csv(trace_path.string(), winner));
  }
}

void stage_meta(const PipelineConfig& cfg, StageState& state, RunLog& log) {
  if (state.traces.empty()) load_fit_outputs(cfg, state);
  FitOptions options = cfg.fitting;
  options.seed = mix_seed(cfg.seed, 0x4E7AULL);
  for (RateKind kind : kKinds) {
    auto name = std::string(rate_kind_name(kind));
    const auto& trace = state.traces.at(kind);
    auto stats_rel = "meta/stats_" + name + ".csv";
    ensure_dir(fs::path(cfg.out) / "meta");
    write_trace_stats_csv(trace_stats(trace),
                          (fs::path(cfg.out) / stats_rel).string());
    log.outputs.push_back(stats_rel);

    auto fits = fit_all_parameters(trace, cfg.catalog, options);
    nlohmann::json fit_list = nlohmann::json::array();
    for (const auto& f : fits) fit_list.push_back(parameter_fit_to_json(f));
    nlohmann::json doc{{"kind", name},
                       {"family", std::string(family_name(trace.id))},
                       {"excluded_days", trace.failures.size()},
                       {"fits", std::move(fit_list)}};
    write_report(cfg, log, "meta/paramfits_" + name + ".json", doc);
    state.paramfits.emplace(kind, std::move(fits));
  }
}

struct EventSource {
  RateKind kind;
  std::string param;
};

EventSource event_source(const std::string& name) {
  if (name == "mu_s") return {RateKind::InfectionSpeed, "mu"};
  if (name == "mu_d") return {RateKind::DeathRate, "mu"};
  if (name == "xi") return {RateKind::FatalityRatio, "xi"};
  throw Error("pipeline.unknown_event_param",
              "no source series for event parameter '" + name + "'");
}

/// Best second-stage model of one event parameter, from memory or from the
/// meta reports on disk.
Distribution component_model(const PipelineConfig& cfg, StageState& state,
                             const std::string& event_param) {
  auto src = event_source(event_param);
  auto it = state.paramfits.find(src.kind);
  if (it != state.paramfits.end()) {
    for (const auto& fit : it->second)
      if (fit.param == src.param)
        return Distribution{fit.best.id, fit.best.params};
    throw Error("pipeline.missing_event_param",
                "the fitted " + std::string(rate_kind_name(src.kind)) +
                    " family has no parameter '" + src.param + "' for " +
                    event_param);
  }
  auto name = std::string(rate_kind_name(src.kind));
  auto doc = read_json_file(fs::path(cfg.out) / "meta" /
                            ("paramfits_" + name + ".json"));
  for (const auto& fit : doc.at("fits"))
    if (fit.at("param").get<std::string>() == src.param)
      return distribution_from_json(fit.at("best"));
  throw Error("pipeline.missing_event_param",
              "meta/paramfits_" + name + ".json has no parameter '" +
                  src.param + "' for " + event_param);
}

void stage_contract(const PipelineConfig& cfg, StageState& state, RunLog& log) {
  require_input("contract", cfg.contract_path);
  auto spec = ContractSpec::from_json(read_json_file(cfg.contract_path));
  log.inputs[cfg.contract_path] = sha256_file(cfg.contract_path);
  std::vector<Distribution> components;
  for (const auto& name : spec.event_params)
    components.push_back(component_model(cfg, state, name));
  auto report = pricing_report(spec, components, cfg.mc_draws,
                               mix_seed(cfg.seed, 0xC0DEULL), {0.95, 0.99},
                               cfg.workers);
  report["contract"] = spec.to_json();
  write_report(cfg, log, "contract/pricing.json", report);
}

void write_manifest(const PipelineConfig& cfg, const std::string& command,
                    RunLog& log) {
  nlohmann::json inputs = nlohmann::json::object();
  for (const auto& [path, digest] : log.inputs) inputs[path] = digest;
  std::sort(log.outputs.begin(), log.outputs.end());
  nlohmann::json outputs = nlohmann::json::object();
  for (const auto& rel : log.outputs)
    outputs[rel] = sha256_file((fs::path(cfg.out) / rel).string());
  nlohmann::json manifest{{"command", command},
                          {"config", cfg.to_json()},
                          {"seed", cfg.seed},
                          {"inputs", std::move(inputs)},
                          {"outputs", std::move(outputs)},
                          {"notes", log.notes}};
  write_text(fs::path(cfg.out) / "run_manifest.json", manifest.dump(2) + "\n");
}

void check_csv_header(const fs::path& path, const std::string& expected,
                      std::vector<std::string>& problems) {
  std::ifstream in(path, std::ios::binary);
  std::string line;
  if (!in || !std::getline(in, line)) {
    problems.push_back(path.string() + ": unreadable");
    return;
  }
  if (line != expected)
    problems.push_back(path.string() + ": header is '" + line + "', expected '" +
                       expected + "'");
}

void check_keys(const nlohmann::json& j, const std::vector<std::string>& keys,
                const std::string& where, std::vector<std::string>& problems) {
  for (const auto& k : keys)
    if (!j.contains(k)) problems.push_back(where + ": missing key '" + k + "'");
}

}  // namespace

nlohmann::json PipelineConfig::to_json() const {
  nlohmann::json cat = nlohmann::json::array();
  for (auto id : catalog) cat.push_back(std::string(family_name(id)));
  return {{"data", data},
          {"population", population},
          {"policy", std::string(policy_name(policy))},
          {"windows",
           {{"speed", window_speed.to_string()},
            {"death", window_death.to_string()},
            {"fatality", window_fatality.to_string()}}},
          {"catalog", std::move(cat)},
          {"fitting",
           {{"restarts", fitting.restarts},
            {"max_iters", fitting.max_iters},
            {"tol", fitting.tol},
            {"min_day_sample", fitting.min_day_sample}}},
          {"contract", contract_path},
          {"out", out},
          {"seed", seed},
          {"mc_draws", mc_draws}};
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
  static const std::vector<std::string> known{
      "data",    "population", "policy", "windows", "catalog",
      "fitting", "contract",   "out",    "seed",    "mc_draws",
      "workers"};
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw Error("pipeline.bad_config", "unknown config field '" + key + "'");
  }
  try {
    PipelineConfig cfg;
    if (j.contains("data")) cfg.data = j.at("data").get<std::string>();
    if (j.contains("population"))
      cfg.population = j.at("population").get<std::string>();
    if (j.contains("policy"))
      cfg.policy = policy_from_name(j.at("policy").get<std::string>());
    if (j.contains("windows")) {
      const auto& w = j.at("windows");
      static const std::vector<std::string> wkeys{"speed", "death", "fatality"};
      for (const auto& [key, value] : w.items()) {
        (void)value;
        if (std::find(wkeys.begin(), wkeys.end(), key) == wkeys.end())
          throw Error("pipeline.bad_config",
                      "unknown window field '" + key + "'");
      }
      if (w.contains("speed"))
        cfg.window_speed = DateRange::parse(w.at("speed").get<std::string>());
      if (w.contains("death"))
        cfg.window_death = DateRange::parse(w.at("death").get<std::string>());
      if (w.contains("fatality"))
        cfg.window_fatality =
            DateRange::parse(w.at("fatality").get<std::string>());
    }
    if (j.contains("catalog")) {
      cfg.catalog.clear();
      for (const auto& name : j.at("catalog"))
        cfg.catalog.push_back(family_from_name(name.get<std::string>()));
    }
    if (j.contains("fitting")) {
      const auto& f = j.at("fitting");
      if (f.contains("restarts")) cfg.fitting.restarts = f.at("restarts");
      if (f.contains("max_iters")) cfg.fitting.max_iters = f.at("max_iters");
      if (f.contains("tol")) cfg.fitting.tol = f.at("tol");
      if (f.contains("min_day_sample"))
        cfg.fitting.min_day_sample = f.at("min_day_sample");
    }
    if (j.contains("contract"))
      cfg.contract_path = j.at("contract").get<std::string>();
    if (j.contains("out")) cfg.out = j.at("out").get<std::string>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("mc_draws"))
      cfg.mc_draws = j.at("mc_draws").get<std::uint64_t>();
    if (j.contains("workers")) cfg.workers = j.at("workers").get<int>();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw Error("pipeline.bad_config", e.what());
  }
}

std::vector<std::string> check_schemas(const std::string& out_dir) {
  std::vector<std::string> problems;
  fs::path root(out_dir);
  auto manifest_path = root / "run_manifest.json";
  if (!fs::exists(manifest_path)) {
    problems.push_back(manifest_path.string() + ": not found");
    return problems;
  }
  nlohmann::json manifest;
  try {
    manifest = read_json_file(manifest_path);
  } catch (const Error& e) {
    problems.push_back(e.what());
    return problems;
  }
  check_keys(manifest,
             {"command", "config", "seed", "inputs", "outputs", "notes"},
             "run_manifest.json", problems);
  if (!manifest.contains("outputs")) return problems;

  for (const auto& [rel, digest] : manifest.at("outputs").items()) {
    fs::path path = root / rel;
    if (!fs::exists(path)) {
      problems.push_back(rel + ": listed in manifest but missing");
      continue;
    }
    if (sha256_file(path.string()) != digest.get<std::string>())
      problems.push_back(rel + ": checksum does not match the manifest");

    if (rel == "validation.json") {
      check_keys(read_json_file(path), {"issues"}, rel, problems);
    } else if (rel == "fits/selection.json") {
      auto doc = read_json_file(path);
      for (const char* kind : {"speed", "death", "fatality"}) {
        if (!doc.contains(kind)) {
          problems.push_back(std::string(rel) + ": missing kind '" + kind + "'");
          continue;
        }
        check_keys(doc.at(kind),
                   {"kind", "total_days", "winner", "winner_day_count",
                    "first_place_counts", "skipped_days", "per_day"},
                   std::string(rel) + ":" + kind, problems);
      }
    } else if (rel == "contract/pricing.json") {
      check_keys(read_json_file(path),
                 {"estimate", "std_error", "n", "seed", "currency",
                  "es_levels", "contract"},
                 rel, problems);
    } else if (rel.rfind("meta/paramfits_", 0) == 0) {
      auto doc = read_json_file(path);
      check_keys(doc, {"kind", "family", "fits"}, rel, problems);
      if (doc.contains("fits"))
        for (const auto& fit : doc.at("fits"))
          check_keys(fit, {"param", "best", "ranked"}, rel + ":fit", problems);
    } else if (rel.rfind("meta/stats_", 0) == 0) {
      check_csv_header(path, "param,mean,sd,median,min,max,skewness,kurtosis",
                       problems);
    } else if (rel.rfind("fits/trace_", 0) == 0) {
      std::ifstream in(path, std::ios::binary);
      std::string header;
      if (!in || !std::getline(in, header) || header.rfind("date,", 0) != 0 ||
          header.find(",converged") == std::string::npos)
        problems.push_back(rel + ": malformed trace header");
    } else if (rel.rfind("rates/", 0) == 0 &&
               rel.find("_stats") != std::string::npos) {
      check_csv_header(
          path, "date,mean,sd,median,min,max,skewness,excess_kurtosis,n",
          problems);
    } else if (rel.rfind("rates/", 0) == 0) {
      check_csv_header(path, "date,city,value,status,reason", problems);
    }
  }
  return problems;
}

int run_pipeline(const std::string& command, const PipelineConfig& config) {
  if (command == "schema-check") {
    auto problems = check_schemas(config.out);
    for (const auto& p : problems) std::cerr << p << "\n";
    if (problems.empty())
      std::cout << "all reports in " << config.out << " conform\n";
    return problems.empty() ? 0 : 1;
  }

  StageState state;
  RunLog log;
  try {
    if (command == "ingest") {
      stage_ingest(config, state, log);
    } else if (command == "rates") {
      stage_rates(config, state, log);
    } else if (command == "fit") {
      stage_fit(config, state, log);
    } else if (command == "meta") {
      stage_meta(config, state, log);
    } else if (command == "contract") {
      stage_contract(config, state, log);
    } else if (command == "all") {
      stage_ingest(config, state, log);
      stage_rates(config, state, log);
      stage_fit(config, state, log);
      stage_meta(config, state, log);
      stage_contract(config, state, log);
    } else {
      throw Error("pipeline.bad_command", "unknown command '" + command + "'");
    }
    write_manifest(config, command, log);
    return 0;
  } catch (const Error& e) {
    std::cerr << "error [" << e.code() << "]: " << e.what() << "\n";
    try {
      write_text(fs::path(config.out) / "error.json",
                 nlohmann::json{{"command", command},
                                {"code", e.code()},
                                {"message", e.what()}}
                         .dump(2) +
                     "\n");
    } catch (const Error&) {
      // error report is best effort; the exit status carries the failure
    }
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    try {
      write_text(fs::path(config.out) / "error.json",
                 nlohmann::json{{"command", command},
                                {"code", "pipeline.unexpected"},
                                {"message", e.what()}}
                         .dump(2) +
                     "\n");
    } catch (const Error&) {
    }
    return 1;
  }
}

}  // namespace epicap
