#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "epicap/error.hpp"
#include "epicap/pipeline.hpp"

namespace {

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Epidemic rate surfaces, per-day distribution selection and parametric "
      "contract pricing"};
  app.require_subcommand(1);

  std::string config_path, data, population, policy, window_speed,
      window_death, window_fatality, catalog, contract_path, out;
  std::uint64_t seed = 0, mc_draws = 0;
  int workers = 0, restarts = 0, max_iters = 0, min_day_sample = 0;
  double tol = 0;

  auto* opt_config =
      app.add_option("--config", config_path, "JSON config file");
  auto* opt_data = app.add_option("--data", data, "cumulative counts CSV");
  auto* opt_pop =
      app.add_option("--population", population, "city population CSV");
  auto* opt_policy =
      app.add_option("--policy", policy, "validation policy: strict|clamp");
  auto* opt_ws = app.add_option("--window-speed", window_speed,
                                "infection speed window YYYY-MM-DD:YYYY-MM-DD");
  auto* opt_wd = app.add_option("--window-death", window_death,
                                "death rate window YYYY-MM-DD:YYYY-MM-DD");
  auto* opt_wf = app.add_option("--window-fatality", window_fatality,
                                "fatality ratio window YYYY-MM-DD:YYYY-MM-DD");
  auto* opt_catalog = app.add_option(
      "--catalog", catalog, "comma-separated families to fit each day");
  auto* opt_seed = app.add_option("--seed", seed, "master seed");
  auto* opt_out = app.add_option("--out", out, "output directory");
  auto* opt_contract =
      app.add_option("--contract", contract_path, "contract spec JSON");
  auto* opt_draws =
      app.add_option("--mc-draws", mc_draws, "Monte Carlo pricing draws");
  auto* opt_workers =
      app.add_option("--workers", workers, "worker threads (0 = auto)");
  auto* opt_restarts = app.add_option("--fitting.restarts", restarts,
                                      "jittered starts per fit");
  auto* opt_iters = app.add_option("--fitting.max_iters", max_iters,
                                   "simplex iterations per start");
  auto* opt_tol =
      app.add_option("--fitting.tol", tol, "simplex convergence threshold");
  auto* opt_min_day = app.add_option("--fitting.min_day_sample", min_day_sample,
                                     "smallest usable cross-section");

  for (const char* name :
       {"ingest", "rates", "fit", "meta", "contract", "all", "schema-check"}) {
    auto* sub = app.add_subcommand(name);
    sub->fallthrough();
  }

  CLI11_PARSE(app, argc, argv);

  try {
    epicap::PipelineConfig cfg;
    if (opt_config->count()) {
      std::ifstream in(config_path, std::ios::binary);
      if (!in)
        throw epicap::Error("pipeline.missing_input",
                            "config file not found: " + config_path);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw epicap::Error("pipeline.bad_config",
                            config_path + ": " + e.what());
      }
      cfg = epicap::PipelineConfig::from_json(j);
    }
    if (opt_data->count()) cfg.data = data;
    if (opt_pop->count()) cfg.population = population;
    if (opt_policy->count()) {
      nlohmann::json patch{{"policy", policy}};
      cfg.policy = epicap::PipelineConfig::from_json(patch).policy;
    }
    if (opt_ws->count()) cfg.window_speed = epicap::DateRange::parse(window_speed);
    if (opt_wd->count()) cfg.window_death = epicap::DateRange::parse(window_death);
    if (opt_wf->count())
      cfg.window_fatality = epicap::DateRange::parse(window_fatality);
    if (opt_catalog->count()) {
      cfg.catalog.clear();
      for (const auto& name : split_csv(catalog))
        cfg.catalog.push_back(epicap::family_from_name(name));
    }
    if (opt_seed->count()) cfg.seed = seed;
    if (opt_out->count()) cfg.out = out;
    if (opt_contract->count()) cfg.contract_path = contract_path;
    if (opt_draws->count()) cfg.mc_draws = mc_draws;
    if (opt_workers->count()) cfg.workers = workers;
    if (opt_restarts->count()) cfg.fitting.restarts = restarts;
    if (opt_iters->count()) cfg.fitting.max_iters = max_iters;
    if (opt_tol->count()) cfg.fitting.tol = tol;
    if (opt_min_day->count()) cfg.fitting.min_day_sample = min_day_sample;

    return epicap::run_pipeline(app.get_subcommands().front()->get_name(), cfg);
  } catch (const epicap::Error& e) {
    std::cerr << "error [" << e.code() << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
