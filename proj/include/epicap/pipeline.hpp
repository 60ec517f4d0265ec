#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "epicap/corpus.hpp"
#include "epicap/dates.hpp"
#include "epicap/distributions.hpp"
#include "epicap/fitting.hpp"

namespace epicap {

/// Everything one invocation needs: inputs, analysis windows, catalog,
/// fitting options, contract location, output directory and the master seed.
struct PipelineConfig {
  std::string data;
  std::string population;
  ValidationPolicy policy = ValidationPolicy::Strict;
  DateRange window_speed{Date::from_ymd(2020, 1, 24), Date::from_ymd(2020, 3, 4)};
  DateRange window_death{Date::from_ymd(2020, 1, 29), Date::from_ymd(2020, 3, 4)};
  DateRange window_fatality{Date::from_ymd(2020, 1, 25),
                            Date::from_ymd(2020, 3, 17)};
  std::vector<DistributionId> catalog = default_catalog();
  FitOptions fitting;
  std::string contract_path;
  std::string out = "out";
  std::uint64_t seed = 2020;
  std::uint64_t mc_draws = 100000;
  int workers = 0;

  nlohmann::json to_json() const;
  /// Missing fields keep their defaults; unknown fields are rejected.
  static PipelineConfig from_json(const nlohmann::json& j);
};

/// Runs one subcommand (ingest | rates | fit | meta | contract | all |
/// schema-check) and writes its report files under config.out. Returns the
/// process exit status; failures also leave an error.json with the offending
/// code and message. `all` chains every stage in memory; the narrower
/// commands read whatever upstream reports they need from the output
/// directory.
int run_pipeline(const std::string& command, const PipelineConfig& config);

/// Validates every report in an output directory against its documented
/// layout and re-checks the manifest checksums; returns human-readable
/// problems, empty when everything conforms.
std::vector<std::string> check_schemas(const std::string& out_dir);

}  // namespace epicap
