#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "shrinksel/model.hpp"
#include "shrinksel/samplers.hpp"
#include "shrinksel/selection.hpp"
#include "shrinksel/simulation.hpp"

namespace shrinksel::cli {

/// Everything a run can be configured with. Loaded from a JSON file, then
/// overridden by environment (output dir, jobs) and finally by flags.
struct RunConfig {
  SimConfig simulation;
  PriorSpec prior = PriorSpec::horseshoe();
  McmcConfig mcmc;
  S2mConfig selection;
  std::vector<Method> methods{Method::S2M, Method::TwoM, Method::CS, Method::HT};
  std::filesystem::path output_dir = "out";
  std::size_t jobs = 1;

  void validate() const;
};

RunConfig load_config(const std::filesystem::path& path);
void apply_json(const nlohmann::json& j, RunConfig& cfg);
nlohmann::json to_json(const RunConfig& cfg);

/// SHRINKSEL_OUTPUT_DIR and SHRINKSEL_JOBS.
void apply_environment(RunConfig& cfg);

/// "15x3,4x7" -> {15,15,15,4,4,4,4,4,4,4}
std::vector<double> parse_strengths(const std::string& spec);

/// "0.94,0.95" or "0.05:0.95:0.05" (inclusive end).
std::vector<double> parse_grid(const std::string& spec);

std::vector<Method> parse_methods(const std::string& spec);

}  // namespace shrinksel::cli
