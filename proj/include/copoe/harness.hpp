#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "copoe/checks.hpp"
#include "copoe/driver.hpp"
#include "copoe/linmdp_env.hpp"
#include "json.hpp"

namespace copoe {

struct EnvSpec {
  std::string path;  // env file; empty means generate
  std::string kind = "random";  // random | lock | aggregated
  int states = 5;
  int actions = 2;
  int dim = 3;
  int horizon = 8;
  int clusters = 0;  // aggregated: number of clusters (states are assigned round-robin)
  std::uint64_t seed = 0;
  double gamma = 0.9;
};

struct ExperimentSpec {
  EnvSpec env;
  CopoeConfig config;
  int repeat = 1;
  std::vector<std::uint64_t> seeds;
  std::string out_dir = "out";
  std::vector<std::string> checks;
  /// Every effective parameter: {"value": ..., "source": rule}.
  nlohmann::json effective = nlohmann::json::object();
};

/// Strict flat-JSON config. Unknown keys, bad types and range violations throw
/// ConfigError naming the key.
ExperimentSpec parse_config(const std::filesystem::path& path);
ExperimentSpec parse_config_text(const std::string& text,
                                 const std::filesystem::path& base_dir = {});

/// Keys accepted by parse_config, in documentation order.
const std::vector<std::string>& config_keys();

LinearMdp build_env(const EnvSpec& env);

std::string kind_of(const LinearMdp& mdp);

/// Writes the telemetry table with the stable header.
void write_telemetry_csv(const RunTelemetry& telemetry, std::ostream& out);
inline constexpr const char* kTelemetryHeader =
    "n,refreshed,solver_calls,samples_used,log_det,known_frac,subopt,mean_bonus";

/// Probability tables of the candidate outputs plus the final snapshot.
nlohmann::json policy_document(const LinearMdp& mdp, const RunResult& result);

/// Runs all seeds, writes outputs, returns 0 iff every requested check passed.
int run_experiment(const ExperimentSpec& spec, std::ostream& log);

/// Names accepted by check_properties.
const std::vector<std::string>& suite_names();

/// Runs the named suites at a size multiplier (1.0 = acceptance scale).
std::vector<CheckResult> check_properties(const std::vector<std::string>& suites, double scale,
                                          std::uint64_t seed = 0);

void print_check(const CheckResult& r, std::ostream& out);

/// Cartesian sweep over `axes` (key -> values) applied on top of a base config
/// document; one output directory per point. Returns the number of failed points.
int sweep(const nlohmann::json& base, const std::map<std::string, std::vector<nlohmann::json>>& axes,
          const std::filesystem::path& base_dir, const std::string& out_dir, std::ostream& log);

}  // namespace copoe
