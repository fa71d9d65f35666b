#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "maneuver/control/loop.hpp"
#include "maneuver/gateway/chat.hpp"

namespace maneuver {

// Which completion source an experiment talks to and how to reach it.
struct BackendSettings {
  std::string kind = "scripted";  // remote | scripted | replay | simulated
  std::string model_id = "scripted-model";

  // remote
  std::string base_url;
  std::string api_key;

  // scripted: JSON file of request_tag -> reply string or array of replies;
  // the "*" entry answers anything unscripted.
  std::filesystem::path script_path;

  // replay: directory of recorded responses
  std::filesystem::path replay_dir;

  // when set, every response is also recorded here (any kind)
  std::filesystem::path record_dir;

  // simulated
  std::vector<std::pair<std::string, double>> failure_rates;
  double critique_fix_rate = 0.5;
  double advisory_suppress_rate = 0.8;
  std::optional<std::uint64_t> sim_seed;  // defaults to the experiment seed
};

// Declarative description of one experiment. Everything has a default
// except the dataset path.
struct ExperimentConfig {
  std::filesystem::path dataset_path;
  std::optional<std::filesystem::path> subset_path;
  control::RunMode mode = control::RunMode::uncontrolled;
  int rounds = 3;
  std::uint64_t seed = 0;
  int parallelism = 1;
  std::filesystem::path out_dir = "experiment-out";
  std::filesystem::path fingerprint_path;  // required in composite mode
  std::filesystem::path prompt_dir;        // empty: built-in prompt assets
  BackendSettings backend;
  control::RunConfig run_template;
};

// Parses the JSON config file; a missing path yields all defaults.
ExperimentConfig load_experiment_config(const std::optional<std::filesystem::path>& path);

// MANEUVER_API_KEY, MANEUVER_BASE_URL, MANEUVER_MODEL, MANEUVER_PROMPT_DIR.
// Split from loading so tests can inject an environment.
void apply_env_overrides(ExperimentConfig& config,
                         const std::map<std::string, std::string>& env);
void apply_process_env(ExperimentConfig& config);

// Throws ConfigError on contradictions (composite without fingerprint,
// remote without base_url, unknown backend kind, bad rates).
void validate_config(const ExperimentConfig& config);

// A constructed backend plus the recorder that may wrap it; backend()
// is what callers talk to.
struct BackendHandle {
  std::unique_ptr<gateway::Backend> inner;
  std::unique_ptr<gateway::Backend> recorder;

  gateway::Backend& backend() { return recorder ? *recorder : *inner; }
};

BackendHandle make_backend(const BackendSettings& settings, std::uint64_t experiment_seed);

}  // namespace maneuver
