#include <cstdlib>
#include <fstream>

#include <nlohmann/json.hpp>

#include "maneuver/bench/simulated_plant.hpp"
#include "maneuver/config.hpp"
#include "maneuver/gateway/backends.hpp"
#include "maneuver/util/strings.hpp"

namespace maneuver {

namespace {

using nlohmann::json;

std::filesystem::path path_or(const json& j, const char* key,
                              const std::filesystem::path& fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return std::filesystem::path(j.at(key).get<std::string>());
}

void parse_backend(const json& j, BackendSettings& backend) {
  backend.kind = j.value("kind", backend.kind);
  backend.model_id = j.value("model_id", backend.model_id);
  backend.base_url = j.value("base_url", backend.base_url);
  backend.api_key = j.value("api_key", backend.api_key);
  backend.script_path = path_or(j, "script", backend.script_path);
  backend.replay_dir = path_or(j, "replay_dir", backend.replay_dir);
  backend.record_dir = path_or(j, "record_dir", backend.record_dir);
  if (j.contains("failure_rates")) {
    backend.failure_rates.clear();
    for (const auto& [tag, rate] : j.at("failure_rates").items()) {
      backend.failure_rates.emplace_back(tag, rate.get<double>());
    }
  }
  backend.critique_fix_rate = j.value("critique_fix_rate", backend.critique_fix_rate);
  backend.advisory_suppress_rate =
      j.value("advisory_suppress_rate", backend.advisory_suppress_rate);
  if (j.contains("sim_seed")) backend.sim_seed = j.at("sim_seed").get<std::uint64_t>();
}

void parse_limits(const json& j, control::RunConfig& limits) {
  limits.max_steps = j.value("max_steps", limits.max_steps);
  limits.answer_retries = j.value("answer_retries", limits.answer_retries);
  limits.guard_cap = j.value("guard_cap", limits.guard_cap);
  limits.temperature = j.value("temperature", limits.temperature);
  limits.max_output_tokens = j.value("max_output_tokens", limits.max_output_tokens);
  limits.fingerprint_budget_tokens =
      j.value("fingerprint_budget_tokens", limits.fingerprint_budget_tokens);
}

}  // namespace

ExperimentConfig load_experiment_config(const std::optional<std::filesystem::path>& path) {
  ExperimentConfig config;
  if (!path) return config;

  std::ifstream in(*path);
  if (!in) throw ConfigError(util::cat("cannot open config file ", path->string()));
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(util::cat("config file ", path->string(), ": ", e.what()));
  }
  if (!doc.is_object()) throw ConfigError("config file must hold a JSON object");

  try {
    config.dataset_path = path_or(doc, "dataset", config.dataset_path);
    if (doc.contains("subset") && !doc.at("subset").is_null()) {
      config.subset_path = std::filesystem::path(doc.at("subset").get<std::string>());
    }
    if (doc.contains("mode")) {
      config.mode = control::run_mode_from_name(doc.at("mode").get<std::string>());
    }
    config.rounds = doc.value("rounds", config.rounds);
    config.seed = doc.value("seed", config.seed);
    config.parallelism = doc.value("parallelism", config.parallelism);
    config.out_dir = path_or(doc, "out_dir", config.out_dir);
    config.fingerprint_path = path_or(doc, "fingerprint", config.fingerprint_path);
    config.prompt_dir = path_or(doc, "prompt_dir", config.prompt_dir);
    if (doc.contains("backend")) parse_backend(doc.at("backend"), config.backend);
    if (doc.contains("limits")) parse_limits(doc.at("limits"), config.run_template);
  } catch (const json::exception& e) {
    throw ConfigError(util::cat("config file ", path->string(), ": ", e.what()));
  } catch (const Error& e) {
    throw ConfigError(util::cat("config file ", path->string(), ": ", e.what()));
  }
  config.run_template.model_id = config.backend.model_id;
  return config;
}

void apply_env_overrides(ExperimentConfig& config,
                         const std::map<std::string, std::string>& env) {
  auto get = [&env](const char* name) -> const std::string* {
    auto it = env.find(name);
    return it == env.end() || it->second.empty() ? nullptr : &it->second;
  };
  if (const auto* v = get("MANEUVER_API_KEY")) config.backend.api_key = *v;
  if (const auto* v = get("MANEUVER_BASE_URL")) config.backend.base_url = *v;
  if (const auto* v = get("MANEUVER_MODEL")) {
    config.backend.model_id = *v;
    config.run_template.model_id = *v;
  }
  if (const auto* v = get("MANEUVER_PROMPT_DIR")) config.prompt_dir = *v;
}

void apply_process_env(ExperimentConfig& config) {
  std::map<std::string, std::string> env;
  for (const char* name :
       {"MANEUVER_API_KEY", "MANEUVER_BASE_URL", "MANEUVER_MODEL", "MANEUVER_PROMPT_DIR"}) {
    if (const char* value = std::getenv(name)) env[name] = value;
  }
  apply_env_overrides(config, env);
}

void validate_config(const ExperimentConfig& config) {
  if (config.rounds < 1) throw ConfigError("rounds must be >= 1");
  if (config.parallelism < 1) throw ConfigError("parallelism must be >= 1");
  const auto& kind = config.backend.kind;
  if (kind != "remote" && kind != "scripted" && kind != "replay" && kind != "simulated") {
    throw ConfigError(util::cat("unknown backend kind '", kind, "'"));
  }
  if (kind == "remote" && config.backend.base_url.empty()) {
    throw ConfigError("remote backend needs base_url (or MANEUVER_BASE_URL)");
  }
  if (kind == "replay" && config.backend.replay_dir.empty()) {
    throw ConfigError("replay backend needs replay_dir");
  }
  if (config.mode == control::RunMode::composite && config.fingerprint_path.empty()) {
    throw ConfigError("composite mode needs a fingerprint path");
  }
  for (const auto& [tag, rate] : config.backend.failure_rates) {
    if (tag.empty() || rate < 0.0 || rate > 1.0) {
      throw ConfigError(util::cat("bad failure rate for '", tag, "'"));
    }
  }
}

BackendHandle make_backend(const BackendSettings& settings, std::uint64_t experiment_seed) {
  BackendHandle handle;
  if (settings.kind == "remote") {
    gateway::RemoteOptions options;
    options.base_url = settings.base_url;
    options.api_key = settings.api_key;
    handle.inner = std::make_unique<gateway::RemoteBackend>(options);
  } else if (settings.kind == "replay") {
    handle.inner = std::make_unique<gateway::ReplayBackend>(settings.replay_dir);
  } else if (settings.kind == "simulated") {
    bench::FailureProfile profile;
    profile.rates = settings.failure_rates;
    profile.critique_fix_rate = settings.critique_fix_rate;
    profile.advisory_suppress_rate = settings.advisory_suppress_rate;
    handle.inner = std::make_unique<bench::SimulatedPlant>(
        std::move(profile), settings.sim_seed.value_or(experiment_seed));
  } else if (settings.kind == "scripted") {
    auto scripted = std::make_unique<gateway::ScriptedBackend>();
    if (!settings.script_path.empty()) {
      std::ifstream in(settings.script_path);
      if (!in) {
        throw ConfigError(util::cat("cannot open script file ", settings.script_path.string()));
      }
      json doc;
      try {
        doc = json::parse(in);
      } catch (const json::exception& e) {
        throw ConfigError(util::cat("script file: ", e.what()));
      }
      std::string fallback;
      for (const auto& [tag, replies] : doc.items()) {
        if (tag == "*") {
          fallback = replies.get<std::string>();
          continue;
        }
        if (replies.is_string()) {
          scripted->push_reply(tag, replies.get<std::string>());
        } else {
          for (const auto& reply : replies) {
            scripted->push_reply(tag, reply.get<std::string>());
          }
        }
      }
      if (!fallback.empty()) {
        scripted->set_handler([fallback](const gateway::ChatRequest&) { return fallback; });
      }
    }
    handle.inner = std::move(scripted);
  } else {
    throw ConfigError(util::cat("unknown backend kind '", settings.kind, "'"));
  }

  if (!settings.record_dir.empty()) {
    handle.recorder =
        std::make_unique<gateway::RecordingBackend>(*handle.inner, settings.record_dir);
  }
  return handle;
}

}  // namespace maneuver
