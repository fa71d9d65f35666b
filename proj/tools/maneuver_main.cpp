#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "maneuver/bench/experiment.hpp"
#include "maneuver/bench/simulated_plant.hpp"
#include "maneuver/config.hpp"
#include "maneuver/lti/simulate.hpp"
#include "maneuver/sysid/identify.hpp"
#include "maneuver/util/strings.hpp"

namespace {

using namespace maneuver;
using nlohmann::json;

// Flags shared by run and identify. Empty/unset flags leave the config
// file's (or default) value in place; set flags win.
struct CommonFlags {
  std::optional<std::string> config_path;
  std::string dataset;
  std::string subset;
  std::string backend_kind;
  std::string model;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
};

void add_common_flags(CLI::App& cmd, CommonFlags& flags) {
  cmd.add_option("--config", flags.config_path, "JSON config file");
  cmd.add_option("--dataset", flags.dataset, "task dataset (JSONL)");
  cmd.add_option("--subset", flags.subset, "subset id list file");
  cmd.add_option("--backend", flags.backend_kind,
                 "backend kind: remote|scripted|replay|simulated");
  cmd.add_option("--model", flags.model, "model id sent with every request");
  cmd.add_option("--out", flags.out_dir, "artifact output directory");
  cmd.add_option("--seed", flags.seed, "experiment seed");
}

ExperimentConfig resolve_config(const CommonFlags& flags) {
  std::optional<std::filesystem::path> path;
  if (flags.config_path) path = *flags.config_path;
  ExperimentConfig config = load_experiment_config(path);
  apply_process_env(config);
  if (!flags.dataset.empty()) config.dataset_path = flags.dataset;
  if (!flags.subset.empty()) config.subset_path = flags.subset;
  if (!flags.backend_kind.empty()) config.backend.kind = flags.backend_kind;
  if (!flags.model.empty()) {
    config.backend.model_id = flags.model;
    config.run_template.model_id = flags.model;
  }
  if (!flags.out_dir.empty()) config.out_dir = flags.out_dir;
  if (flags.seed) config.seed = *flags.seed;
  return config;
}

PromptLibrary resolve_prompts(const ExperimentConfig& config) {
  if (config.prompt_dir.empty()) return PromptLibrary::builtin();
  return PromptLibrary::from_directory(config.prompt_dir);
}

std::vector<bench::TaskRecord> load_config_tasks(const ExperimentConfig& config) {
  if (config.dataset_path.empty()) {
    throw ConfigError("no dataset given (--dataset or config \"dataset\")");
  }
  return bench::load_tasks(config.dataset_path, config.subset_path);
}

int cmd_run(const CommonFlags& flags, const std::string& mode_flag,
            const std::optional<int>& rounds_flag, const std::optional<int>& parallelism_flag,
            const std::string& fingerprint_flag) {
  ExperimentConfig config = resolve_config(flags);
  if (!mode_flag.empty()) config.mode = control::run_mode_from_name(mode_flag);
  if (rounds_flag) config.rounds = *rounds_flag;
  if (parallelism_flag) config.parallelism = *parallelism_flag;
  if (!fingerprint_flag.empty()) config.fingerprint_path = fingerprint_flag;
  validate_config(config);

  auto tasks = load_config_tasks(config);
  auto prompts = resolve_prompts(config);
  auto handle = make_backend(config.backend, config.seed);
  auto tools = tools::make_builtin_registry({});

  sysid::PerformanceFingerprint fingerprint;
  control::RunEnv env;
  env.backend = &handle.backend();
  env.base_tools = &tools;
  env.prompts = &prompts;
  if (config.mode == control::RunMode::composite) {
    fingerprint = sysid::load_fingerprint(config.fingerprint_path);
    env.fingerprint = &fingerprint;
  }

  bench::ExperimentOptions options;
  options.mode = config.mode;
  options.rounds = config.rounds;
  options.seed = config.seed;
  options.run_template = config.run_template;
  options.parallelism = config.parallelism;
  options.out_dir = config.out_dir;

  auto artifacts = bench::run_experiment(tasks, options, env);
  std::cout << artifacts.report.to_markdown(std::string(control::run_mode_name(config.mode)));
  std::cout << "report: " << (config.out_dir / "report.json").string() << "\n";
  return 0;
}

int cmd_identify(const CommonFlags& flags, const std::string& eval_subset_flag) {
  ExperimentConfig config = resolve_config(flags);
  validate_config(config);

  auto corpus = load_config_tasks(config);
  auto prompts = resolve_prompts(config);
  auto handle = make_backend(config.backend, config.seed);
  auto tools = tools::make_builtin_registry({});

  control::RunEnv env;
  env.backend = &handle.backend();
  env.base_tools = &tools;
  env.prompts = &prompts;

  sysid::IdentifyOptions options;
  options.run_template = config.run_template;
  options.analyze.prompts = &prompts;
  options.analyze.model_id = config.backend.model_id;
  options.synthesize.prompts = &prompts;
  options.synthesize.model_id = config.backend.model_id;
  if (!eval_subset_flag.empty()) {
    options.eval_task_ids = bench::read_subset(eval_subset_flag);
  }
  options.out_dir = config.out_dir;

  auto fingerprint = sysid::identify(corpus, options, env);
  std::cout << "fingerprint: " << (config.out_dir / "fingerprint.json").string() << "\n";
  std::cout << "weakness tags: "
            << (fingerprint.weakness_tags.empty() ? "(none)"
                                                  : util::join(fingerprint.weakness_tags, ", "))
            << "\n";
  return 0;
}

std::vector<double> parse_poly(const std::string& text) {
  std::vector<double> coeffs;
  for (const auto& piece : util::split(text, ',')) {
    auto trimmed = util::trim(piece);
    if (trimmed.empty()) continue;
    std::size_t used = 0;
    coeffs.push_back(std::stod(std::string(trimmed), &used));
    if (used != trimmed.size()) {
      throw ConfigError(util::cat("bad coefficient '", std::string(trimmed), "'"));
    }
  }
  if (coeffs.empty()) throw ConfigError("empty coefficient list");
  return coeffs;
}

int cmd_simulate(const std::string& plant_num, const std::string& plant_den,
                 const std::string& ctrl_num, const std::string& ctrl_den, bool ideal_ff,
                 const std::optional<double>& approx_eps, double dt, int horizon,
                 double disturbance_amplitude, double reference_amplitude,
                 const std::string& trace_path) {
  lti::ClosedLoopSystem system;
  system.plant = lti::TransferFunction(parse_poly(plant_num), parse_poly(plant_den));
  system.feedback_controller = lti::TransferFunction(parse_poly(ctrl_num), parse_poly(ctrl_den));
  if (ideal_ff && approx_eps) throw ConfigError("--ideal-ff and --approx are exclusive");
  if (ideal_ff) {
    system.feedforward_controller = lti::ideal_feedforward(system.plant);
  } else if (approx_eps) {
    system.feedforward_controller = lti::proper_feedforward(system.plant, *approx_eps);
  }

  auto loop = lti::closed_loop(system);
  std::cout << "plant:            " << system.plant.describe() << "\n";
  std::cout << "feedback:         " << system.feedback_controller.describe() << "\n";
  if (system.feedforward_controller) {
    std::cout << "feedforward:      " << system.feedforward_controller->describe() << "\n";
  }
  std::cout << "from_reference:   " << loop.from_reference.describe() << "\n";
  std::cout << "from_disturbance: " << loop.from_disturbance.describe() << "\n";

  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", loop.from_reference.evaluate_real(0.0));
  std::cout << "reference gain:   " << buf << "\n";
  if (loop.from_disturbance.zero_numerator()) {
    std::cout << "cancellation: exact\n";
    std::cout << "disturbance gain: 0\n";
  } else {
    std::snprintf(buf, sizeof(buf), "%.10g", loop.from_disturbance.evaluate_real(0.0));
    std::cout << "disturbance gain: " << buf << "\n";
  }

  lti::SimOptions options;
  options.dt = dt;
  auto trace = lti::simulate(system, lti::step_signal(horizon, reference_amplitude),
                             lti::step_signal(horizon, disturbance_amplitude), options);
  std::snprintf(buf, sizeof(buf), "%.10g", trace.steady_state_y());
  std::cout << "steady-state y:   " << buf << " (" << horizon << " samples, dt " << dt << ")\n";

  if (!trace_path.empty()) {
    std::ofstream out(trace_path, std::ios::trunc);
    if (!out) throw Error(util::cat("cannot write trace file ", trace_path));
    trace.write_csv(out);
    std::cout << "trace: " << trace_path << "\n";
  }
  return 0;
}

int cmd_score(const std::string& dir_flag, const std::string& label) {
  namespace fs = std::filesystem;
  fs::path rounds_dir = fs::path(dir_flag) / "rounds";
  if (!fs::exists(rounds_dir)) rounds_dir = dir_flag;  // also accept the rounds dir itself

  std::vector<fs::path> files;
  if (fs::exists(rounds_dir)) {
    for (const auto& entry : fs::directory_iterator(rounds_dir)) {
      if (entry.path().extension() == ".json") files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error(util::cat("no round files under ", rounds_dir.string()));

  std::vector<std::string> task_ids;
  std::vector<std::vector<bool>> rounds;
  for (const auto& file : files) {
    std::ifstream in(file);
    json doc = json::parse(in);
    const auto& per_task = doc.at("per_task");
    if (task_ids.empty()) {
      for (const auto& [task_id, hit] : per_task.items()) task_ids.push_back(task_id);
    }
    std::vector<bool> hits;
    hits.reserve(task_ids.size());
    for (const auto& task_id : task_ids) {
      if (!per_task.contains(task_id)) {
        throw bench::RoundShapeMismatch(
            util::cat(file.filename().string(), " is missing task ", task_id));
      }
      hits.push_back(per_task.at(task_id).get<bool>());
    }
    if (per_task.size() != task_ids.size()) {
      throw bench::RoundShapeMismatch(
          util::cat(file.filename().string(), " covers a different task set"));
    }
    rounds.push_back(std::move(hits));
  }

  auto report = bench::aggregate(rounds);
  std::cout << report.to_markdown(label);
  return 0;
}

int cmd_replay(const std::string& runs_dir, const std::string& run_id) {
  store::DirRunStore store(runs_dir);
  auto run = store.load_run(run_id);

  std::cout << "run " << run.manifest.run_id << " | task " << run.manifest.task_id << " | mode "
            << run.manifest.mode << " | model " << run.manifest.model_id << "\n\n";
  for (const auto& step : run.steps) {
    std::cout << "[" << step.index << " | " << control::actor_name(step.actor) << "]\n";
    std::cout << step.content << "\n";
    if (step.tool_call) {
      std::cout << "(tool call: " << step.tool_call->name << " "
                << step.tool_call->arguments.dump() << ")\n";
    }
    std::cout << "\n";
  }
  if (run.result) {
    std::cout << "termination: " << control::termination_name(run.result->termination) << "\n";
    if (run.result->extracted_answer) {
      std::cout << "answer: " << *run.result->extracted_answer << "\n";
    }
    std::cout << "guard invocations: " << run.result->guard_invocations << "\n";
  } else {
    std::cout << "termination: (no result recorded)\n";
  }
  if (run.truncated_tail) {
    std::cout << "warning: trajectory tail was truncated; the transcript is a prefix\n";
  }
  return 0;
}

int cmd_gen_dataset(const std::string& out_path, int count, const std::string& prefix,
                    const std::string& subset_out) {
  if (count < 1) throw ConfigError("--count must be >= 1");
  std::vector<bench::TaskRecord> tasks;
  tasks.reserve(count);
  for (int i = 1; i <= count; ++i) {
    char id[64];
    std::snprintf(id, sizeof(id), "%s%04d", prefix.c_str(), i);
    bench::TaskRecord task;
    task.task_id = id;
    task.level = (i % 2) + 1;
    task.question = bench::SimulatedPlant::question_text(task.task_id);
    task.gold_answer = bench::SimulatedPlant::reference_answer(task.task_id);
    task.kind = control::AnswerKind::string_;
    tasks.push_back(std::move(task));
  }
  bench::write_dataset(out_path, tasks);
  std::cout << "dataset: " << out_path << " (" << count << " tasks)\n";
  if (!subset_out.empty()) {
    std::ofstream out(subset_out, std::ios::trunc);
    if (!out) throw Error(util::cat("cannot write subset file ", subset_out));
    for (const auto& task : tasks) out << task.task_id << "\n";
    std::cout << "subset: " << subset_out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Agent-control runtime: experiments, identification, loop verification"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  std::string run_mode;
  std::optional<int> run_rounds;
  std::optional<int> run_parallelism;
  std::string run_fingerprint;
  auto* run = app.add_subcommand("run", "run a benchmark experiment");
  add_common_flags(*run, run_flags);
  run->add_option("--mode", run_mode, "uncontrolled|feedback|composite");
  run->add_option("--rounds", run_rounds, "independent rounds");
  run->add_option("--parallelism", run_parallelism, "concurrent tasks per round");
  run->add_option("--fingerprint", run_fingerprint, "fingerprint.json for composite mode");

  CommonFlags identify_flags;
  std::string identify_eval_subset;
  auto* identify = app.add_subcommand("identify", "build a performance fingerprint");
  add_common_flags(*identify, identify_flags);
  identify->add_option("--eval-subset", identify_eval_subset,
                       "ids reserved for evaluation; identification must not touch them");

  std::string sim_plant_num = "1";
  std::string sim_plant_den = "1";
  std::string sim_ctrl_num = "9";
  std::string sim_ctrl_den = "1";
  bool sim_ideal_ff = false;
  std::optional<double> sim_approx;
  double sim_dt = 1e-3;
  int sim_horizon = 20000;
  double sim_disturbance = 1.0;
  double sim_reference = 0.0;
  std::string sim_trace;
  auto* simulate = app.add_subcommand("simulate", "closed-loop algebra report and simulation");
  simulate->add_option("--plant-num", sim_plant_num, "plant numerator, ascending coefficients");
  simulate->add_option("--plant-den", sim_plant_den, "plant denominator");
  simulate->add_option("--controller-num", sim_ctrl_num, "feedback controller numerator");
  simulate->add_option("--controller-den", sim_ctrl_den, "feedback controller denominator");
  simulate->add_flag("--ideal-ff", sim_ideal_ff, "attach the exact disturbance canceller");
  simulate->add_option("--approx", sim_approx,
                       "attach the proper approximate canceller with this epsilon");
  simulate->add_option("--dt", sim_dt, "sample period");
  simulate->add_option("--horizon", sim_horizon, "samples to simulate");
  simulate->add_option("--disturbance", sim_disturbance, "step disturbance amplitude");
  simulate->add_option("--reference", sim_reference, "step reference amplitude");
  simulate->add_option("--trace", sim_trace, "CSV trace output path");

  std::string score_dir;
  std::string score_label = "experiment";
  auto* score = app.add_subcommand("score", "re-aggregate stored round artifacts");
  score->add_option("dir", score_dir, "experiment output directory")->required();
  score->add_option("--label", score_label, "row label for the printed grid");

  std::string replay_runs_dir;
  std::string replay_run_id;
  auto* replay = app.add_subcommand("replay", "pretty-print a stored run");
  replay->add_option("--runs-dir", replay_runs_dir, "runs directory")->required();
  replay->add_option("run_id", replay_run_id, "run to print")->required();

  std::string gen_out;
  int gen_count = 16;
  std::string gen_prefix = "sim-";
  std::string gen_subset_out;
  auto* gen = app.add_subcommand("gen-dataset", "generate a synthetic keyed dataset");
  gen->add_option("--out", gen_out, "dataset output path (JSONL)")->required();
  gen->add_option("--count", gen_count, "number of tasks");
  gen->add_option("--prefix", gen_prefix, "task id prefix");
  gen->add_option("--subset-out", gen_subset_out, "also write a subset file of all ids");

  try {
    app.parse(argc, argv);
    if (run->parsed()) {
      return cmd_run(run_flags, run_mode, run_rounds, run_parallelism, run_fingerprint);
    }
    if (identify->parsed()) return cmd_identify(identify_flags, identify_eval_subset);
    if (simulate->parsed()) {
      return cmd_simulate(sim_plant_num, sim_plant_den, sim_ctrl_num, sim_ctrl_den,
                          sim_ideal_ff, sim_approx, sim_dt, sim_horizon, sim_disturbance,
                          sim_reference, sim_trace);
    }
    if (score->parsed()) return cmd_score(score_dir, score_label);
    if (replay->parsed()) return cmd_replay(replay_runs_dir, replay_run_id);
    if (gen->parsed()) return cmd_gen_dataset(gen_out, gen_count, gen_prefix, gen_subset_out);
    return 2;
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
