#include <atomic>
#include <fstream>
#include <thread>

#include "maneuver/bench/answers.hpp"
#include "maneuver/bench/experiment.hpp"
#include "maneuver/sysid/identify.hpp"
#include "maneuver/util/digest.hpp"
#include "maneuver/util/strings.hpp"

namespace maneuver::bench {

namespace {

using nlohmann::json;

void write_json_file(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(util::cat("cannot write ", path.string()));
  out << doc.dump(2) << '\n';
}

void check_fingerprint_disjoint(std::span<const TaskRecord> tasks,
                                const sysid::PerformanceFingerprint& fingerprint) {
  std::vector<std::string> overlap;
  for (const auto& task : tasks) {
    for (const auto& source_id : fingerprint.source_task_ids) {
      if (source_id == task.task_id) {
        overlap.push_back(task.task_id);
        break;
      }
    }
  }
  if (!overlap.empty()) {
    throw sysid::DatasetOverlap(
        util::cat("fingerprint was built on evaluated task(s): ", util::join(overlap, ", ")));
  }
}

}  // namespace

std::string experiment_run_id(std::string_view task_id, control::RunMode mode, int round,
                              std::uint64_t seed) {
  return util::cat(util::sanitize_token(task_id), "__", control::run_mode_name(mode), "__r",
                   round, "__s", seed);
}

ExperimentArtifacts run_experiment(std::span<const TaskRecord> tasks,
                                   const ExperimentOptions& options,
                                   const control::RunEnv& env) {
  if (tasks.empty()) throw Error("run_experiment: no tasks");
  if (options.rounds < 1) throw Error("run_experiment: rounds must be >= 1");
  if (options.parallelism < 1) throw Error("run_experiment: parallelism must be >= 1");
  if (options.mode == control::RunMode::composite) {
    if (env.fingerprint == nullptr) {
      throw Error("run_experiment: composite mode needs a fingerprint");
    }
    check_fingerprint_disjoint(tasks, *env.fingerprint);
  }

  control::RunEnv run_env = env;
  std::optional<store::DirRunStore> own_store;
  if (!options.out_dir.empty()) {
    std::filesystem::create_directories(options.out_dir / "rounds");
    if (options.persist_runs) {
      own_store.emplace(options.out_dir / "runs");
      run_env.sink = &*own_store;
    }
  }

  ExperimentArtifacts artifacts;
  artifacts.task_ids.reserve(tasks.size());
  for (const auto& task : tasks) artifacts.task_ids.push_back(task.task_id);

  for (int round = 1; round <= options.rounds; ++round) {
    // plain bytes: vector<bool> packs bits and is unsafe to write in parallel
    std::vector<char> hits(tasks.size(), 0);
    std::atomic<std::size_t> cursor{0};

    auto worker = [&] {
      for (std::size_t i = cursor.fetch_add(1); i < tasks.size(); i = cursor.fetch_add(1)) {
        const auto& task = tasks[i];
        control::RunConfig config = options.run_template;
        config.run_id = experiment_run_id(task.task_id, options.mode, round, options.seed);
        config.seed = util::stable_seed({std::to_string(options.seed), "task-run",
                                         task.task_id, std::to_string(round)});
        auto result = control::run_task(to_task_input(task), options.mode, config, run_env);
        hits[i] = result.termination == control::Termination::answered &&
                  result.extracted_answer.has_value() &&
                  score_answer(*result.extracted_answer, task.gold_answer, task.kind);
      }
    };

    int thread_count = std::min<int>(options.parallelism, static_cast<int>(tasks.size()));
    if (thread_count <= 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      pool.reserve(thread_count);
      for (int t = 0; t < thread_count; ++t) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
    }

    if (!options.out_dir.empty()) {
      json per_task = json::object();
      std::size_t correct = 0;
      for (std::size_t i = 0; i < tasks.size(); ++i) {
        per_task[tasks[i].task_id] = hits[i] != 0;
        if (hits[i]) ++correct;
      }
      json round_doc = {
          {"round", round},
          {"pass1", double(correct) / double(tasks.size())},
          {"per_task", per_task},
      };
      write_json_file(options.out_dir / "rounds" / util::cat("round_", round, ".json"),
                      round_doc);
    }
    artifacts.round_hits.emplace_back(hits.begin(), hits.end());
  }

  artifacts.report = aggregate(artifacts.round_hits);

  if (!options.out_dir.empty()) {
    json config_doc = {
        {"mode", control::run_mode_name(options.mode)},
        {"rounds", options.rounds},
        {"seed", options.seed},
        {"model_id", options.run_template.model_id},
        {"temperature", options.run_template.temperature},
        {"max_steps", options.run_template.max_steps},
        {"answer_retries", options.run_template.answer_retries},
        {"task_count", tasks.size()},
        {"task_ids", artifacts.task_ids},
    };
    write_json_file(options.out_dir / "config.json", config_doc);
    write_json_file(options.out_dir / "report.json", artifacts.report.to_json());

    std::ofstream md(options.out_dir / "report.md", std::ios::trunc);
    md << artifacts.report.to_markdown(std::string(control::run_mode_name(options.mode)));
  }
  return artifacts;
}

}  // namespace maneuver::bench
