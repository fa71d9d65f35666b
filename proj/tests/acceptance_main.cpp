// Acceptance gate. Each criterion prints exactly one PASS/FAIL line with its
// elapsed time; failures add indented notes underneath. Any failure makes the
// process exit with code 4 so CI can tell a red gate from a crash.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "maneuver/bench/answers.hpp"
#include "maneuver/bench/dataset.hpp"
#include "maneuver/bench/experiment.hpp"
#include "maneuver/bench/metrics.hpp"
#include "maneuver/bench/simulated_plant.hpp"
#include "maneuver/control/context.hpp"
#include "maneuver/control/guard.hpp"
#include "maneuver/control/loop.hpp"
#include "maneuver/gateway/backends.hpp"
#include "maneuver/lti/closed_loop.hpp"
#include "maneuver/lti/simulate.hpp"
#include "maneuver/lti/transfer_function.hpp"
#include "maneuver/prompts.hpp"
#include "maneuver/store/run_store.hpp"
#include "maneuver/sysid/analysis.hpp"
#include "maneuver/sysid/fingerprint.hpp"
#include "maneuver/sysid/identify.hpp"
#include "maneuver/tools/registry.hpp"
#include "maneuver/util/strings.hpp"

namespace fs = std::filesystem;
using namespace maneuver;

namespace {

// Pinned tolerances. These are the acceptance contract; loosening them is a
// design change, not a test fix.
constexpr double kStatTol = 5e-5;        // summary-statistic absolute tolerance
constexpr double kDcTol = 1e-9;          // disturbance DC-gain tolerance
constexpr double kFfEpsilon = 1e-3;      // proper feed-forward roll-off constant
constexpr double kResidualBound = 1e-3;  // allowed simulated steady-state residual

// Pinned seeds. The ordering study and the reproducibility check are defined
// over fixed seeds; the truncation fuzz uses its own stream.
constexpr std::uint64_t kOrderingSeed = 7;
constexpr std::uint64_t kReproSeed = 21;
constexpr std::uint64_t kTruncationSeed = 99;

void expect(std::vector<std::string>& notes, bool ok, std::string note) {
  if (!ok) notes.push_back(std::move(note));
}

fs::path acceptance_root() { return fs::temp_directory_path() / "maneuver-acceptance"; }

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return util::cat("<unreadable: ", path.string(), ">");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void spill(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

bench::TaskRecord make_record(const std::string& task_id, int level) {
  bench::TaskRecord record;
  record.task_id = task_id;
  record.level = level;
  record.question = bench::SimulatedPlant::question_text(task_id);
  record.gold_answer = bench::SimulatedPlant::reference_answer(task_id);
  record.kind = control::AnswerKind::string_;
  return record;
}

std::vector<bench::TaskRecord> make_task_set(const std::string& prefix, int count) {
  std::vector<bench::TaskRecord> tasks;
  tasks.reserve(static_cast<std::size_t>(count));
  for (int i = 1; i <= count; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "%s-%04d", prefix.c_str(), i);
    tasks.push_back(make_record(id, (i % 3) + 1));
  }
  return tasks;
}

// Fingerprint naming exactly the two injected weaknesses. The weaknesses
// section must mention no other vocabulary stem, or validation rejects it.
sysid::PerformanceFingerprint make_fingerprint(std::vector<std::string> source_task_ids) {
  sysid::PerformanceFingerprint fp;
  fp.agent_label = "simulated execution agent";
  fp.core_capabilities = "Direct question answering from a fixed internal key with stable formatting.";
  fp.performance_by_task_type = "Uniform across levels; misses come from injected weaknesses, not knowledge gaps.";
  fp.strengths = "Keeps the answer envelope discipline and revises cleanly when critiqued.";
  fp.weaknesses =
      "Prone to hallucination in drafted reasoning, and shows constraint-negligence when a "
      "question carries side conditions.";
  fp.capability_boundaries = "Never invokes tools; every reply comes from the internal key.";
  fp.recommendations = "Verify drafted claims before finalizing and restate side conditions.";
  fp.overall_assessment = "Stable scaffold with two injected weakness channels.";
  fp.overall_score = 5.5;
  fp.weakness_tags = {"hallucination", "constraint-negligence"};
  fp.source_run_ids = {"calibration-batch-1"};
  fp.source_task_ids = std::move(source_task_ids);
  fp.model_id = "sim-plant";
  return fp;
}

control::RunEnv make_env(gateway::Backend& backend, const tools::ToolRegistry& registry,
                         const PromptLibrary& prompts,
                         const sysid::PerformanceFingerprint* fingerprint = nullptr) {
  control::RunEnv env;
  env.backend = &backend;
  env.base_tools = &registry;
  env.prompts = &prompts;
  env.fingerprint = fingerprint;
  return env;
}

// Criterion 1: summarize_rounds reproduces the reference summary statistics
// for four three-round proportion tables within kStatTol.
void criterion_summary_statistics(std::vector<std::string>& notes) {
  struct Table {
    std::vector<double> per_round;
    double pass_at_k;
    double avg, stddev, gap;
  };
  const std::vector<Table> tables = {
      {{0.3211, 0.3028, 0.3211}, 0.3853, 0.3150, 0.00863, 0.0703},
      {{0.5688, 0.6330, 0.6422}, 0.8073, 0.6147, 0.03265, 0.1926},
      {{0.7064, 0.6422, 0.6606}, 0.8257, 0.6697, 0.02701, 0.15597},
      {{0.7248, 0.7064, 0.6972}, 0.8440, 0.7095, 0.01147, 0.13453},
  };
  const int task_count = 109;
  for (std::size_t i = 0; i < tables.size(); ++i) {
    const auto& table = tables[i];
    auto report = bench::summarize_rounds(table.per_round, table.pass_at_k, task_count);
    expect(notes, report.task_count == task_count && report.rounds == 3,
           util::cat("table ", i + 1, ": shape not echoed back"));
    expect(notes, report.per_round_pass1 == table.per_round,
           util::cat("table ", i + 1, ": per-round rates not echoed back"));
    expect(notes, std::fabs(report.pass1_avg - table.avg) < kStatTol,
           util::cat("table ", i + 1, ": avg ", report.pass1_avg, " vs ", table.avg));
    expect(notes, std::fabs(report.pass1_std - table.stddev) < kStatTol,
           util::cat("table ", i + 1, ": std ", report.pass1_std, " vs ", table.stddev));
    expect(notes, std::fabs(report.gap - table.gap) < kStatTol,
           util::cat("table ", i + 1, ": gap ", report.gap, " vs ", table.gap));
  }
}

// Criterion 2: on twelve stable proper loops the closed-loop algebra holds at
// coefficient level, the disturbance DC gain matches 1/(1+P(0)C(0)), the
// ideal feed-forward cancels the disturbance path exactly, and its proper
// approximation keeps the simulated steady-state residual under bound.
void criterion_loop_algebra(std::vector<std::string>& notes) {
  struct Fixture {
    std::vector<double> plant_num, plant_den;
    std::vector<double> ctrl_num, ctrl_den;
  };
  // Ascending coefficients; all denominators monic so construction does not
  // rescale, and every closed loop below is Hurwitz.
  const std::vector<Fixture> fixtures = {
      {{1.0}, {1.0, 1.0}, {9.0}, {1.0}},
      {{2.0}, {2.0, 1.0}, {4.0}, {1.0}},
      {{1.0}, {3.0, 1.0}, {5.0}, {1.0}},
      {{4.0}, {1.0, 1.0}, {2.0}, {1.0}},
      {{1.0}, {2.0, 2.0, 1.0}, {3.0}, {1.0}},
      {{2.0}, {4.0, 3.0, 1.0}, {6.0}, {1.0}},
      {{4.0}, {5.0, 4.0, 1.0}, {1.0}, {1.0}},
      {{1.0}, {2.0, 1.0}, {2.0, 1.0}, {1.0, 1.0}},
      {{2.0}, {1.0, 1.0}, {3.0, 2.0}, {2.0, 1.0}},
      {{1.0}, {3.0, 2.0, 1.0}, {4.0, 1.0}, {1.0, 1.0}},
      {{2.0}, {4.0, 1.0}, {7.0}, {1.0}},
      {{4.0}, {6.0, 5.0, 1.0}, {2.0}, {1.0}},
  };
  expect(notes, fixtures.size() >= 10, "fewer than ten fixtures");

  const std::size_t horizon = 40000;  // 40 s at the default 1 ms step
  const auto reference = lti::zero_signal(horizon);
  const auto disturbance = lti::step_signal(horizon);

  for (std::size_t i = 0; i < fixtures.size(); ++i) {
    const auto& fx = fixtures[i];
    lti::TransferFunction plant(fx.plant_num, fx.plant_den);
    lti::TransferFunction ctrl(fx.ctrl_num, fx.ctrl_den);
    expect(notes, plant.proper() && ctrl.proper(),
           util::cat("fixture ", i + 1, ": fixture block not proper"));

    lti::ClosedLoopSystem loop{plant, ctrl, std::nullopt};
    auto transfer = lti::closed_loop(loop);

    const auto& den = transfer.from_reference.denominator;
    bool same_den = transfer.from_disturbance.denominator == den;
    std::vector<double> numerator_sum(den.size(), 0.0);
    bool in_range = transfer.from_reference.numerator.size() <= den.size() &&
                    transfer.from_disturbance.numerator.size() <= den.size();
    if (in_range) {
      for (std::size_t j = 0; j < transfer.from_reference.numerator.size(); ++j)
        numerator_sum[j] += transfer.from_reference.numerator[j];
      for (std::size_t j = 0; j < transfer.from_disturbance.numerator.size(); ++j)
        numerator_sum[j] += transfer.from_disturbance.numerator[j];
    }
    expect(notes, same_den && in_range && numerator_sum == den,
           util::cat("fixture ", i + 1, ": sensitivity identity broken at coefficient level"));

    double p0 = plant.evaluate_real(0.0);
    double c0 = ctrl.evaluate_real(0.0);
    double dc = transfer.from_disturbance.evaluate_real(0.0);
    double dc_expected = 1.0 / (1.0 + p0 * c0);
    expect(notes, std::fabs(dc - dc_expected) <= kDcTol,
           util::cat("fixture ", i + 1, ": disturbance DC gain ", dc, " vs ", dc_expected));

    lti::ClosedLoopSystem ideal{plant, ctrl, lti::ideal_feedforward(plant)};
    auto cancelled = lti::closed_loop(ideal);
    expect(notes, cancelled.from_disturbance.zero_numerator(),
           util::cat("fixture ", i + 1, ": ideal feed-forward left a nonzero numerator"));

    lti::ClosedLoopSystem approx{plant, ctrl, lti::proper_feedforward(plant, kFfEpsilon)};
    auto trace = lti::simulate(approx, reference, disturbance, {});
    double residual = std::fabs(trace.steady_state_y());
    expect(notes, residual <= kResidualBound,
           util::cat("fixture ", i + 1, ": steady-state residual ", residual));
  }
}

// Criterion 3: under a two-weakness failure profile the three run modes must
// order both accuracy (composite > feedback > uncontrolled) and
// round-to-round variability (composite < feedback < uncontrolled) at
// 1000 tasks x 5 rounds with pinned seeds.
void criterion_mode_ordering(std::vector<std::string>& notes) {
  bench::FailureProfile profile;
  profile.rates = {{"hallucination", 0.3}, {"constraint-negligence", 0.2}};
  profile.critique_fix_rate = 0.5;
  profile.advisory_suppress_rate = 0.8;
  bench::SimulatedPlant plant(profile, kOrderingSeed);

  auto tasks = make_task_set("eval", 1000);
  auto registry = tools::make_builtin_registry({.benchmark_mode = true});
  auto prompts = PromptLibrary::builtin();
  auto fingerprint = make_fingerprint({"calib-0001", "calib-0002", "calib-0003"});

  auto run_mode = [&](control::RunMode mode, const sysid::PerformanceFingerprint* fp) {
    bench::ExperimentOptions options;
    options.mode = mode;
    options.rounds = 5;
    options.seed = kOrderingSeed;
    options.run_template.model_id = "sim-plant";
    options.parallelism = 4;
    options.persist_runs = false;
    auto env = make_env(plant, registry, prompts, fp);
    return bench::run_experiment(tasks, options, env).report;
  };

  auto uncontrolled = run_mode(control::RunMode::uncontrolled, nullptr);
  auto feedback = run_mode(control::RunMode::feedback, nullptr);
  auto composite = run_mode(control::RunMode::composite, &fingerprint);

  for (const auto* report : {&uncontrolled, &feedback, &composite})
    expect(notes, report->task_count == 1000 && report->rounds == 5,
           "experiment shape mismatch");

  expect(notes,
         composite.pass1_avg > feedback.pass1_avg && feedback.pass1_avg > uncontrolled.pass1_avg,
         util::cat("mean accuracy not ordered: composite ", composite.pass1_avg, ", feedback ",
                   feedback.pass1_avg, ", uncontrolled ", uncontrolled.pass1_avg));
  expect(notes,
         composite.pass1_std < feedback.pass1_std && feedback.pass1_std < uncontrolled.pass1_std,
         util::cat("round variability not ordered: composite ", composite.pass1_std,
                   ", feedback ", feedback.pass1_std, ", uncontrolled ", uncontrolled.pass1_std));
}

// Criterion 4: a scripted three-round experiment is byte-reproducible under a
// fixed seed in every mode, honors the mandatory-review invariant in the
// controlled modes, and refuses fingerprints built on evaluated tasks.
void criterion_protocol(std::vector<std::string>& notes) {
  bench::FailureProfile profile;
  profile.rates = {{"hallucination", 0.35}, {"constraint-negligence", 0.25}};
  profile.critique_fix_rate = 0.6;
  profile.advisory_suppress_rate = 0.7;
  bench::SimulatedPlant plant(profile, kReproSeed);

  auto tasks = make_task_set("check", 12);
  auto registry = tools::make_builtin_registry({.benchmark_mode = true});
  auto prompts = PromptLibrary::builtin();
  auto fingerprint = make_fingerprint({"calib-0001", "calib-0002"});

  const int rounds = 3;
  auto run_into = [&](control::RunMode mode, const fs::path& dir) {
    bench::ExperimentOptions options;
    options.mode = mode;
    options.rounds = rounds;
    options.seed = kReproSeed;
    options.run_template.model_id = "sim-plant";
    options.parallelism = 2;
    options.out_dir = dir;
    options.persist_runs = true;
    auto env = make_env(plant, registry, prompts,
                        mode == control::RunMode::composite ? &fingerprint : nullptr);
    return bench::run_experiment(tasks, options, env);
  };

  for (auto mode :
       {control::RunMode::uncontrolled, control::RunMode::feedback, control::RunMode::composite}) {
    auto name = control::run_mode_name(mode);
    fs::path dir_a = acceptance_root() / util::cat("repro-", name, "-a");
    fs::path dir_b = acceptance_root() / util::cat("repro-", name, "-b");
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);

    auto first = run_into(mode, dir_a);
    auto second = run_into(mode, dir_b);
    expect(notes, first.report.to_json() == second.report.to_json(),
           util::cat(name, ": in-memory reports differ between repeats"));

    std::vector<std::string> files = {"report.json", "config.json"};
    for (int r = 1; r <= rounds; ++r) files.push_back(util::cat("rounds/round_", r, ".json"));
    for (const auto& file : files)
      expect(notes, slurp(dir_a / file) == slurp(dir_b / file),
             util::cat(name, ": ", file, " differs between repeats"));

    store::DirRunStore store_a(dir_a / "runs");
    store::DirRunStore store_b(dir_b / "runs");
    auto ids_a = store_a.list_runs();
    auto ids_b = store_b.list_runs();
    std::sort(ids_a.begin(), ids_a.end());
    std::sort(ids_b.begin(), ids_b.end());
    expect(notes, ids_a.size() == tasks.size() * rounds && ids_a == ids_b,
           util::cat(name, ": persisted run sets differ"));

    for (const auto& id : ids_a) {
      expect(notes,
             slurp(dir_a / "runs" / id / "steps.jsonl") == slurp(dir_b / "runs" / id / "steps.jsonl") &&
                 slurp(dir_a / "runs" / id / "result.json") == slurp(dir_b / "runs" / id / "result.json"),
             util::cat(name, ": run ", id, " not byte-reproducible"));
      auto loaded = store_a.load_run(id);
      if (!loaded.result.has_value()) {
        notes.push_back(util::cat(name, ": run ", id, " has no result"));
        continue;
      }
      int guard_calls = loaded.result->guard_invocations;
      bool controlled = mode != control::RunMode::uncontrolled;
      expect(notes, controlled ? guard_calls >= 1 : guard_calls == 0,
             util::cat(name, ": run ", id, " guard invocations ", guard_calls));
    }
  }

  // Disjointness guards: an evaluated task in the fingerprint's sources must
  // abort the composite experiment, and the identification pipeline must
  // refuse a corpus that touches the held-out evaluation list.
  auto tainted = make_fingerprint({"calib-0001", "check-0003"});
  bench::ExperimentOptions options;
  options.mode = control::RunMode::composite;
  options.rounds = 1;
  options.seed = kReproSeed;
  options.run_template.model_id = "sim-plant";
  auto env = make_env(plant, registry, prompts, &tainted);
  bool overlap_thrown = false;
  try {
    bench::run_experiment(tasks, options, env);
  } catch (const sysid::DatasetOverlap&) {
    overlap_thrown = true;
  }
  expect(notes, overlap_thrown, "tainted fingerprint did not raise the overlap error");

  std::vector<bench::TaskRecord> corpus = {make_record("probe-0001", 1)};
  sysid::IdentifyOptions identify_options;
  identify_options.run_template.model_id = "sim-plant";
  identify_options.analyze.prompts = &prompts;
  identify_options.synthesize.prompts = &prompts;
  identify_options.eval_task_ids = {"probe-0001"};
  bool identify_thrown = false;
  try {
    sysid::identify(corpus, identify_options, make_env(plant, registry, prompts));
  } catch (const sysid::DatasetOverlap&) {
    identify_thrown = true;
  }
  expect(notes, identify_thrown, "identification accepted a corpus overlapping the eval list");
}

// Criterion 5: the prompt surfaces carry their contractual anchor phrases and
// the answer pipeline scores the reference corpus correctly.
void criterion_prompts_answers(std::vector<std::string>& notes) {
  auto prompts = PromptLibrary::builtin();
  auto registry = tools::make_builtin_registry({});

  control::TaskInput task;
  task.task_id = "demo-0001";
  task.question = "What fruit grows on the tree in the yard?";
  task.level = 1;
  task.expected_answer_kind = control::AnswerKind::string_;
  control::ContextOptions context_options{&prompts, registry.render_roster()};
  auto context = control::assemble_context(task, {}, {}, context_options);
  expect(notes, !context.messages.empty() &&
                    context.messages.front().role == gateway::Role::system,
         "context does not start with a system message");
  expect(notes,
         context.messages.front().content.find(
             "ALWAYS use the `<answer></answer>` tag to wrap your output.") != std::string::npos,
         "execution prompt lost its answer-envelope instruction");

  auto naive_prompt = control::guard_system_prompt_naive(prompts);
  expect(notes,
         naive_prompt.find("just say 'No loopholes or oversights found'") != std::string::npos,
         "guard prompt lost its all-clear instruction");
  expect(notes,
         control::parse_verdict("No loopholes or oversights found.").verdict ==
             control::Verdict::no_issue,
         "canonical all-clear sentence with period not classified as no_issue");
  expect(notes,
         control::parse_verdict(std::string(control::kNoIssueSentence)).verdict ==
             control::Verdict::no_issue,
         "bare all-clear sentence not classified as no_issue");

  auto fingerprint = make_fingerprint({"calib-0001"});
  auto profiled_prompt = control::guard_system_prompt_profiled(prompts, fingerprint, 2000);
  expect(notes, profiled_prompt.find("## Agent's Reasoning Feature:") != std::string::npos,
         "profiled guard prompt lost its injection header");
  expect(notes,
         profiled_prompt.find("it is from the 3rd part report on this agent") != std::string::npos,
         "profiled guard prompt lost the header's framing sentence");
  expect(notes, profiled_prompt.find(fingerprint.weaknesses) != std::string::npos,
         "profiled guard prompt does not carry the weaknesses section");

  store::LoadedRun stale;
  stale.manifest.run_id = "probe-run";
  stale.manifest.task_id = "probe-0001";
  sysid::TaskFacts facts;
  facts.question = "What color is the sky?";
  facts.gold_answer = "blue";
  gateway::ScriptedBackend scripted;
  std::string analysis_request;
  scripted.set_handler([&](const gateway::ChatRequest& request) {
    for (const auto& message : request.messages) {
      analysis_request += message.content;
      analysis_request += '\n';
    }
    return "## Error Analysis\nNothing usable in the log.";
  });
  sysid::AnalyzeOptions analyze_options;
  analyze_options.prompts = &prompts;
  analyze_options.model_id = "scripted-model";
  sysid::analyze_task(stale, facts, scripted, analyze_options);
  expect(notes, analysis_request.find("Log file not found") != std::string::npos,
         "analysis of an empty run does not flag the missing log");

  auto extracted = bench::extract_answer("Final reply.\n<answer>The Apple Tree</answer>");
  expect(notes,
         extracted.status == bench::ExtractStatus::ok && extracted.answer == "The Apple Tree",
         "answer extraction failed on a tagged reply");
  expect(notes, bench::score_answer("The Apple Tree", "apple tree", control::AnswerKind::string_),
         "string scoring is not article- and case-insensitive");
  expect(notes, bench::score_answer("3, 4,5", "3, 4, 5", control::AnswerKind::list),
         "list scoring is sensitive to spacing");
  auto numeric = bench::extract_answer("<answer>93</answer>");
  expect(notes, numeric.status == bench::ExtractStatus::ok &&
                    bench::score_answer(numeric.answer, "93", control::AnswerKind::number),
         "numeric extraction or scoring failed");
  expect(notes, bench::score_answer("$93", "93", control::AnswerKind::number),
         "number scoring does not strip currency decoration");
  expect(notes, bench::score_answer("April in 2020", "April in 2020", control::AnswerKind::formatted),
         "formatted scoring rejects an exact match");
  expect(notes, !bench::score_answer("april in 2020", "April in 2020", control::AnswerKind::formatted),
         "formatted scoring ignored case");
  expect(notes, bench::score_answer(" 93 ", "93", control::AnswerKind::unknown),
         "unknown-kind scoring does not infer the numeric form");
}

// Criterion 6: any truncation of a step log after its first complete line
// still loads as a prefix of the original run with the truncation flag set.
void criterion_truncation(std::vector<std::string>& notes) {
  bench::FailureProfile profile;
  profile.rates = {{"hallucination", 1.0}};
  profile.critique_fix_rate = 1.0;
  bench::SimulatedPlant plant(profile, 3);
  auto registry = tools::make_builtin_registry({.benchmark_mode = true});
  auto prompts = PromptLibrary::builtin();

  fs::path orig_root = acceptance_root() / "truncation" / "orig";
  fs::path cut_root = acceptance_root() / "truncation" / "cut";
  fs::remove_all(orig_root);
  fs::remove_all(cut_root);
  store::DirRunStore store(orig_root);

  auto record = make_record("crash-0001", 1);
  auto run_id = bench::experiment_run_id(record.task_id, control::RunMode::feedback, 1, 3);
  control::RunConfig config;
  config.run_id = run_id;
  config.model_id = "sim-plant";
  config.seed = 3;
  auto env = make_env(plant, registry, prompts);
  env.sink = &store;
  auto result = control::run_task(bench::to_task_input(record), control::RunMode::feedback,
                                  config, env);
  expect(notes, result.termination == control::Termination::answered,
         "probe run did not terminate with an answer");

  auto baseline = store.load_run(run_id);
  const std::size_t step_count = baseline.steps.size();
  expect(notes, step_count >= 3 && !baseline.truncated_tail && baseline.result.has_value(),
         "baseline run is not a healthy multi-step log");

  const std::string bytes = slurp(orig_root / run_id / "steps.jsonl");
  const std::size_t first_line_end = bytes.find('\n');
  if (first_line_end == std::string::npos || bytes.size() < first_line_end + 4) {
    notes.push_back("step log too small to truncate meaningfully");
    return;
  }

  fs::create_directories(cut_root / run_id);
  spill(cut_root / run_id / "manifest.json", slurp(orig_root / run_id / "manifest.json"));
  spill(cut_root / run_id / "result.json", slurp(orig_root / run_id / "result.json"));
  store::DirRunStore cut_store(cut_root);

  // Control: the untouched log must load clean before we start cutting.
  spill(cut_root / run_id / "steps.jsonl", bytes);
  auto untouched = cut_store.load_run(run_id);
  expect(notes, !untouched.truncated_tail && untouched.steps.size() == step_count,
         "untouched copy did not load clean");

  // Cut points keep the first line intact and always lose at least one
  // content byte, whether mid-line (torn tail) or at a line boundary (step
  // count short of the recorded total).
  std::mt19937_64 rng(kTruncationSeed);
  std::uniform_int_distribution<std::size_t> pick(first_line_end + 1, bytes.size() - 2);
  for (int iteration = 0; iteration < 100; ++iteration) {
    const std::size_t cut = pick(rng);
    spill(cut_root / run_id / "steps.jsonl", bytes.substr(0, cut));
    store::LoadedRun loaded;
    try {
      loaded = cut_store.load_run(run_id);
    } catch (const std::exception& ex) {
      notes.push_back(util::cat("cut at byte ", cut, ": load threw: ", ex.what()));
      break;
    }
    std::vector<std::string> cut_notes;
    expect(cut_notes, loaded.truncated_tail,
           util::cat("cut at byte ", cut, ": truncation flag not set"));
    expect(cut_notes, !loaded.steps.empty() && loaded.steps.size() < step_count,
           util::cat("cut at byte ", cut, ": loaded ", loaded.steps.size(), " of ", step_count,
                     " steps"));
    for (std::size_t i = 0; i < loaded.steps.size() && i < step_count; ++i) {
      const auto& got = loaded.steps[i];
      const auto& want = baseline.steps[i];
      if (got.index != want.index || got.actor != want.actor || got.content != want.content) {
        cut_notes.push_back(util::cat("cut at byte ", cut, ": step ", i, " is not a prefix match"));
        break;
      }
    }
    if (!cut_notes.empty()) {
      notes.insert(notes.end(), cut_notes.begin(), cut_notes.end());
      break;
    }
  }
}

}  // namespace

int main() {
  fs::remove_all(acceptance_root());
  fs::create_directories(acceptance_root());

  struct Entry {
    int id;
    const char* label;
    double limit_s;
    void (*body)(std::vector<std::string>&);
  };
  const std::vector<Entry> entries = {
      {1, "per-round score tables reproduce their summary statistics", 1.0,
       criterion_summary_statistics},
      {2, "closed-loop identities hold and disturbance rejection settles", 10.0,
       criterion_loop_algebra},
      {3, "control modes order accuracy and variability as designed", 60.0,
       criterion_mode_ordering},
      {4, "experiments reproduce byte-for-byte and enforce loop invariants", 30.0,
       criterion_protocol},
      {5, "prompt anchors and the answer-scoring corpus hold", 5.0, criterion_prompts_answers},
      {6, "torn step logs load as a flagged prefix", 10.0, criterion_truncation},
  };

  bool all_passed = true;
  for (const auto& entry : entries) {
    std::vector<std::string> notes;
    auto start = std::chrono::steady_clock::now();
    try {
      entry.body(notes);
    } catch (const std::exception& ex) {
      notes.push_back(util::cat("unexpected exception: ", ex.what()));
    }
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (seconds > entry.limit_s)
      notes.push_back(util::cat("time limit exceeded: ", seconds, " s > ", entry.limit_s, " s"));
    const bool passed = notes.empty();
    all_passed = all_passed && passed;
    std::printf("%s criterion %d: %s (%.2f s, limit %.0f s)\n", passed ? "PASS" : "FAIL",
                entry.id, entry.label, seconds, entry.limit_s);
    for (const auto& note : notes) std::printf("    - %s\n", note.c_str());
    std::fflush(stdout);
  }
  std::printf("acceptance: %s\n", all_passed ? "all criteria passed" : "criteria failed");
  return all_passed ? 0 : 4;
}
