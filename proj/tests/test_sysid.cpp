#include <doctest.h>

#include <filesystem>
#include <string>
#include <vector>

#include "maneuver/bench/simulated_plant.hpp"
#include "maneuver/gateway/backends.hpp"
#include "maneuver/sysid/identify.hpp"
#include "maneuver/tools/registry.hpp"
#include "maneuver/util/strings.hpp"

using namespace maneuver;

namespace {

namespace fs = std::filesystem;

fs::path temp_dir(const char* tag) {
  auto dir = fs::temp_directory_path() / (std::string("maneuver-sysid-") + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

sysid::PerformanceFingerprint demo_fingerprint() {
  sysid::PerformanceFingerprint fp;
  fp.agent_label = "agent under test";
  fp.core_capabilities = "Solid arithmetic, shaky citations.";
  fp.performance_by_task_type = "Level 1 fine, level 3 weak.";
  fp.strengths = "- concise answers";
  fp.weaknesses = "- hallucination: invents figures when sources are thin";
  fp.capability_boundaries = "- multi-hop retrieval";
  fp.recommendations = "- verify sources before quoting";
  fp.overall_assessment = "Usable with oversight.";
  fp.overall_score = 6.5;
  fp.weakness_tags = {"hallucination"};
  return fp;
}

const std::string kReportReply =
    "### 1. Core Capability Assessment\n"
    "Strong arithmetic foundation.\n"
    "### 2. Performance by Task Type\n"
    "Struggles on level 3 retrieval.\n"
    "### 3. Strengths and Weaknesses Analysis\n"
    "- **Key Strengths**: concise, fast\n"
    "- **Key Weaknesses**:\n"
    "  - hallucination: fabricates citations under pressure\n"
    "  - premature-conclusion: rushes to conclusions on long chains\n"
    "- **Capability Boundaries**: no video understanding\n"
    "### 4. Recommendations for Improvement\n"
    "Cross-check every figure.\n"
    "### 5. Overall Evaluation\n"
    "Promising but unreliable.\n"
    "- **Overall Score**: 6.5 / 10\n";

}  // namespace

TEST_CASE("analysis replies split into sections by lenient headings") {
  auto analysis = sysid::parse_analysis_reply(
      "### 1. Comparison of Problem-Solving Approaches\n"
      "Took the direct route.\n"
      "2. **Tool Usage**: picked the calculator early\n"
      "### Information Acquisition\n"
      "Only the prompt.\n"
      "- Reasoning Process Assessment: linear and shallow\n"
      "### Error Analysis\n"
      "Misread the year.\n"
      "Dropped a unit.\n"
      "### Summary of Strengths\n"
      "Concise.\n"
      "### Recommendations\n"
      "Check units.\n");
  CHECK(analysis.approach_comparison == "Took the direct route.");
  CHECK(analysis.tool_usage == "picked the calculator early");
  CHECK(analysis.information_acquisition == "Only the prompt.");
  CHECK(analysis.reasoning_assessment == "linear and shallow");
  CHECK(analysis.error_analysis == "Misread the year.\nDropped a unit.");
  CHECK(analysis.strengths == "Concise.");
  CHECK(analysis.recommendations == "Check units.");
}

TEST_CASE("an unstructured analysis reply survives whole in error_analysis") {
  auto analysis = sysid::parse_analysis_reply("just a blob of prose, no headings");
  CHECK(analysis.error_analysis == "just a blob of prose, no headings");
  CHECK(analysis.approach_comparison.empty());
}

TEST_CASE("analyze_task renders run facts into the request") {
  auto prompts = PromptLibrary::builtin();
  gateway::ScriptedBackend backend;
  std::string seen_user;
  std::string seen_tag;
  backend.set_handler([&](const gateway::ChatRequest& request) {
    seen_user = request.messages.back().content;
    seen_tag = request.request_tag;
    return "### Error Analysis\nnothing notable\n";
  });

  store::LoadedRun run;
  run.manifest.run_id = "probe-1";
  run.manifest.task_id = "t-9";
  sysid::TaskFacts facts;
  facts.question = "How many pages?";
  facts.level = 2;
  facts.gold_answer = "93";
  facts.was_correct = false;

  sysid::AnalyzeOptions options;
  options.prompts = &prompts;
  options.model_id = "scripted-model";

  // a run with no recorded steps is reported as a missing log, not skipped
  auto analysis = sysid::analyze_task(run, facts, backend, options);
  CHECK(seen_user.find("Log file not found") != std::string::npos);
  CHECK(seen_user.find("How many pages?") != std::string::npos);
  CHECK(seen_user.find("**Was the Agent's Answer Correct?**: No") != std::string::npos);
  CHECK(seen_tag == "probe-1/analysis");
  CHECK(analysis.task_id == "t-9");
  CHECK(analysis.level == 2);
  CHECK(analysis.error_analysis == "nothing notable");

  // long logs keep their tail behind an explicit truncation marker
  control::TrajectoryStep step;
  step.actor = control::Actor::plant;
  step.content = std::string(3000, 'x') + "TAIL-SENTINEL";
  run.steps = {step};
  options.log_budget_chars = 500;
  sysid::analyze_task(run, facts, backend, options);
  CHECK(seen_user.find("[log truncated:") != std::string::npos);
  CHECK(seen_user.find("TAIL-SENTINEL") != std::string::npos);
  CHECK(seen_user.find(std::string(600, 'x')) == std::string::npos);
}

TEST_CASE("weakness tag extraction uses the controlled vocabulary") {
  auto tags = sysid::extract_weakness_tags(
      "The agent tends to hallucinate sources and rushes to conclusions; its error "
      "handling is brittle, it gives up after one failure.");
  REQUIRE(tags.size() == 3);
  CHECK(tags[0] == "hallucination");
  CHECK(tags[1] == "premature-conclusion");
  CHECK(tags[2] == "brittle-error-handling");
  CHECK(sysid::extract_weakness_tags("spotless performance").empty());
}

TEST_CASE("fingerprint validation pins tags to the weaknesses text") {
  auto fp = demo_fingerprint();
  CHECK(sysid::validate_fingerprint(fp).empty());

  auto unknown_tag = fp;
  unknown_tag.weakness_tags.push_back("lazy");
  CHECK_FALSE(sysid::validate_fingerprint(unknown_tag).empty());

  auto unmentioned = fp;
  unmentioned.weakness_tags.push_back("constraint-negligence");
  CHECK_FALSE(sysid::validate_fingerprint(unmentioned).empty());

  auto untagged = fp;
  untagged.weaknesses += "\n- also fabricates data and ignores explicit constraints";
  CHECK_FALSE(sysid::validate_fingerprint(untagged).empty());

  auto bad_score = fp;
  bad_score.overall_score = 11.0;
  CHECK_FALSE(sysid::validate_fingerprint(bad_score).empty());
}

TEST_CASE("overall score parsing takes the last N / 10 occurrence") {
  CHECK(sysid::parse_overall_score("- **Overall Score**: 6.5 / 10") == 6.5);
  CHECK(sysid::parse_overall_score("scored 3/10 early, settled on 7.25 / 10") == 7.25);
  CHECK_FALSE(sysid::parse_overall_score("no score anywhere").has_value());
}

TEST_CASE("fingerprint rendering drops whole sections to fit the budget") {
  auto fp = demo_fingerprint();
  const std::string header = "## Agent's Reasoning Feature:";

  auto full = sysid::render_fingerprint(fp, 100000, header);
  CHECK(full.rfind(header, 0) == 0);
  CHECK(full.find("Recommendations for Improvement") != std::string::npos);
  CHECK(full.find("hallucination") != std::string::npos);
  CHECK(full.find("6.5 / 10") != std::string::npos);

  // shrink until the recommendations section is the first casualty
  int full_tokens = sysid::estimate_tokens(full);
  auto tighter = sysid::render_fingerprint(fp, full_tokens - 1, header);
  CHECK(tighter.find("Recommendations for Improvement") == std::string::npos);
  CHECK(tighter.find("hallucination") != std::string::npos);

  // the minimal form keeps header, weaknesses and the score line
  std::string minimal;
  int budget = full_tokens;
  for (; budget > 0; --budget) {
    try {
      minimal = sysid::render_fingerprint(fp, budget, header);
    } catch (const sysid::FingerprintRenderOverflow&) {
      break;
    }
  }
  CHECK(minimal.rfind(header, 0) == 0);
  CHECK(minimal.find("hallucination") != std::string::npos);
  CHECK(minimal.find("6.5 / 10") != std::string::npos);
  CHECK(minimal.find("Core Capability") == std::string::npos);
  CHECK_THROWS_AS(sysid::render_fingerprint(fp, 1, header),
                  sysid::FingerprintRenderOverflow);
}

TEST_CASE("a larger render budget never loses content present in a smaller one") {
  auto fp = demo_fingerprint();
  const std::string header = "## Agent's Reasoning Feature:";
  std::string previous;
  for (int budget = 40; budget <= 400; budget += 20) {
    std::string text;
    try {
      text = sysid::render_fingerprint(fp, budget, header);
    } catch (const sysid::FingerprintRenderOverflow&) {
      continue;
    }
    CHECK(text.size() >= previous.size());
    previous = text;
  }
}

TEST_CASE("fingerprint JSON round-trip and disk format") {
  auto fp = demo_fingerprint();
  fp.source_run_ids = {"r1", "r2"};
  fp.source_task_ids = {"t1", "t2"};
  fp.model_id = "scripted-model";

  auto restored = sysid::fingerprint_from_json(sysid::fingerprint_to_json(fp));
  CHECK(restored.weaknesses == fp.weaknesses);
  CHECK(restored.weakness_tags == fp.weakness_tags);
  CHECK(restored.overall_score == fp.overall_score);
  CHECK(restored.source_task_ids == fp.source_task_ids);

  auto dir = temp_dir("save");
  sysid::save_fingerprint(fp, dir);
  auto loaded = sysid::load_fingerprint(dir / "fingerprint.json");
  CHECK(loaded.weaknesses == fp.weaknesses);
  CHECK(std::filesystem::exists(dir / "fingerprint.md"));

  CHECK_THROWS_AS(sysid::load_fingerprint(dir / "missing.json"),
                  sysid::MalformedFingerprint);
  CHECK_THROWS_AS(sysid::fingerprint_from_json(nlohmann::json{{"weaknesses", "x"}}),
                  sysid::MalformedFingerprint);
}

TEST_CASE("synthesis parses the sectioned report into a fingerprint") {
  auto prompts = PromptLibrary::builtin();
  gateway::ScriptedBackend backend;
  backend.push_reply("synthesis", kReportReply);

  sysid::TaskAnalysis analysis;
  analysis.task_id = "t-1";
  analysis.run_id = "r-1";
  analysis.error_analysis = "misquoted a source";
  std::vector<sysid::TaskAnalysis> analyses = {analysis};

  sysid::SynthesizeOptions options;
  options.prompts = &prompts;
  options.model_id = "scripted-model";

  auto fp = sysid::synthesize_fingerprint(analyses, backend, options);
  CHECK(fp.core_capabilities == "Strong arithmetic foundation.");
  CHECK(fp.weaknesses.find("hallucination") != std::string::npos);
  CHECK(fp.weakness_tags == std::vector<std::string>{"hallucination", "premature-conclusion"});
  CHECK(fp.overall_score == 6.5);
  CHECK(fp.source_task_ids == std::vector<std::string>{"t-1"});
  CHECK(sysid::validate_fingerprint(fp).empty());
}

TEST_CASE("synthesis map-reduces oversized analysis sets in chunks") {
  auto prompts = PromptLibrary::builtin();
  gateway::ScriptedBackend backend;
  // 5 analyses with chunk_size 2 -> three partials (L0), then two (L1),
  // then the final single-request pass
  backend.push_reply("synthesis/L0/0", kReportReply);
  backend.push_reply("synthesis/L0/1", kReportReply);
  backend.push_reply("synthesis/L0/2", kReportReply);
  backend.push_reply("synthesis/L1/0", kReportReply);
  backend.push_reply("synthesis/L1/1", kReportReply);
  backend.push_reply("synthesis/L2", kReportReply);

  std::vector<sysid::TaskAnalysis> analyses(5);
  for (int i = 0; i < 5; ++i) {
    analyses[i].task_id = util::cat("t-", i);
    analyses[i].run_id = util::cat("r-", i);
    analyses[i].error_analysis = "noisy";
  }

  sysid::SynthesizeOptions options;
  options.prompts = &prompts;
  options.model_id = "scripted-model";
  options.chunk_size = 2;

  auto fp = sysid::synthesize_fingerprint(analyses, backend, options);
  CHECK(backend.calls() == 6);
  CHECK(fp.source_task_ids.size() == 5);

  gateway::ScriptedBackend malformed;
  malformed.set_handler([](const gateway::ChatRequest&) { return "total nonsense"; });
  options.chunk_size = 8;
  CHECK_THROWS_AS(sysid::synthesize_fingerprint(analyses, malformed, options),
                  sysid::MalformedFingerprint);
  std::vector<sysid::TaskAnalysis> none;
  CHECK_THROWS_AS(sysid::synthesize_fingerprint(none, backend, options), sysid::EmptyCorpus);
}

TEST_CASE("identification runs probes, analyzes them, and saves the profile") {
  bench::FailureProfile profile;
  profile.rates = {{"hallucination", 1.0}};  // every probe exhibits the weakness
  bench::SimulatedPlant plant(profile, 11);
  auto registry = tools::make_builtin_registry({});
  auto prompts = PromptLibrary::builtin();

  control::RunEnv env;
  env.backend = &plant;
  env.base_tools = &registry;
  env.prompts = &prompts;

  std::vector<bench::TaskRecord> corpus;
  for (int i = 0; i < 4; ++i) {
    bench::TaskRecord record;
    record.task_id = util::cat("probe-", i);
    record.level = 1;
    record.question = bench::SimulatedPlant::question_text(record.task_id);
    record.gold_answer = bench::SimulatedPlant::reference_answer(record.task_id);
    record.kind = control::AnswerKind::string_;
    corpus.push_back(std::move(record));
  }

  sysid::IdentifyOptions options;
  options.run_template.model_id = "sim-plant";
  options.analyze.model_id = "sim-plant";
  options.synthesize.model_id = "sim-plant";
  options.out_dir = temp_dir("identify");

  auto fp = sysid::identify(corpus, options, env);
  CHECK(fp.weakness_tags == std::vector<std::string>{"hallucination"});
  CHECK(fp.source_task_ids.size() == 4);
  CHECK(fp.model_id == "sim-plant");
  CHECK(sysid::validate_fingerprint(fp).empty());
  CHECK(std::filesystem::exists(options.out_dir / "fingerprint.json"));
  CHECK(std::filesystem::exists(options.out_dir / "fingerprint.md"));

  // the corpus must stay disjoint from the evaluation set
  options.eval_task_ids = {"probe-2", "nonexistent"};
  CHECK_THROWS_AS(sysid::identify(corpus, options, env), sysid::DatasetOverlap);
  CHECK_THROWS_AS(sysid::identify({}, options, env), sysid::EmptyCorpus);
}
