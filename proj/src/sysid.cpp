#include <cctype>
#include <limits>
#include <fstream>
#include <regex>
#include <set>

#include "maneuver/bench/answers.hpp"
#include "maneuver/control/context.hpp"
#include "maneuver/sysid/analysis.hpp"
#include "maneuver/sysid/fingerprint.hpp"
#include "maneuver/sysid/identify.hpp"
#include "maneuver/util/strings.hpp"

namespace maneuver::sysid {

using nlohmann::json;

// ---- weakness vocabulary ----------------------------------------------------

const std::vector<std::pair<std::string, std::vector<std::string>>>& weakness_vocabulary() {
  static const std::vector<std::pair<std::string, std::vector<std::string>>> vocab = {
      {"hallucination",
       {"hallucination", "hallucinat", "invent", "fabricat", "made-up", "made up"}},
      {"premature-conclusion",
       {"premature-conclusion", "premature conclusion", "prematurely conclud",
        "rush to conclu", "rushes to conclu", "jump to conclusion", "jumps to conclusion"}},
      {"flawed-implementation",
       {"flawed-implementation", "flawed implementation", "implementation error",
        "incorrect implementation", "buggy", "flawed logic"}},
      {"brittle-error-handling",
       {"brittle-error-handling", "brittle error handling", "error handling",
        "gives up after", "no retry"}},
      {"superficial-retrieval",
       {"superficial-retrieval", "superficial retrieval", "superficial search",
        "shallow retrieval", "shallow search", "surface-level retrieval"}},
      {"constraint-negligence",
       {"constraint-negligence", "constraint negligence", "constraint"}},
      {"incomplete-data-gathering",
       {"incomplete-data-gathering", "incomplete data gathering", "incomplete data",
        "partial data", "incomplete information"}},
  };
  return vocab;
}

std::vector<std::string> extract_weakness_tags(std::string_view text) {
  auto lowered = util::to_lower(text);
  std::vector<std::string> out;
  for (const auto& [tag, stems] : weakness_vocabulary()) {
    for (const auto& stem : stems) {
      if (lowered.find(stem) != std::string::npos) {
        out.push_back(tag);
        break;
      }
    }
  }
  return out;
}

std::vector<std::string> validate_fingerprint(const PerformanceFingerprint& fp) {
  std::vector<std::string> violations;
  auto mentioned = extract_weakness_tags(fp.weaknesses);
  std::set<std::string> mentioned_set(mentioned.begin(), mentioned.end());
  std::set<std::string> tagged_set(fp.weakness_tags.begin(), fp.weakness_tags.end());

  std::set<std::string> known;
  for (const auto& [tag, stems] : weakness_vocabulary()) {
    (void)stems;
    known.insert(tag);
  }
  for (const auto& tag : tagged_set) {
    if (!known.count(tag)) {
      violations.push_back(util::cat("tag '", tag, "' is not in the weakness vocabulary"));
    } else if (!mentioned_set.count(tag)) {
      violations.push_back(
          util::cat("tag '", tag, "' is not mentioned by the weaknesses section"));
    }
  }
  for (const auto& tag : mentioned_set) {
    if (!tagged_set.count(tag)) {
      violations.push_back(
          util::cat("weaknesses section mentions '", tag, "' but the tag list omits it"));
    }
  }
  if (fp.overall_score < 0.0 || fp.overall_score > 10.0) {
    violations.push_back(util::cat("overall_score out of range: ", fp.overall_score));
  }
  if (fp.format_version != 1) {
    violations.push_back(util::cat("unsupported format_version: ", fp.format_version));
  }
  return violations;
}

int estimate_tokens(std::string_view text) {
  return static_cast<int>((text.size() + 3) / 4);
}

// ---- rendering --------------------------------------------------------------

namespace {

std::string format_score(double score) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", score);
  return buf;
}

struct SectionPiece {
  const char* heading;
  const std::string* body;
  bool droppable;
};

std::string assemble_fingerprint_text(const PerformanceFingerprint& fp,
                                      const std::string& header,
                                      const std::set<std::string>& dropped) {
  auto want = [&dropped](const char* key) { return !dropped.count(key); };
  std::string out = header;
  if (out.empty() || out.back() != '\n') out += '\n';
  if (!fp.agent_label.empty()) out += util::cat("Agent under review: ", fp.agent_label, "\n");
  if (want("core_capabilities") && !fp.core_capabilities.empty()) {
    out += util::cat("### 1. Core Capability Assessment\n", fp.core_capabilities, "\n");
  }
  if (want("performance_by_task_type") && !fp.performance_by_task_type.empty()) {
    out += util::cat("### 2. Performance by Task Type\n", fp.performance_by_task_type, "\n");
  }
  out += "### 3. Strengths and Weaknesses Analysis\n";
  if (want("strengths") && !fp.strengths.empty()) {
    out += util::cat("- **Key Strengths**:\n", fp.strengths, "\n");
  }
  out += "- **Key Weaknesses**:\n";
  if (!fp.weaknesses.empty()) out += util::cat(fp.weaknesses, "\n");
  if (want("capability_boundaries") && !fp.capability_boundaries.empty()) {
    out += util::cat("- **Capability Boundaries**:\n", fp.capability_boundaries, "\n");
  }
  if (want("recommendations") && !fp.recommendations.empty()) {
    out += util::cat("### 4. Recommendations for Improvement\n", fp.recommendations, "\n");
  }
  out += "### 5. Overall Evaluation\n";
  if (want("overall_assessment") && !fp.overall_assessment.empty()) {
    out += util::cat(fp.overall_assessment, "\n");
  }
  out += util::cat("- **Overall Score**: ", format_score(fp.overall_score), " / 10\n");
  return out;
}

}  // namespace

std::string render_fingerprint(const PerformanceFingerprint& fp, int budget_tokens,
                               const std::string& header) {
  // weaknesses and the score line always survive; everything else yields in
  // this order when the budget pinches
  static const std::vector<std::string> drop_order = {
      "recommendations",     "performance_by_task_type", "core_capabilities",
      "strengths",           "overall_assessment",       "capability_boundaries",
  };
  std::set<std::string> dropped;
  auto text = assemble_fingerprint_text(fp, header, dropped);
  std::size_t next_drop = 0;
  while (estimate_tokens(text) > budget_tokens && next_drop < drop_order.size()) {
    dropped.insert(drop_order[next_drop++]);
    text = assemble_fingerprint_text(fp, header, dropped);
  }
  if (estimate_tokens(text) > budget_tokens) {
    throw FingerprintRenderOverflow(util::cat(
        "fingerprint needs ", estimate_tokens(text), " tokens even in minimal form; budget is ",
        budget_tokens));
  }
  return text;
}

// ---- serialization ----------------------------------------------------------

json fingerprint_to_json(const PerformanceFingerprint& fp) {
  json j;
  j["agent_label"] = fp.agent_label;
  j["capability_boundaries"] = fp.capability_boundaries;
  j["core_capabilities"] = fp.core_capabilities;
  j["format_version"] = fp.format_version;
  j["model_id"] = fp.model_id;
  j["overall_assessment"] = fp.overall_assessment;
  j["overall_score"] = fp.overall_score;
  j["performance_by_task_type"] = fp.performance_by_task_type;
  j["recommendations"] = fp.recommendations;
  j["source_run_ids"] = fp.source_run_ids;
  j["source_task_ids"] = fp.source_task_ids;
  j["strengths"] = fp.strengths;
  j["weakness_tags"] = fp.weakness_tags;
  j["weaknesses"] = fp.weaknesses;
  return j;
}

PerformanceFingerprint fingerprint_from_json(const json& j) {
  PerformanceFingerprint fp;
  try {
    fp.agent_label = j.value("agent_label", "");
    fp.capability_boundaries = j.value("capability_boundaries", "");
    fp.core_capabilities = j.value("core_capabilities", "");
    fp.format_version = j.value("format_version", 1);
    fp.model_id = j.value("model_id", "");
    fp.overall_assessment = j.value("overall_assessment", "");
    fp.overall_score = j.at("overall_score").get<double>();
    fp.performance_by_task_type = j.value("performance_by_task_type", "");
    fp.recommendations = j.value("recommendations", "");
    fp.source_run_ids = j.value("source_run_ids", std::vector<std::string>{});
    fp.source_task_ids = j.value("source_task_ids", std::vector<std::string>{});
    fp.strengths = j.value("strengths", "");
    fp.weakness_tags = j.at("weakness_tags").get<std::vector<std::string>>();
    fp.weaknesses = j.value("weaknesses", "");
  } catch (const json::exception& e) {
    throw MalformedFingerprint(util::cat("fingerprint JSON missing fields: ", e.what()));
  }
  return fp;
}

void save_fingerprint(const PerformanceFingerprint& fp, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "fingerprint.json", std::ios::binary | std::ios::trunc);
    out << fingerprint_to_json(fp).dump(2) << '\n';
  }
  auto header = PromptLibrary::builtin().get("fingerprint_header").text;
  std::ofstream out(dir / "fingerprint.md", std::ios::binary | std::ios::trunc);
  out << render_fingerprint(fp, std::numeric_limits<int>::max(), header);
}

PerformanceFingerprint load_fingerprint(const std::filesystem::path& json_path) {
  std::ifstream in(json_path, std::ios::binary);
  if (!in) throw MalformedFingerprint(util::cat("cannot open: ", json_path.string()));
  json doc = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) {
    throw MalformedFingerprint(util::cat("not JSON: ", json_path.string()));
  }
  return fingerprint_from_json(doc);
}

std::optional<double> parse_overall_score(std::string_view text) {
  static const std::regex pattern(R"(([0-9]+(?:\.[0-9]+)?)\s*/\s*10)");
  std::optional<double> score;
  auto begin = std::cregex_iterator(text.data(), text.data() + text.size(), pattern);
  for (auto it = begin; it != std::cregex_iterator(); ++it) {
    score = std::stod((*it)[1].str());
  }
  return score;
}

// ---- per-task analysis ------------------------------------------------------

namespace {

bool heading_like(std::string_view trimmed) {
  if (trimmed.empty()) return false;
  if (trimmed.front() == '#') return true;
  if (trimmed.rfind("**", 0) == 0) return true;
  if (trimmed.rfind("- ", 0) == 0 || trimmed.rfind("-\t", 0) == 0) return true;
  if (std::isdigit(static_cast<unsigned char>(trimmed.front()))) {
    auto dot = trimmed.find_first_not_of("0123456789");
    return dot != std::string_view::npos && trimmed[dot] == '.';
  }
  return false;
}

// Remainder of a heading line after the phrase's closing punctuation, so
// "2. **Tool Usage**: picked the calculator" keeps its inline content.
std::string heading_remainder(const std::string& line) {
  auto colon = line.find(':');
  if (colon == std::string::npos) return {};
  auto rest = util::trim(std::string_view(line).substr(colon + 1));
  std::string out(rest);
  while (!out.empty() && (out.front() == '*' || out.front() == ' ')) out.erase(out.begin());
  return out;
}

}  // namespace

TaskAnalysis parse_analysis_reply(std::string_view reply) {
  struct Target {
    const char* phrase;
    std::string TaskAnalysis::* field;
  };
  static const std::vector<Target> targets = {
      {"problem-solving approach", &TaskAnalysis::approach_comparison},
      {"comparison of problem", &TaskAnalysis::approach_comparison},
      {"tool usage", &TaskAnalysis::tool_usage},
      {"information acquisition", &TaskAnalysis::information_acquisition},
      {"reasoning process", &TaskAnalysis::reasoning_assessment},
      {"reasoning assessment", &TaskAnalysis::reasoning_assessment},
      {"error analysis", &TaskAnalysis::error_analysis},
      {"summary of strengths", &TaskAnalysis::strengths},
      {"strengths", &TaskAnalysis::strengths},
      {"recommendations", &TaskAnalysis::recommendations},
  };

  TaskAnalysis analysis;
  std::string TaskAnalysis::* current = nullptr;
  bool any_section = false;
  for (const auto& line : util::split_lines(reply)) {
    auto trimmed = util::trim(line);
    if (heading_like(trimmed)) {
      auto lowered = util::to_lower(trimmed);
      const Target* hit = nullptr;
      for (const auto& target : targets) {
        if (lowered.find(target.phrase) != std::string::npos) {
          hit = &target;
          break;
        }
      }
      if (hit) {
        current = hit->field;
        any_section = true;
        auto inline_part = heading_remainder(std::string(trimmed));
        if (!inline_part.empty()) {
          auto& field = analysis.*current;
          if (!field.empty()) field += '\n';
          field += inline_part;
        }
        continue;
      }
    }
    if (current != nullptr && !trimmed.empty()) {
      auto& field = analysis.*current;
      if (!field.empty()) field += '\n';
      field += std::string(trimmed);
    }
  }
  if (!any_section) {
    // keep the whole reply rather than dropping an unstructured analysis
    analysis.error_analysis = std::string(util::trim(reply));
  }
  return analysis;
}

TaskAnalysis analyze_task(const store::LoadedRun& run, const TaskFacts& facts,
                          gateway::Backend& backend, const AnalyzeOptions& options) {
  if (options.prompts == nullptr) throw Error("analyze_task: prompts not set");

  std::string log = run.steps.empty() ? std::string("Log file not found")
                                      : control::serialize_trajectory(run.steps);
  if (static_cast<int>(log.size()) > options.log_budget_chars) {
    auto keep = static_cast<std::size_t>(options.log_budget_chars);
    auto omitted = log.size() - keep;
    log = util::cat("[log truncated: first ", omitted, " characters omitted]\n",
                    log.substr(log.size() - keep));
  }

  std::string agent_response = "(no final response; the run did not complete)";
  if (run.result) agent_response = run.result->final_raw_output;

  gateway::ChatRequest request;
  request.model_id = options.model_id;
  request.temperature = options.temperature;
  request.max_output_tokens = options.max_output_tokens;
  request.request_tag = options.request_tag.empty()
                            ? util::cat(run.manifest.run_id, "/analysis")
                            : options.request_tag;
  request.messages.push_back(
      {gateway::Role::system, options.prompts->get("sysid_analysis_system").text});
  request.messages.push_back(
      {gateway::Role::user,
       render_prompt(options.prompts->get("sysid_analysis").text,
                     {{"question", facts.question},
                      {"level", std::to_string(facts.level)},
                      {"agent_response", agent_response},
                      {"answer", facts.gold_answer},
                      {"is_correct", facts.was_correct ? "Yes" : "No"},
                      {"reference_steps", facts.reference_steps.empty()
                                              ? std::string("(none provided)")
                                              : facts.reference_steps},
                      {"task_log", log}})});

  auto response = backend.complete(request);
  auto analysis = parse_analysis_reply(response.content);
  analysis.task_id = run.manifest.task_id;
  analysis.level = facts.level;
  analysis.was_correct = facts.was_correct;
  analysis.run_id = run.manifest.run_id;
  return analysis;
}

// ---- synthesis --------------------------------------------------------------

namespace {

std::string render_analysis_block(const TaskAnalysis& analysis) {
  std::string out = util::cat("## Analysis of task ", analysis.task_id, " (level ",
                              analysis.level, ", answer ",
                              analysis.was_correct ? "correct" : "incorrect", ")\n");
  auto add = [&out](const char* label, const std::string& body) {
    if (!body.empty()) out += util::cat("### ", label, "\n", body, "\n");
  };
  add("Problem-Solving Approach", analysis.approach_comparison);
  add("Tool Usage", analysis.tool_usage);
  add("Information Acquisition", analysis.information_acquisition);
  add("Reasoning Process", analysis.reasoning_assessment);
  add("Error Analysis", analysis.error_analysis);
  add("Strengths", analysis.strengths);
  add("Recommendations", analysis.recommendations);
  return out;
}

std::string call_synthesis(const std::vector<std::string>& blocks,
                           gateway::Backend& backend, const SynthesizeOptions& options,
                           const std::string& tag) {
  gateway::ChatRequest request;
  request.model_id = options.model_id;
  request.temperature = options.temperature;
  request.max_output_tokens = options.max_output_tokens;
  request.request_tag = tag;
  request.messages.push_back(
      {gateway::Role::system, options.prompts->get("sysid_analysis_system").text});
  request.messages.push_back(
      {gateway::Role::user,
       render_prompt(options.prompts->get("sysid_synthesis").text,
                     {{"analysis_count", std::to_string(blocks.size())},
                      {"analyses", util::join(blocks, "\n---\n")}})});
  return backend.complete(request).content;
}

struct FingerprintSections {
  std::string core_capabilities;
  std::string performance_by_task_type;
  std::string strengths;
  std::string weaknesses;
  std::string capability_boundaries;
  std::string recommendations;
  std::string overall_assessment;
  bool any = false;
};

FingerprintSections parse_report_sections(std::string_view reply) {
  struct Target {
    const char* phrase;
    std::string FingerprintSections::* field;
  };
  static const std::vector<Target> targets = {
      {"core capability", &FingerprintSections::core_capabilities},
      {"performance by task type", &FingerprintSections::performance_by_task_type},
      {"key strengths", &FingerprintSections::strengths},
      {"key weaknesses", &FingerprintSections::weaknesses},
      {"capability boundaries", &FingerprintSections::capability_boundaries},
      {"recommendations", &FingerprintSections::recommendations},
      {"overall evaluation", &FingerprintSections::overall_assessment},
      {"overall score", &FingerprintSections::overall_assessment},
  };

  FingerprintSections sections;
  std::string FingerprintSections::* current = nullptr;
  for (const auto& line : util::split_lines(reply)) {
    auto trimmed = util::trim(line);
    if (heading_like(trimmed)) {
      auto lowered = util::to_lower(trimmed);
      if (lowered.find("strengths and weaknesses") != std::string::npos) {
        current = nullptr;  // container heading for the key-* bullets
        sections.any = true;
        continue;
      }
      const Target* hit = nullptr;
      for (const auto& target : targets) {
        if (lowered.find(target.phrase) != std::string::npos) {
          hit = &target;
          break;
        }
      }
      if (hit) {
        current = hit->field;
        sections.any = true;
        auto inline_part = heading_remainder(std::string(trimmed));
        if (!inline_part.empty()) {
          auto& field = sections.*current;
          if (!field.empty()) field += '\n';
          field += inline_part;
        }
        continue;
      }
    }
    if (current != nullptr && !trimmed.empty()) {
      auto& field = sections.*current;
      if (!field.empty()) field += '\n';
      field += std::string(trimmed);
    }
  }
  return sections;
}

}  // namespace

PerformanceFingerprint synthesize_fingerprint(std::span<const TaskAnalysis> analyses,
                                              gateway::Backend& backend,
                                              const SynthesizeOptions& options) {
  if (options.prompts == nullptr) throw Error("synthesize_fingerprint: prompts not set");
  if (analyses.empty()) throw EmptyCorpus("no analyses to synthesize from");
  int chunk_size = std::max(1, options.chunk_size);

  std::vector<std::string> blocks;
  blocks.reserve(analyses.size());
  for (const auto& analysis : analyses) blocks.push_back(render_analysis_block(analysis));

  // map-reduce: fold chunks into partial reports until one request holds
  // everything, then parse the last reply as the fingerprint
  int level = 0;
  std::string reply;
  while (true) {
    if (static_cast<int>(blocks.size()) <= chunk_size) {
      reply = call_synthesis(blocks, backend, options,
                             level == 0 ? options.request_tag
                                        : util::cat(options.request_tag, "/L", level));
      break;
    }
    std::vector<std::string> reduced;
    for (std::size_t start = 0; start < blocks.size(); start += chunk_size) {
      std::vector<std::string> chunk(
          blocks.begin() + start,
          blocks.begin() + std::min(blocks.size(), start + chunk_size));
      reduced.push_back(call_synthesis(
          chunk, backend, options,
          util::cat(options.request_tag, "/L", level, "/", start / chunk_size)));
    }
    blocks = std::move(reduced);
    ++level;
  }

  auto sections = parse_report_sections(reply);
  if (!sections.any) {
    throw MalformedFingerprint("synthesis reply has no recognizable report sections");
  }
  auto score = parse_overall_score(reply);
  if (!score) {
    throw MalformedFingerprint("synthesis reply has no 'N / 10' overall score");
  }

  PerformanceFingerprint fp;
  fp.core_capabilities = sections.core_capabilities;
  fp.performance_by_task_type = sections.performance_by_task_type;
  fp.strengths = sections.strengths;
  fp.weaknesses = sections.weaknesses;
  fp.capability_boundaries = sections.capability_boundaries;
  fp.recommendations = sections.recommendations;
  fp.overall_assessment = sections.overall_assessment;
  fp.overall_score = *score;
  fp.weakness_tags = extract_weakness_tags(fp.weaknesses);
  fp.model_id = options.model_id;
  for (const auto& analysis : analyses) {
    fp.source_run_ids.push_back(analysis.run_id);
    fp.source_task_ids.push_back(analysis.task_id);
  }
  return fp;
}

// ---- identification pipeline ------------------------------------------------

PerformanceFingerprint identify(std::span<const bench::TaskRecord> corpus,
                                const IdentifyOptions& options,
                                const control::RunEnv& env) {
  if (corpus.empty()) throw EmptyCorpus("identification corpus is empty");

  std::set<std::string> eval_ids(options.eval_task_ids.begin(), options.eval_task_ids.end());
  std::vector<std::string> overlapping;
  for (const auto& record : corpus) {
    if (eval_ids.count(record.task_id)) overlapping.push_back(record.task_id);
  }
  if (!overlapping.empty()) {
    throw DatasetOverlap(util::cat("identification corpus shares ", overlapping.size(),
                                   " task(s) with the evaluation set: ",
                                   util::join(overlapping, ", ")));
  }

  std::vector<TaskAnalysis> analyses;
  analyses.reserve(corpus.size());
  for (const auto& record : corpus) {
    auto config = options.run_template;
    config.run_id = util::cat("ident__", util::sanitize_token(record.task_id), "__",
                              control::run_mode_name(options.probe_mode));
    config.seed = options.run_template.seed;
    auto result = control::run_task(bench::to_task_input(record), options.probe_mode,
                                    config, env);

    store::LoadedRun run;
    run.manifest.run_id = config.run_id;
    run.manifest.task_id = record.task_id;
    run.manifest.mode = std::string(control::run_mode_name(options.probe_mode));
    run.manifest.model_id = config.model_id;
    run.manifest.temperature = config.temperature;
    run.manifest.seed = config.seed;
    run.steps = result.steps;
    run.result = result;

    TaskFacts facts;
    facts.question = record.question;
    facts.level = record.level;
    facts.gold_answer = record.gold_answer;
    facts.reference_steps = record.reference_steps;
    facts.was_correct = result.extracted_answer &&
                        bench::score_answer(*result.extracted_answer, record.gold_answer,
                                            record.kind);

    auto analyze_options = options.analyze;
    analyze_options.prompts = options.analyze.prompts ? options.analyze.prompts : env.prompts;
    analyses.push_back(analyze_task(run, facts, *env.backend, analyze_options));
  }

  auto synth_options = options.synthesize;
  synth_options.prompts = synth_options.prompts ? synth_options.prompts : env.prompts;
  auto fp = synthesize_fingerprint(analyses, *env.backend, synth_options);
  fp.agent_label = options.run_template.model_id;

  auto violations = validate_fingerprint(fp);
  if (!violations.empty()) {
    throw MalformedFingerprint(util::cat("synthesized fingerprint failed validation: ",
                                         util::join(violations, "; ")));
  }
  if (!options.out_dir.empty()) save_fingerprint(fp, options.out_dir);
  return fp;
}

}  // namespace maneuver::sysid
