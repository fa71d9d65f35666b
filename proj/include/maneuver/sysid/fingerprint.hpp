#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "maneuver/error.hpp"

namespace maneuver::sysid {

class MalformedFingerprint : public Error {
 public:
  using Error::Error;
};

// Rendered fingerprint exceeds the guard's context budget even after
// section dropping.
class FingerprintRenderOverflow : public Error {
 public:
  using Error::Error;
};

// Structured performance profile of an execution agent, distilled offline
// from per-task analyses. The weakness tags double as the shared failure
// vocabulary used by advisory extraction.
struct PerformanceFingerprint {
  std::string agent_label;
  std::string core_capabilities;
  std::string performance_by_task_type;
  std::string strengths;
  std::string weaknesses;
  std::string capability_boundaries;
  std::string recommendations;
  std::string overall_assessment;
  double overall_score = 0.0;  // 0..10
  std::vector<std::string> weakness_tags;

  // provenance
  std::vector<std::string> source_run_ids;
  std::vector<std::string> source_task_ids;
  std::string model_id;
  int format_version = 1;
};

// Controlled weakness vocabulary: tag -> match stems. A tag is "mentioned"
// by a text when any stem occurs case-insensitively.
const std::vector<std::pair<std::string, std::vector<std::string>>>& weakness_vocabulary();

// Tags whose stems occur in the text, in vocabulary order, deduplicated.
std::vector<std::string> extract_weakness_tags(std::string_view text);

// Invariant check: weakness_tags must be exactly the vocabulary tags
// mentioned by the weaknesses section. Returns human-readable violations.
std::vector<std::string> validate_fingerprint(const PerformanceFingerprint& fp);

// chars/4, rounded up; the render budget is expressed in these units.
int estimate_tokens(std::string_view text);

// Renders the fingerprint under the injection header. When over budget,
// whole sections are dropped in fixed priority order (recommendations go
// first, weaknesses last); the header itself is never dropped. Throws
// FingerprintRenderOverflow when even the minimal form is too large.
std::string render_fingerprint(const PerformanceFingerprint& fp, int budget_tokens,
                               const std::string& header);

nlohmann::json fingerprint_to_json(const PerformanceFingerprint& fp);
PerformanceFingerprint fingerprint_from_json(const nlohmann::json& j);

// fingerprint.json next to a human-readable fingerprint.md
void save_fingerprint(const PerformanceFingerprint& fp, const std::filesystem::path& dir);
PerformanceFingerprint load_fingerprint(const std::filesystem::path& json_path);

// "<number> / 10" anywhere in the text; the last occurrence wins.
std::optional<double> parse_overall_score(std::string_view text);

}  // namespace maneuver::sysid
