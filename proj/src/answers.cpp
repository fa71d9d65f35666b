#include "maneuver/bench/answers.hpp"

#include <cstdio>
#include <cstdlib>

#include "maneuver/control/context.hpp"
#include "maneuver/util/strings.hpp"

namespace maneuver::bench {

using control::AnswerKind;

Extracted extract_answer(std::string_view raw) {
  auto scan = control::scan_answer_tag(raw);
  switch (scan.status) {
    case control::TagScan::ok: return {ExtractStatus::ok, scan.answer};
    case control::TagScan::empty: return {ExtractStatus::empty_answer, {}};
    case control::TagScan::missing: break;
  }
  return {ExtractStatus::missing_tag, {}};
}

namespace {

// Strips currency/percent decorations and thousands separators before the
// numeric parse. Multi-byte symbols are removed as substrings.
std::string strip_number_decorations(std::string_view raw) {
  std::string s{util::trim(raw)};
  for (std::string_view token : {"$", "%", ",", "€", "£", " "}) {
    std::size_t pos;
    while ((pos = s.find(token)) != std::string::npos) s.erase(pos, token.size());
  }
  return s;
}

bool parse_full_double(const std::string& s, double& value) {
  if (s.empty()) return false;
  char* end = nullptr;
  value = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

std::string canonical_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", value);
  return buf;
}

std::string normalize_string(std::string_view raw) {
  auto s = util::collapse_whitespace(util::to_lower(raw));
  for (std::string_view article : {"the ", "an ", "a "}) {
    if (s.rfind(article, 0) == 0) {
      s.erase(0, article.size());
      break;
    }
  }
  return s;
}

}  // namespace

std::string normalize_answer(std::string_view raw, AnswerKind kind) {
  switch (kind) {
    case AnswerKind::number: {
      auto stripped = strip_number_decorations(raw);
      double value;
      if (parse_full_double(stripped, value)) return canonical_number(value);
      // not actually numeric; fall back to the string rules so the
      // comparison stays total
      return normalize_string(raw);
    }
    case AnswerKind::string_:
      return normalize_string(raw);
    case AnswerKind::list: {
      auto parts = util::split(raw, ',');
      std::vector<std::string> normalized;
      normalized.reserve(parts.size());
      for (const auto& part : parts) {
        normalized.push_back(normalize_answer(part, AnswerKind::unknown));
      }
      return util::join(normalized, ", ");
    }
    case AnswerKind::formatted:
      return util::collapse_whitespace(raw);
    case AnswerKind::unknown: {
      auto stripped = strip_number_decorations(raw);
      double value;
      if (parse_full_double(stripped, value)) return canonical_number(value);
      return normalize_string(raw);
    }
  }
  return std::string(raw);
}

bool score_answer(std::string_view predicted, std::string_view gold, AnswerKind kind) {
  return normalize_answer(predicted, kind) == normalize_answer(gold, kind);
}

}  // namespace maneuver::bench
