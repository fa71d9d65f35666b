#include "maneuver/prompts.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "maneuver/prompts_embedded.hpp"
#include "maneuver/util/digest.hpp"
#include "maneuver/util/strings.hpp"

namespace maneuver {
namespace {

bool identifier_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// A slot is "{" identifier "}". Anything else brace-shaped is literal text,
// prompt bodies are allowed to contain code snippets.
std::string find_slot(std::string_view text, std::size_t open) {
  auto close = text.find('}', open + 1);
  if (close == std::string_view::npos) return {};
  auto name = text.substr(open + 1, close - open - 1);
  if (name.empty()) return {};
  if (std::isdigit(static_cast<unsigned char>(name.front()))) return {};
  for (char c : name) {
    if (!identifier_char(c)) return {};
  }
  return std::string(name);
}

}  // namespace

std::string prompt_version(std::string_view text) {
  return util::sha256_hex(text).substr(0, 12);
}

PromptLibrary PromptLibrary::builtin() {
  PromptLibrary lib;
  auto add = [&lib](std::string name, const char* text) {
    PromptAsset asset{std::move(name), text, prompt_version(text)};
    lib.assets_.emplace(asset.name, std::move(asset));
  };
  add("execution_agent", embedded::kExecutionAgent);
  add("guard_agent", embedded::kGuardAgent);
  add("sysid_analysis", embedded::kSysidAnalysis);
  add("sysid_analysis_system", embedded::kSysidAnalysisSystem);
  add("sysid_synthesis", embedded::kSysidSynthesis);
  add("fingerprint_header", embedded::kFingerprintHeader);
  return lib;
}

PromptLibrary PromptLibrary::from_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw UnknownPrompt(util::cat("prompt directory not found: ", dir.string()));
  }
  PromptLibrary lib;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    PromptAsset asset{entry.path().stem().string(), buf.str(), {}};
    asset.version = prompt_version(asset.text);
    lib.assets_.emplace(asset.name, std::move(asset));
  }
  if (lib.assets_.empty()) {
    throw UnknownPrompt(util::cat("no .txt prompts in: ", dir.string()));
  }
  return lib;
}

const PromptAsset& PromptLibrary::get(std::string_view name) const {
  auto it = assets_.find(name);
  if (it == assets_.end()) {
    throw UnknownPrompt(util::cat("unknown prompt asset: ", name));
  }
  return it->second;
}

bool PromptLibrary::has(std::string_view name) const {
  return assets_.find(name) != assets_.end();
}

std::map<std::string, std::string> PromptLibrary::versions() const {
  std::map<std::string, std::string> out;
  for (const auto& [name, asset] : assets_) out.emplace(name, asset.version);
  return out;
}

std::string render_prompt(std::string_view text,
                          const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(text.size());
  std::set<std::string> used;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto open = text.find('{', pos);
    if (open == std::string_view::npos) {
      out.append(text.substr(pos));
      break;
    }
    out.append(text.substr(pos, open - pos));
    auto name = find_slot(text, open);
    if (name.empty()) {
      out.push_back('{');
      pos = open + 1;
      continue;
    }
    auto it = values.find(name);
    if (it == values.end()) {
      throw PlaceholderMismatch(util::cat("no value for placeholder {", name, "}"));
    }
    out.append(it->second);
    used.insert(name);
    pos = open + name.size() + 2;
  }
  for (const auto& [name, value] : values) {
    (void)value;
    if (!used.count(name)) {
      throw PlaceholderMismatch(util::cat("value for absent placeholder {", name, "}"));
    }
  }
  return out;
}

}  // namespace maneuver
