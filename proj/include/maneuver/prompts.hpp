#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "maneuver/error.hpp"

namespace maneuver {

class UnknownPrompt : public Error {
 public:
  using Error::Error;
};

// A {placeholder} in the template has no value, or a value was passed for a
// placeholder the template does not contain.
class PlaceholderMismatch : public Error {
 public:
  using Error::Error;
};

struct PromptAsset {
  std::string name;
  std::string text;
  std::string version;  // first 12 hex chars of sha256(text)
};

// Named prompt templates. builtin() serves the copies embedded at build time;
// from_directory() loads *.txt overrides so prompts can be iterated on
// without recompiling.
class PromptLibrary {
 public:
  static PromptLibrary builtin();
  static PromptLibrary from_directory(const std::filesystem::path& dir);

  const PromptAsset& get(std::string_view name) const;
  bool has(std::string_view name) const;
  std::map<std::string, std::string> versions() const;

 private:
  std::map<std::string, PromptAsset, std::less<>> assets_;
};

// Substitutes every {name} slot in the template. Strict: unknown slots and
// unused values both throw PlaceholderMismatch, so template drift is loud.
std::string render_prompt(std::string_view text,
                          const std::map<std::string, std::string>& values);

std::string prompt_version(std::string_view text);

}  // namespace maneuver
