#pragma once

#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "maneuver/error.hpp"

namespace maneuver::tools {

class DuplicateTool : public Error {
 public:
  using Error::Error;
};

// "maneuvering" is the guard's reserved name; register_tool refuses it.
class ReservedToolName : public Error {
 public:
  using Error::Error;
};

inline constexpr std::string_view kGuardToolName = "maneuvering";

enum class ParamKind { string_, number, boolean };

std::string_view param_kind_name(ParamKind kind);

struct ToolParam {
  std::string name;
  ParamKind kind = ParamKind::string_;
  bool required = true;
  std::string description;
};

struct ToolSpec {
  std::string name;
  std::string description;
  std::vector<ToolParam> parameters;
};

struct ToolCall {
  std::string name;
  nlohmann::json arguments = nlohmann::json::object();
};

struct ToolResult {
  std::string tool_name;
  std::string content;
  bool is_error = false;
};

using ToolFn = std::function<ToolResult(const nlohmann::json& arguments)>;

// Name-keyed dispatch table. Registration order is preserved because the
// rendered tool roster is part of the plant's prompt and must be stable.
class ToolRegistry {
 public:
  void register_tool(ToolSpec spec, ToolFn fn);
  // Installs the guard tool under its reserved name.
  void register_guard(std::string description, ToolFn fn);

  bool has(std::string_view name) const;
  bool has_guard() const;
  const ToolSpec* find(std::string_view name) const;
  const std::vector<ToolSpec>& specs() const { return specs_; }

  // Never throws: unknown names, argument trouble and handler exceptions all
  // come back as is_error results, which the plant sees as observations.
  ToolResult dispatch(const ToolCall& call) const;

  // Numbered roster for the plant's system prompt.
  std::string render_roster() const;

 private:
  void insert(ToolSpec spec, ToolFn fn);

  std::vector<ToolSpec> specs_;
  std::map<std::string, ToolFn, std::less<>> handlers_;
};

struct BuiltinOptions {
  // Root directory file_reader is confined to; empty disables the tool.
  std::string sandbox_root;
  // Benchmark runs must not ship an oracle; this drops answer_checker.
  bool benchmark_mode = false;
  // gold answers for answer_checker, task_id -> answer
  std::map<std::string, std::string> answer_key;
};

ToolRegistry make_builtin_registry(const BuiltinOptions& options);

// Exposed for direct testing of the calculator grammar.
double evaluate_arithmetic(std::string_view expression);

}  // namespace maneuver::tools
