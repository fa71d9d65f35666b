#include "maneuver/tools/registry.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "maneuver/util/strings.hpp"

namespace maneuver::tools {

using nlohmann::json;

std::string_view param_kind_name(ParamKind kind) {
  switch (kind) {
    case ParamKind::string_: return "string";
    case ParamKind::number: return "number";
    case ParamKind::boolean: return "boolean";
  }
  return "string";
}

void ToolRegistry::insert(ToolSpec spec, ToolFn fn) {
  if (handlers_.count(spec.name)) {
    throw DuplicateTool(util::cat("tool already registered: ", spec.name));
  }
  handlers_.emplace(spec.name, std::move(fn));
  specs_.push_back(std::move(spec));
}

void ToolRegistry::register_tool(ToolSpec spec, ToolFn fn) {
  if (spec.name == kGuardToolName) {
    throw ReservedToolName(util::cat("'", kGuardToolName,
                                     "' is reserved for the guard; use register_guard"));
  }
  if (spec.name.empty()) throw Error("tool name is empty");
  insert(std::move(spec), std::move(fn));
}

void ToolRegistry::register_guard(std::string description, ToolFn fn) {
  ToolSpec spec;
  spec.name = std::string(kGuardToolName);
  spec.description = std::move(description);
  spec.parameters = {{"question", ParamKind::string_, false,
                      "what you want reviewed or advised on"}};
  insert(std::move(spec), std::move(fn));
}

bool ToolRegistry::has(std::string_view name) const {
  return handlers_.find(name) != handlers_.end();
}

bool ToolRegistry::has_guard() const {
  return has(kGuardToolName);
}

const ToolSpec* ToolRegistry::find(std::string_view name) const {
  for (const auto& spec : specs_) {
    if (spec.name == name) return &spec;
  }
  return nullptr;
}

ToolResult ToolRegistry::dispatch(const ToolCall& call) const {
  auto it = handlers_.find(call.name);
  if (it == handlers_.end()) {
    return {call.name, util::cat("unknown tool '", call.name, "'; it is not registered in this mode"),
            true};
  }
  try {
    auto result = it->second(call.arguments);
    result.tool_name = call.name;
    return result;
  } catch (const std::exception& e) {
    return {call.name, util::cat("tool '", call.name, "' failed: ", e.what()), true};
  }
}

std::string ToolRegistry::render_roster() const {
  std::ostringstream os;
  int index = 1;
  for (const auto& spec : specs_) {
    os << index++ << ". " << spec.name << ": " << spec.description << "\n";
    for (const auto& p : spec.parameters) {
      os << "   - " << p.name << " (" << param_kind_name(p.kind)
         << (p.required ? ", required" : ", optional") << "): " << p.description << "\n";
    }
  }
  return os.str();
}

// ---- calculator -------------------------------------------------------------

namespace {

// Grammar: expr := term (('+'|'-') term)*
//          term := unary (('*'|'/'|'%') unary)*
//          unary := '-' unary | power
//          power := atom ('^' unary)?          (right associative)
//          atom := number | '(' expr ')'
struct ArithmeticParser {
  std::string_view text;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  bool eat(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(std::string_view what) const {
    throw Error(util::cat("arithmetic error at offset ", pos, ": ", what));
  }

  double parse_expr() {
    double value = parse_term();
    while (true) {
      if (eat('+')) {
        value += parse_term();
      } else if (eat('-')) {
        value -= parse_term();
      } else {
        return value;
      }
    }
  }

  double parse_term() {
    double value = parse_unary();
    while (true) {
      if (eat('*')) {
        value *= parse_unary();
      } else if (eat('/')) {
        double rhs = parse_unary();
        if (rhs == 0.0) fail("division by zero");
        value /= rhs;
      } else if (eat('%')) {
        double rhs = parse_unary();
        if (rhs == 0.0) fail("modulo by zero");
        value = std::fmod(value, rhs);
      } else {
        return value;
      }
    }
  }

  double parse_unary() {
    if (eat('-')) return -parse_unary();
    return parse_power();
  }

  double parse_power() {
    double base = parse_atom();
    if (eat('^')) return std::pow(base, parse_unary());
    return base;
  }

  double parse_atom() {
    skip_ws();
    if (eat('(')) {
      double value = parse_expr();
      if (!eat(')')) fail("expected ')'");
      return value;
    }
    std::size_t start = pos;
    while (pos < text.size() &&
           (std::isdigit(static_cast<unsigned char>(text[pos])) || text[pos] == '.')) {
      ++pos;
    }
    if (pos == start) fail("expected a number");
    try {
      return std::stod(std::string(text.substr(start, pos - start)));
    } catch (const std::exception&) {
      fail("unreadable number");
    }
  }

  double run() {
    double value = parse_expr();
    skip_ws();
    if (pos != text.size()) fail("trailing input");
    return value;
  }
};

std::string format_number(double value) {
  if (std::isfinite(value) && value == std::floor(value) && std::fabs(value) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.0f", value);
    return buf;
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

std::string require_string_arg(const json& args, std::string_view name) {
  if (!args.is_object() || !args.contains(name) || !args[std::string(name)].is_string()) {
    throw Error(util::cat("missing string argument '", name, "'"));
  }
  return args[std::string(name)].get<std::string>();
}

}  // namespace

double evaluate_arithmetic(std::string_view expression) {
  ArithmeticParser parser{expression};
  return parser.run();
}

ToolRegistry make_builtin_registry(const BuiltinOptions& options) {
  ToolRegistry registry;

  registry.register_tool(
      {"calculator",
       "Evaluates an arithmetic expression with + - * / % ^ and parentheses.",
       {{"expression", ParamKind::string_, true, "expression to evaluate"}}},
      [](const json& args) -> ToolResult {
        auto expr = require_string_arg(args, "expression");
        return {"", format_number(evaluate_arithmetic(expr)), false};
      });

  if (!options.sandbox_root.empty()) {
    auto root = std::filesystem::weakly_canonical(options.sandbox_root);
    registry.register_tool(
        {"file_reader",
         "Reads a UTF-8 text file from the task workspace.",
         {{"path", ParamKind::string_, true, "path relative to the workspace root"}}},
        [root](const json& args) -> ToolResult {
          auto rel = require_string_arg(args, "path");
          auto full = std::filesystem::weakly_canonical(root / rel);
          auto [mismatch_root, mismatch_full] =
              std::mismatch(root.begin(), root.end(), full.begin(), full.end());
          if (mismatch_root != root.end()) {
            return {"", util::cat("path escapes the workspace: ", rel), true};
          }
          std::ifstream in(full, std::ios::binary);
          if (!in) return {"", util::cat("cannot open: ", rel), true};
          std::ostringstream buf;
          buf << in.rdbuf();
          return {"", buf.str(), false};
        });
  }

  if (!options.benchmark_mode) {
    auto key = options.answer_key;
    registry.register_tool(
        {"answer_checker",
         "Compares a candidate answer against the reference answer for a task.",
         {{"task_id", ParamKind::string_, true, "task identifier"},
          {"candidate", ParamKind::string_, true, "answer to check"}}},
        [key](const json& args) -> ToolResult {
          auto task_id = require_string_arg(args, "task_id");
          auto candidate = require_string_arg(args, "candidate");
          auto it = key.find(task_id);
          if (it == key.end()) return {"", util::cat("no reference answer for ", task_id), true};
          bool match = util::collapse_whitespace(util::to_lower(candidate)) ==
                       util::collapse_whitespace(util::to_lower(it->second));
          return {"", match ? "match" : "mismatch", false};
        });
  }

  return registry;
}

}  // namespace maneuver::tools
