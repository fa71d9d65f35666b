#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "maneuver/tools/registry.hpp"

using namespace maneuver;
using nlohmann::json;

TEST_CASE("arithmetic grammar: precedence, unary and power") {
  CHECK(tools::evaluate_arithmetic("1+2*3") == doctest::Approx(7.0));
  CHECK(tools::evaluate_arithmetic("(1+2)*3") == doctest::Approx(9.0));
  CHECK(tools::evaluate_arithmetic("-2^2") == doctest::Approx(-4.0));    // unary binds last
  CHECK(tools::evaluate_arithmetic("2^3^2") == doctest::Approx(512.0));  // right-assoc
  CHECK(tools::evaluate_arithmetic("7 % 3") == doctest::Approx(1.0));
  CHECK(tools::evaluate_arithmetic(" 10 / 4 ") == doctest::Approx(2.5));
}

TEST_CASE("arithmetic grammar rejects malformed input with an offset") {
  CHECK_THROWS_WITH_AS(tools::evaluate_arithmetic("1+"), doctest::Contains("offset"),
                       Error);
  CHECK_THROWS_AS(tools::evaluate_arithmetic("1 1"), Error);   // trailing input
  CHECK_THROWS_AS(tools::evaluate_arithmetic(""), Error);
  CHECK_THROWS_AS(tools::evaluate_arithmetic("1/0"), Error);   // division by zero
  CHECK_THROWS_AS(tools::evaluate_arithmetic("(1+2"), Error);  // unbalanced
}

TEST_CASE("registry refuses duplicates and the reserved guard name") {
  tools::ToolRegistry registry;
  registry.register_tool({"echo", "repeats", {}},
                         [](const json&) { return tools::ToolResult{"echo", "ok", false}; });
  CHECK_THROWS_AS(registry.register_tool({"echo", "again", {}},
                                         [](const json&) {
                                           return tools::ToolResult{"echo", "", false};
                                         }),
                  tools::DuplicateTool);
  CHECK_THROWS_AS(
      registry.register_tool({std::string(tools::kGuardToolName), "sneaky", {}},
                             [](const json&) {
                               return tools::ToolResult{"", "", false};
                             }),
      tools::ReservedToolName);
  // the dedicated entry point installs it fine
  registry.register_guard("reviews reasoning",
                          [](const json&) { return tools::ToolResult{"", "fine", false}; });
  CHECK(registry.has_guard());
}

TEST_CASE("dispatch never throws: unknown tools and handler exceptions") {
  tools::ToolRegistry registry;
  registry.register_tool({"boom", "always fails", {}}, [](const json&) -> tools::ToolResult {
    throw std::runtime_error("kaput");
  });

  auto unknown = registry.dispatch({"ghost", json::object()});
  CHECK(unknown.is_error);
  CHECK(unknown.content.find("ghost") != std::string::npos);
  CHECK(unknown.content.find("not registered") != std::string::npos);

  auto crashed = registry.dispatch({"boom", json::object()});
  CHECK(crashed.is_error);
  CHECK(crashed.content.find("kaput") != std::string::npos);
}

TEST_CASE("roster renders numbered entries with parameters") {
  auto registry = tools::make_builtin_registry({});
  auto roster = registry.render_roster();
  CHECK(roster.find("1. calculator") != std::string::npos);
  CHECK(roster.find("expression") != std::string::npos);
  // benchmark-off default registry still has no oracle unless keyed
  CHECK(roster.find("answer_checker") != std::string::npos);
}

TEST_CASE("calculator tool formats integers without a trailing fraction") {
  auto registry = tools::make_builtin_registry({});
  auto result = registry.dispatch({"calculator", json{{"expression", "2+2"}}});
  CHECK_FALSE(result.is_error);
  CHECK(result.content == "4");
  auto fractional = registry.dispatch({"calculator", json{{"expression", "10/4"}}});
  CHECK(fractional.content == "2.5");
  auto bad = registry.dispatch({"calculator", json{{"expression", "1+"}}});
  CHECK(bad.is_error);
}

TEST_CASE("file_reader is confined to its sandbox root") {
  namespace fs = std::filesystem;
  auto root = fs::temp_directory_path() / "maneuver-sandbox-test";
  fs::remove_all(root);
  fs::create_directories(root / "inner");
  {
    std::ofstream out(root / "inner" / "note.txt", std::ios::trunc);
    out << "hello from the sandbox";
  }

  tools::BuiltinOptions options;
  options.sandbox_root = root.string();
  auto registry = tools::make_builtin_registry(options);

  auto ok = registry.dispatch({"file_reader", json{{"path", "inner/note.txt"}}});
  CHECK_FALSE(ok.is_error);
  CHECK(ok.content == "hello from the sandbox");

  auto escape = registry.dispatch({"file_reader", json{{"path", "../outside.txt"}}});
  CHECK(escape.is_error);
  CHECK(escape.content.find("escapes the workspace") != std::string::npos);

  auto absolute = registry.dispatch({"file_reader", json{{"path", "/etc/hostname"}}});
  CHECK(absolute.is_error);
}

TEST_CASE("benchmark mode drops the answer oracle") {
  tools::BuiltinOptions options;
  options.benchmark_mode = true;
  auto registry = tools::make_builtin_registry(options);
  CHECK_FALSE(registry.has("answer_checker"));

  tools::BuiltinOptions dev;
  dev.answer_key = {{"t1", "42"}};
  auto dev_registry = tools::make_builtin_registry(dev);
  REQUIRE(dev_registry.has("answer_checker"));
  auto hit = dev_registry.dispatch(
      {"answer_checker", json{{"task_id", "t1"}, {"candidate", " 42 "}}});
  CHECK_FALSE(hit.is_error);
  CHECK(hit.content.find("match") != std::string::npos);
}

TEST_CASE("registry copies preserve handlers") {
  // the loop copies the base registry per run and adds the guard; the copy
  // must keep working independently
  auto base = tools::make_builtin_registry({});
  tools::ToolRegistry copy = base;
  copy.register_guard("review", [](const json&) {
    return tools::ToolResult{"", "fine", false};
  });
  CHECK(copy.has_guard());
  CHECK_FALSE(base.has_guard());
  auto result = copy.dispatch({"calculator", json{{"expression", "3*3"}}});
  CHECK(result.content == "9");
}
