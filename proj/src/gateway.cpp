#include <fstream>
#include <nlohmann/json.hpp>

#include "maneuver/gateway/backends.hpp"
#include "maneuver/util/digest.hpp"
#include "maneuver/util/strings.hpp"

namespace maneuver::gateway {

using nlohmann::json;

std::string_view role_name(Role role) {
  switch (role) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
    case Role::tool: return "tool";
  }
  return "user";
}

Role role_from_name(std::string_view name) {
  if (name == "system") return Role::system;
  if (name == "user") return Role::user;
  if (name == "assistant") return Role::assistant;
  if (name == "tool") return Role::tool;
  throw InvalidRequest(util::cat("unknown chat role: ", name));
}

void validate(const ChatRequest& request) {
  if (request.model_id.empty()) throw InvalidRequest("model_id is empty");
  if (request.messages.empty()) throw InvalidRequest("request has no messages");
  if (request.temperature < 0.0 || request.temperature > 2.0) {
    throw InvalidRequest(util::cat("temperature out of range: ", request.temperature));
  }
  if (request.max_output_tokens <= 0) {
    throw InvalidRequest("max_output_tokens must be positive");
  }
}

std::string record_replay_key(const ChatRequest& request) {
  json canon;
  canon["model"] = request.model_id;
  canon["temperature"] = request.temperature;
  auto& msgs = canon["messages"] = json::array();
  for (const auto& m : request.messages) {
    msgs.push_back({{"role", role_name(m.role)}, {"content", m.content}});
  }
  return util::sha256_hex(canon.dump());
}

namespace {

int estimate_tokens(std::size_t chars) {
  return static_cast<int>((chars + 3) / 4);
}

ChatResponse make_response(const ChatRequest& request, std::string content) {
  std::size_t prompt_chars = 0;
  for (const auto& m : request.messages) prompt_chars += m.content.size();
  ChatResponse response;
  response.prompt_tokens = estimate_tokens(prompt_chars);
  response.completion_tokens = estimate_tokens(content.size());
  response.content = std::move(content);
  return response;
}

std::filesystem::path cache_path(const std::filesystem::path& dir, std::string_view key) {
  return dir / (std::string(key) + ".json");
}

}  // namespace

void ScriptedBackend::push_reply(std::string tag, std::string reply) {
  std::lock_guard lock(mutex_);
  scripts_[std::move(tag)].push_back(std::move(reply));
}

void ScriptedBackend::set_handler(std::function<std::string(const ChatRequest&)> handler) {
  std::lock_guard lock(mutex_);
  handler_ = std::move(handler);
}

ChatResponse ScriptedBackend::complete(const ChatRequest& request) {
  validate(request);
  std::lock_guard lock(mutex_);
  ++calls_;
  auto it = scripts_.find(request.request_tag);
  if (it != scripts_.end() && !it->second.empty()) {
    auto reply = std::move(it->second.front());
    it->second.pop_front();
    return make_response(request, std::move(reply));
  }
  if (handler_) return make_response(request, handler_(request));
  // Deliberately tagless so an unscripted request surfaces as a format
  // retry in the loop instead of silently passing.
  return make_response(request, "UNSCRIPTED");
}

int ScriptedBackend::calls() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

ReplayBackend::ReplayBackend(std::filesystem::path dir) : dir_(std::move(dir)) {}

ChatResponse ReplayBackend::complete(const ChatRequest& request) {
  validate(request);
  auto key = record_replay_key(request);
  auto path = cache_path(dir_, key);
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw CacheMiss(util::cat("no recorded response for key ", key, " (tag: ",
                              request.request_tag, ")"));
  }
  json doc = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.contains("response")) {
    throw CacheMiss(util::cat("unreadable cache entry: ", path.string()));
  }
  const auto& r = doc["response"];
  ChatResponse response;
  response.content = r.value("content", "");
  response.finish_reason = r.value("finish_reason", "stop");
  response.prompt_tokens = r.value("prompt_tokens", 0);
  response.completion_tokens = r.value("completion_tokens", 0);
  return response;
}

RecordingBackend::RecordingBackend(Backend& inner, std::filesystem::path dir)
    : inner_(inner), dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

ChatResponse RecordingBackend::complete(const ChatRequest& request) {
  auto response = inner_.complete(request);
  auto key = record_replay_key(request);
  json doc;
  doc["key"] = key;
  doc["model_id"] = request.model_id;
  doc["request_tag"] = request.request_tag;
  doc["response"] = {{"content", response.content},
                     {"finish_reason", response.finish_reason},
                     {"prompt_tokens", response.prompt_tokens},
                     {"completion_tokens", response.completion_tokens}};
  std::lock_guard lock(mutex_);
  auto final_path = cache_path(dir_, key);
  auto tmp_path = final_path;
  tmp_path += ".tmp";
  {
    std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
    out << doc.dump(2) << '\n';
  }
  std::filesystem::rename(tmp_path, final_path);
  return response;
}

}  // namespace maneuver::gateway
