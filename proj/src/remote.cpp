#include <chrono>
#include <cmath>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "maneuver/gateway/backends.hpp"
#include "maneuver/util/strings.hpp"

namespace maneuver::gateway {

using nlohmann::json;

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

bool looks_like_overflow(const std::string& body) {
  return util::contains_ci(body, "context length") ||
         util::contains_ci(body, "context_length") ||
         util::contains_ci(body, "maximum context");
}

}  // namespace

RemoteBackend::RemoteBackend(RemoteOptions options) : options_(std::move(options)) {
  if (options_.base_url.empty()) throw ConfigError("remote backend: base_url is empty");
  auto scheme_end = options_.base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError(util::cat("remote backend: base_url needs a scheme: ",
                                options_.base_url));
  }
  auto path_start = options_.base_url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    host_ = options_.base_url;
  } else {
    host_ = options_.base_url.substr(0, path_start);
    path_prefix_ = options_.base_url.substr(path_start);
  }
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
  jitter_state_ = options_.jitter_seed.value_or(static_cast<std::uint64_t>(
      std::chrono::steady_clock::now().time_since_epoch().count()));
}

ChatResponse RemoteBackend::complete(const ChatRequest& request) {
  validate(request);

  json body;
  body["model"] = request.model_id;
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_output_tokens;
  auto& msgs = body["messages"] = json::array();
  for (const auto& m : request.messages) {
    msgs.push_back({{"role", role_name(m.role)}, {"content", m.content}});
  }
  const auto payload = body.dump();

  httplib::Headers headers;
  if (!options_.api_key.empty()) {
    headers.emplace("Authorization", util::cat("Bearer ", options_.api_key));
  }

  httplib::Client client(host_);
  client.set_connection_timeout(options_.timeout_seconds, 0);
  client.set_read_timeout(options_.timeout_seconds, 0);
  client.set_write_timeout(options_.timeout_seconds, 0);

  std::string last_failure = "no attempt made";
  double backoff_ms = options_.initial_backoff_ms;
  for (int attempt = 1; attempt <= options_.max_attempts; ++attempt) {
    if (attempt > 1) {
      double factor;
      {
        std::lock_guard lock(mutex_);
        auto u = double(splitmix64(jitter_state_) >> 11) * 0x1p-53;  // [0, 1)
        factor = 1.0 + options_.jitter * (2.0 * u - 1.0);
      }
      auto sleep_ms = std::max(0.0, backoff_ms * factor);
      std::this_thread::sleep_for(
          std::chrono::milliseconds(static_cast<std::int64_t>(sleep_ms)));
      backoff_ms *= options_.backoff_factor;
    }

    auto res = client.Post(path_prefix_ + "/chat/completions", headers, payload,
                           "application/json");
    if (!res) {
      last_failure = util::cat("transport failure: ", httplib::to_string(res.error()));
      continue;
    }
    if (res->status == 200) {
      json doc = json::parse(res->body, nullptr, /*allow_exceptions=*/false);
      if (doc.is_discarded() || !doc.contains("choices") || doc["choices"].empty()) {
        throw BackendError(util::cat("malformed completion payload from ", host_));
      }
      const auto& choice = doc["choices"][0];
      ChatResponse response;
      response.content = choice.contains("message")
                             ? choice["message"].value("content", "")
                             : choice.value("text", "");
      response.finish_reason = choice.value("finish_reason", "stop");
      if (doc.contains("usage")) {
        response.prompt_tokens = doc["usage"].value("prompt_tokens", 0);
        response.completion_tokens = doc["usage"].value("completion_tokens", 0);
      }
      response.attempts = attempt;
      return response;
    }
    if (res->status == 429 || res->status >= 500) {
      last_failure = util::cat("HTTP ", res->status, " from ", host_);
      continue;
    }
    if (res->status == 401 || res->status == 403) {
      throw AuthMissing(util::cat("HTTP ", res->status, ": check the API key for ", host_));
    }
    if (res->status == 400 && looks_like_overflow(res->body)) {
      throw ContextOverflow(util::cat("request exceeds the model context window (",
                                      res->body.substr(0, 200), ")"));
    }
    throw BackendError(util::cat("HTTP ", res->status, " from ", host_, ": ",
                                 res->body.substr(0, 200)));
  }
  if (last_failure.rfind("HTTP 429", 0) == 0) {
    throw RateLimited(util::cat("gave up after ", options_.max_attempts,
                                " attempts: ", last_failure));
  }
  throw TransportError(util::cat("gave up after ", options_.max_attempts,
                                 " attempts: ", last_failure));
}

}  // namespace maneuver::gateway
