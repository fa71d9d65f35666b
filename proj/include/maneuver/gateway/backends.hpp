#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include "maneuver/gateway/chat.hpp"

namespace maneuver::gateway {

// Deterministic test backend. Replies are FIFO queues keyed by request_tag;
// a fallback handler covers anything unscripted. Total: never throws.
class ScriptedBackend final : public Backend {
 public:
  void push_reply(std::string tag, std::string reply);
  void set_handler(std::function<std::string(const ChatRequest&)> handler);

  ChatResponse complete(const ChatRequest& request) override;

  int calls() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::deque<std::string>> scripts_;
  std::function<std::string(const ChatRequest&)> handler_;
  int calls_ = 0;
};

// Serves completions from a directory of recorded responses keyed by
// record_replay_key. Throws CacheMiss instead of touching the network.
class ReplayBackend final : public Backend {
 public:
  explicit ReplayBackend(std::filesystem::path dir);

  ChatResponse complete(const ChatRequest& request) override;

 private:
  std::filesystem::path dir_;
};

// Pass-through wrapper that records every (request, response) pair so later
// runs can be replayed byte-for-byte. Writes are temp-file + rename.
class RecordingBackend final : public Backend {
 public:
  RecordingBackend(Backend& inner, std::filesystem::path dir);

  ChatResponse complete(const ChatRequest& request) override;

 private:
  Backend& inner_;
  std::filesystem::path dir_;
  std::mutex mutex_;
};

struct RemoteOptions {
  std::string base_url;  // e.g. http://127.0.0.1:8080/v1
  std::string api_key;
  int max_attempts = 5;
  int initial_backoff_ms = 1000;
  double backoff_factor = 2.0;
  double jitter = 0.2;  // +-20% around each backoff
  int timeout_seconds = 120;
  // Fixed jitter RNG seed; unset means seeded from the wall clock.
  std::optional<std::uint64_t> jitter_seed;
};

// OpenAI-style chat-completions client. Retries 429 and 5xx responses and
// transport failures with exponential backoff; 4xx other than 429 fail fast.
class RemoteBackend final : public Backend {
 public:
  explicit RemoteBackend(RemoteOptions options);

  ChatResponse complete(const ChatRequest& request) override;

 private:
  RemoteOptions options_;
  std::string host_;  // scheme://host:port
  std::string path_prefix_;
  std::uint64_t jitter_state_;
  std::mutex mutex_;
};

}  // namespace maneuver::gateway
