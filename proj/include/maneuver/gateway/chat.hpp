#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "maneuver/error.hpp"

namespace maneuver::gateway {

class InvalidRequest : public Error {
 public:
  using Error::Error;
};

// Anything that stops a backend from producing a reply. run_task converts
// these into a backend_error termination instead of crashing the run.
class BackendError : public Error {
 public:
  using Error::Error;
};

class RateLimited : public BackendError {
 public:
  using BackendError::BackendError;
};

class TransportError : public BackendError {
 public:
  using BackendError::BackendError;
};

class AuthMissing : public BackendError {
 public:
  using BackendError::BackendError;
};

class ContextOverflow : public BackendError {
 public:
  using BackendError::BackendError;
};

// Replay-mode request that was never recorded.
class CacheMiss : public BackendError {
 public:
  using BackendError::BackendError;
};

enum class Role { system, user, assistant, tool };

std::string_view role_name(Role role);
Role role_from_name(std::string_view name);

struct ChatMessage {
  Role role = Role::user;
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

struct ChatRequest {
  std::string model_id;
  std::vector<ChatMessage> messages;
  double temperature = 0.1;
  int max_output_tokens = 4096;
  // Free-form label used for scripting, logging and deterministic backends.
  // Not part of the record/replay cache key.
  std::string request_tag;
};

// Throws InvalidRequest on empty model, no messages, or temperature
// outside [0, 2].
void validate(const ChatRequest& request);

struct ChatResponse {
  std::string content;
  std::string finish_reason = "stop";
  int prompt_tokens = 0;
  int completion_tokens = 0;
  // How many wire attempts the backend spent, retries included.
  int attempts = 1;
};

// Content-addressed cache key: sha256 over a canonical JSON encoding of
// (model_id, temperature, messages). request_tag and token limits are
// deliberately excluded so retagged replays still hit.
std::string record_replay_key(const ChatRequest& request);

class Backend {
 public:
  virtual ~Backend() = default;
  virtual ChatResponse complete(const ChatRequest& request) = 0;
};

}  // namespace maneuver::gateway
