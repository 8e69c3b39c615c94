#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "choicekit/errors.hpp"

namespace choicekit::llm {

struct CompletionRequest {
  std::string model_id;
  std::optional<std::string> system_text;
  std::string user_text;
  double temperature = 0.0;
  std::optional<std::uint64_t> seed;
  int max_output_chars = 16384;

  void validate() const;  // Errc::invalid_hyperparameter

  // Canonical serialization of every identity-relevant field; the cache key
  // and the deterministic mock both hash this.
  std::string canonical() const;
};

class Provider {
 public:
  virtual ~Provider() = default;
  // Implementations throw Errc::provider_transient for failures worth
  // retrying (connect errors, 429, 5xx) and Errc::provider_failure or
  // Errc::auth_missing otherwise.
  virtual std::string complete(const CompletionRequest& request) = 0;
  virtual std::string name() const = 0;
};

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds initial_delay{250};
  double backoff_multiplier = 2.0;
  // Injection point for tests; defaults to a real sleep.
  std::function<void(std::chrono::milliseconds)> sleeper;
};

// Validates, calls the provider, and retries transient failures with
// exponential backoff up to max_attempts. The response is truncated to
// request.max_output_chars.
std::string complete(const CompletionRequest& request, Provider& provider,
                     const RetryPolicy& policy = {});

struct HttpProviderConfig {
  // Full chat-completion endpoint, e.g. "https://host/v1/chat/completions".
  std::string endpoint_url;
  // Environment variable holding the bearer credential. Errc::auth_missing
  // when unset or empty.
  std::string credential_env = "CHOICEKIT_API_KEY";
  int timeout_seconds = 120;
};

// Speaks the common chat-completion JSON shape: messages with roles, plus
// temperature and optional seed; reads choices[0].message.content back.
class HttpProvider : public Provider {
 public:
  explicit HttpProvider(HttpProviderConfig config);
  std::string complete(const CompletionRequest& request) override;
  std::string name() const override;

 private:
  HttpProviderConfig config_;
};

// Replays a fixed script in order; records every request it sees. A script
// entry is either a reply or an error code to throw. Intended for tests.
class ScriptedProvider : public Provider {
 public:
  using Entry = std::variant<std::string, Errc>;

  explicit ScriptedProvider(std::vector<Entry> script);
  std::string complete(const CompletionRequest& request) override;
  std::string name() const override { return "scripted"; }

  const std::vector<CompletionRequest>& requests() const { return requests_; }
  int calls() const { return static_cast<int>(requests_.size()); }

 private:
  std::vector<Entry> script_;
  std::size_t next_ = 0;
  std::vector<CompletionRequest> requests_;
  std::mutex mu_;
};

// Offline stand-in that answers any prompt this toolkit renders with a
// well-formed response derived purely from (seed, request), so runs are
// byte-reproducible and never touch the network. Different request seeds
// give different answers, which is how simulated agents vary.
class DeterministicMockProvider : public Provider {
 public:
  explicit DeterministicMockProvider(std::uint64_t seed = 0);
  std::string complete(const CompletionRequest& request) override;
  std::string name() const override { return "mock"; }

 private:
  std::uint64_t seed_;
};

}  // namespace choicekit::llm
