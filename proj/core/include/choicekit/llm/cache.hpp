#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>

#include "choicekit/llm/provider.hpp"

namespace choicekit::llm {

// Disk cache for completions, one JSON entry per request. The key hashes the
// canonical request (model, system text, user text, temperature, seed); the
// entry stores the canonical string too and a hit is only served when it
// matches, so a key collision degrades to a miss instead of a wrong answer.
// Unreadable or mismatched entries are reported to stderr once and treated
// as misses. Writes go through a temp file plus rename; concurrent readers
// are safe.
class CompletionCache {
 public:
  explicit CompletionCache(std::filesystem::path dir);

  static std::string key_of(const CompletionRequest& request);

  std::optional<std::string> get(const CompletionRequest& request);
  void put(const CompletionRequest& request, const std::string& response);

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::mutex write_mu_;
};

// get, falling back to complete() and storing the result.
std::string cached_complete(const CompletionRequest& request, Provider& provider,
                            CompletionCache& cache, const RetryPolicy& policy = {});

// Uses the cache when one is given.
std::string maybe_cached_complete(const CompletionRequest& request, Provider& provider,
                                  CompletionCache* cache, const RetryPolicy& policy = {});

}  // namespace choicekit::llm
