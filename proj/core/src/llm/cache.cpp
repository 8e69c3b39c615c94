#include "choicekit/llm/cache.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "choicekit/rng.hpp"

namespace choicekit::llm {

using nlohmann::json;

CompletionCache::CompletionCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw Error(Errc::file_unwritable, "cannot create cache dir " + dir_.string());
}

std::string CompletionCache::key_of(const CompletionRequest& request) {
  std::string canonical = request.canonical();
  std::uint64_t h1 = fnv1a64(canonical);
  std::uint64_t h2 = fnv1a64(canonical + '\x1e' + std::to_string(canonical.size()));
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(h1),
                static_cast<unsigned long long>(h2));
  return buf;
}

std::optional<std::string> CompletionCache::get(const CompletionRequest& request) {
  std::string canonical = request.canonical();
  std::filesystem::path path = dir_ / (key_of(request) + ".json");
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    json entry = json::parse(buffer.str());
    if (entry.at("request").get<std::string>() != canonical) return std::nullopt;
    return entry.at("response").get<std::string>();
  } catch (const json::exception& e) {
    std::fprintf(stderr, "warning: %s: corrupt cache entry %s (%s); refetching\n",
                 errc_name(Errc::cache_corrupt), path.string().c_str(), e.what());
    return std::nullopt;
  }
}

void CompletionCache::put(const CompletionRequest& request, const std::string& response) {
  std::scoped_lock lock(write_mu_);
  std::string key = key_of(request);
  json entry;
  entry["version"] = 1;
  entry["key"] = key;
  entry["request"] = request.canonical();
  entry["timestamp"] = std::chrono::duration_cast<std::chrono::seconds>(
                           std::chrono::system_clock::now().time_since_epoch())
                           .count();
  entry["response"] = response;

  std::filesystem::path final_path = dir_ / (key + ".json");
  std::filesystem::path tmp_path = dir_ / (key + ".tmp");
  {
    std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::file_unwritable, "cannot write cache entry " + tmp_path.string());
    out << entry.dump(2) << '\n';
  }
  std::error_code ec;
  std::filesystem::rename(tmp_path, final_path, ec);
  if (ec) throw Error(Errc::file_unwritable, "cannot finalize cache entry " + final_path.string());
}

std::string cached_complete(const CompletionRequest& request, Provider& provider,
                            CompletionCache& cache, const RetryPolicy& policy) {
  request.validate();
  if (auto hit = cache.get(request)) return *hit;
  std::string response = complete(request, provider, policy);
  cache.put(request, response);
  return response;
}

std::string maybe_cached_complete(const CompletionRequest& request, Provider& provider,
                                  CompletionCache* cache, const RetryPolicy& policy) {
  if (cache) return cached_complete(request, provider, *cache, policy);
  return complete(request, provider, policy);
}

}  // namespace choicekit::llm
