#include "choicekit/llm/provider.hpp"

#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "choicekit/csv.hpp"
#include "choicekit/rng.hpp"

namespace choicekit::llm {

using nlohmann::json;

void CompletionRequest::validate() const {
  if (model_id.empty()) throw Error(Errc::invalid_hyperparameter, "model_id must be non-empty");
  if (user_text.empty()) throw Error(Errc::invalid_hyperparameter, "user_text must be non-empty");
  if (!(temperature >= 0.0))
    throw Error(Errc::invalid_hyperparameter, "temperature must be >= 0");
  if (max_output_chars < 1)
    throw Error(Errc::invalid_hyperparameter, "max_output_chars must be positive");
}

std::string CompletionRequest::canonical() const {
  std::string s;
  s += model_id;
  s.push_back('\x1f');
  s += system_text ? "S" + *system_text : std::string("N");
  s.push_back('\x1f');
  s += user_text;
  s.push_back('\x1f');
  s += csv::format_double(temperature);
  s.push_back('\x1f');
  s += seed ? std::to_string(*seed) : std::string("N");
  return s;
}

std::string complete(const CompletionRequest& request, Provider& provider,
                     const RetryPolicy& policy) {
  request.validate();
  auto sleep_for = policy.sleeper
                       ? policy.sleeper
                       : [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  std::chrono::milliseconds delay = policy.initial_delay;
  std::string last_error;
  for (int attempt = 1; attempt <= policy.max_attempts; ++attempt) {
    try {
      std::string out = provider.complete(request);
      if (static_cast<int>(out.size()) > request.max_output_chars)
        out.resize(static_cast<std::size_t>(request.max_output_chars));
      return out;
    } catch (const Error& e) {
      if (e.code() != Errc::provider_transient) throw;
      last_error = e.what();
      if (attempt < policy.max_attempts) {
        sleep_for(delay);
        delay = std::chrono::milliseconds(
            static_cast<long long>(static_cast<double>(delay.count()) * policy.backoff_multiplier));
      }
    }
  }
  throw Error(Errc::provider_failure,
              "gave up after " + std::to_string(policy.max_attempts) + " attempts; last: " +
                  last_error);
}

HttpProvider::HttpProvider(HttpProviderConfig config) : config_(std::move(config)) {
  if (config_.endpoint_url.find("://") == std::string::npos)
    throw Error(Errc::config_invalid, "endpoint_url must include a scheme");
}

std::string HttpProvider::name() const { return "http:" + config_.endpoint_url; }

std::string HttpProvider::complete(const CompletionRequest& request) {
  const char* cred = std::getenv(config_.credential_env.c_str());
  if (cred == nullptr || *cred == '\0')
    throw Error(Errc::auth_missing,
                "credential environment variable " + config_.credential_env + " is unset");

  std::size_t scheme_end = config_.endpoint_url.find("://") + 3;
  std::size_t path_start = config_.endpoint_url.find('/', scheme_end);
  std::string base = (path_start == std::string::npos) ? config_.endpoint_url
                                                       : config_.endpoint_url.substr(0, path_start);
  std::string path = (path_start == std::string::npos) ? "/"
                                                       : config_.endpoint_url.substr(path_start);

  json body;
  body["model"] = request.model_id;
  json messages = json::array();
  if (request.system_text)
    messages.push_back({{"role", "system"}, {"content", *request.system_text}});
  messages.push_back({{"role", "user"}, {"content", request.user_text}});
  body["messages"] = std::move(messages);
  body["temperature"] = request.temperature;
  if (request.seed) body["seed"] = *request.seed;

  httplib::Client client(base);
  client.set_connection_timeout(config_.timeout_seconds);
  client.set_read_timeout(config_.timeout_seconds);
  httplib::Headers headers{{"Authorization", std::string("Bearer ") + cred}};

  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res)
    throw Error(Errc::provider_transient,
                "transport error talking to " + base + ": " + httplib::to_string(res.error()));
  if (res->status == 429 || res->status >= 500)
    throw Error(Errc::provider_transient,
                "status " + std::to_string(res->status) + " from " + base);
  if (res->status != 200)
    throw Error(Errc::provider_failure,
                "status " + std::to_string(res->status) + " from " + base + ": " + res->body);

  try {
    json parsed = json::parse(res->body);
    return parsed.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(Errc::provider_failure, std::string("malformed completion payload: ") + e.what());
  }
}

ScriptedProvider::ScriptedProvider(std::vector<Entry> script) : script_(std::move(script)) {}

std::string ScriptedProvider::complete(const CompletionRequest& request) {
  std::scoped_lock lock(mu_);
  requests_.push_back(request);
  if (next_ >= script_.size())
    throw Error(Errc::provider_failure, "script exhausted after " + std::to_string(next_) + " calls");
  Entry entry = script_[next_++];
  if (auto* reply = std::get_if<std::string>(&entry)) return *reply;
  throw Error(std::get<Errc>(entry), "scripted failure");
}

DeterministicMockProvider::DeterministicMockProvider(std::uint64_t seed) : seed_(seed) {}

namespace {

// Ids as listed by the subject prompt renderer: lines "Problem <id>:".
std::vector<std::string> scan_problem_ids(const std::string& text) {
  std::vector<std::string> ids;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string_view line(text.data() + pos, eol - pos);
    if (line.size() > 9 && line.substr(0, 8) == "Problem " && line.back() == ':')
      ids.emplace_back(line.substr(8, line.size() - 9));
    pos = eol + 1;
  }
  return ids;
}

}  // namespace

std::string DeterministicMockProvider::complete(const CompletionRequest& request) {
  request.validate();
  const std::string& text = request.user_text;
  std::uint64_t h = splitmix64(seed_ ^ fnv1a64(request.canonical()));

  enum { binary, confidence, percentage } condition = binary;
  bool subjects = false;
  if (text.find("(Problem ID, Choice, Confidence)") != std::string::npos) {
    condition = confidence;
    subjects = true;
  } else if (text.find("(Problem ID, Preference)") != std::string::npos) {
    condition = percentage;
    subjects = true;
  } else if (text.find("(Problem ID, Choice)") != std::string::npos) {
    condition = binary;
    subjects = true;
  }

  if (subjects) {
    std::vector<std::string> ids = scan_problem_ids(text);
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      std::uint64_t r = splitmix64(h ^ fnv1a64(ids[i]) ^ (i * 0x9E3779B97F4A7C15ull));
      if (i) out += " | ";
      switch (condition) {
        case binary:
          out += "(" + ids[i] + ", " + (((r >> 8) & 1) ? "A" : "B") + ")";
          break;
        case confidence:
          out += "(" + ids[i] + ", " + (((r >> 8) & 1) ? "A" : "B") + ", " +
                 std::to_string(50 + (r >> 16) % 51) + ")";
          break;
        case percentage:
          out += "(" + ids[i] + ", " + std::to_string((r >> 16) % 101) + ")";
          break;
      }
    }
    return out;
  }

  if (text.find("final answer without explanations") != std::string::npos) {
    switch ((h >> 13) % 10) {
      case 0: case 1: case 2: case 3: return "Option A";
      case 4: case 5: case 6: case 7: return "Option B";
      default: return "It is too hard to tell.";
    }
  }

  if (text.rfind("Estimate the percentage of the population choosing Option A over Option B:", 0) == 0)
    return std::to_string((h >> 17) % 101);

  return "OK";
}

}  // namespace choicekit::llm
