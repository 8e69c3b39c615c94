#include "choicekit/llm/provider.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <thread>
#include <vector>

#include <doctest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "choicekit/llm/cache.hpp"
#include "choicekit/llm/parsers.hpp"
#include "choicekit/llm/prompts.hpp"
#include "test_support.hpp"

using namespace choicekit;
using choicekit::test::error_code_of;
using choicekit::test::scratch_dir;
using choicekit::test::spit;

namespace {

llm::CompletionRequest basic_request(const std::string& text = "hello") {
  llm::CompletionRequest r;
  r.model_id = "test-model";
  r.user_text = text;
  return r;
}

}  // namespace

TEST_CASE("request validation") {
  llm::CompletionRequest r = basic_request();
  r.validate();

  r.model_id.clear();
  CHECK(error_code_of([&] { r.validate(); }) == Errc::invalid_hyperparameter);
  r = basic_request();
  r.user_text.clear();
  CHECK(error_code_of([&] { r.validate(); }) == Errc::invalid_hyperparameter);
  r = basic_request();
  r.temperature = -0.1;
  CHECK(error_code_of([&] { r.validate(); }) == Errc::invalid_hyperparameter);
  r = basic_request();
  r.max_output_chars = 0;
  CHECK(error_code_of([&] { r.validate(); }) == Errc::invalid_hyperparameter);
}

TEST_CASE("canonical covers every identity field") {
  llm::CompletionRequest a = basic_request();
  auto differs = [&](auto mutate) {
    llm::CompletionRequest b = a;
    mutate(b);
    return a.canonical() != b.canonical();
  };
  CHECK(differs([](auto& r) { r.model_id = "other"; }));
  CHECK(differs([](auto& r) { r.user_text = "other"; }));
  CHECK(differs([](auto& r) { r.system_text = "persona"; }));
  CHECK(differs([](auto& r) { r.temperature = 0.7; }));
  CHECK(differs([](auto& r) { r.seed = 42; }));
  CHECK(a.canonical() == basic_request().canonical());
  // no-system differs from empty-system
  llm::CompletionRequest s = a;
  s.system_text = "";
  CHECK(a.canonical() != s.canonical());
}

TEST_CASE("scripted provider replays in order and records requests") {
  llm::ScriptedProvider provider({std::string("one"), std::string("two")});
  CHECK(provider.complete(basic_request("first")) == "one");
  CHECK(provider.complete(basic_request("second")) == "two");
  CHECK(provider.calls() == 2);
  CHECK(provider.requests()[0].user_text == "first");
  CHECK(error_code_of([&] { provider.complete(basic_request()); }) == Errc::provider_failure);
}

TEST_CASE("complete retries transient failures with backoff") {
  llm::ScriptedProvider provider(
      {Errc::provider_transient, Errc::provider_transient, std::string("ok")});
  std::vector<long long> delays;
  llm::RetryPolicy policy;
  policy.initial_delay = std::chrono::milliseconds(10);
  policy.backoff_multiplier = 3.0;
  policy.sleeper = [&](std::chrono::milliseconds d) { delays.push_back(d.count()); };

  CHECK(llm::complete(basic_request(), provider, policy) == "ok");
  CHECK(provider.calls() == 3);
  CHECK(delays == std::vector<long long>{10, 30});
}

TEST_CASE("complete gives up after max_attempts") {
  llm::ScriptedProvider provider({Errc::provider_transient, Errc::provider_transient,
                                  Errc::provider_transient, std::string("never reached")});
  llm::RetryPolicy policy;
  policy.max_attempts = 3;
  policy.sleeper = [](std::chrono::milliseconds) {};
  try {
    llm::complete(basic_request(), provider, policy);
    FAIL("expected provider_failure");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::provider_failure);
    CHECK(std::string(e.what()).find("3 attempts") != std::string::npos);
  }
  CHECK(provider.calls() == 3);
}

TEST_CASE("non-transient errors pass through without retries") {
  llm::ScriptedProvider provider({Errc::auth_missing, std::string("never")});
  llm::RetryPolicy policy;
  policy.sleeper = [](std::chrono::milliseconds) {};
  CHECK(error_code_of([&] { llm::complete(basic_request(), provider, policy); }) ==
        Errc::auth_missing);
  CHECK(provider.calls() == 1);
}

TEST_CASE("complete truncates to max_output_chars") {
  llm::ScriptedProvider provider({std::string("abcdefgh")});
  llm::CompletionRequest r = basic_request();
  r.max_output_chars = 3;
  CHECK(llm::complete(r, provider) == "abc");
}

TEST_CASE("mock provider is a pure function of seed and request") {
  llm::DeterministicMockProvider mock(1);
  llm::DeterministicMockProvider same(1);
  llm::DeterministicMockProvider other(2);
  llm::CompletionRequest r = basic_request("anything at all");
  CHECK(mock.complete(r) == same.complete(r));
  CHECK(mock.complete(r) == mock.complete(r));
  CHECK(mock.complete(r) != other.complete(r));
  CHECK(mock.complete(basic_request("unrecognized prompt")) == "OK");
}

TEST_CASE("mock subject responses parse under every condition") {
  llm::DeterministicMockProvider mock(7);
  std::vector<ChoiceTask> batch;
  std::vector<std::string> ids;
  for (int i = 0; i < 5; ++i) {
    ChoiceTask t;
    t.task_id = "q" + std::to_string(i);
    t.option_a_text = "a" + std::to_string(i);
    t.option_b_text = "b" + std::to_string(i);
    batch.push_back(t);
    ids.push_back(t.task_id);
  }
  for (auto c : {llm::Condition::binary, llm::Condition::confidence, llm::Condition::percentage}) {
    llm::CompletionRequest r = basic_request(llm::render_subject_prompt(c, std::nullopt, batch));
    auto parsed = llm::parse_subject_response(c, mock.complete(r), ids);
    REQUIRE(parsed.size() == ids.size());
    for (const auto& p : parsed) {
      CHECK(p.p_choose_a >= 0.0);
      CHECK(p.p_choose_a <= 1.0);
    }
  }
}

TEST_CASE("mock feature and fine-tune responses fit their grammars") {
  llm::DeterministicMockProvider mock(3);
  ChoiceTask t;
  t.task_id = "1";
  t.option_a_text = "1 for sure";
  t.option_b_text = "5 with probability 0.23, 2 otherwise";

  int saw[3] = {0, 0, 0};
  for (int i = 0; i < 40; ++i) {
    llm::CompletionRequest r = basic_request(llm::render_feature_prompt("risk", t));
    r.seed = static_cast<std::uint64_t>(i);
    int score = llm::parse_feature_response(mock.complete(r));
    ++saw[score + 1];
  }
  CHECK(saw[0] > 0);  // B
  CHECK(saw[2] > 0);  // A

  llm::CompletionRequest f = basic_request(llm::render_finetune_prompt(t));
  std::string out = mock.complete(f);
  int v = std::stoi(out);
  CHECK(v >= 0);
  CHECK(v <= 100);
}

TEST_CASE("cache round-trips responses and survives corruption") {
  auto dir = scratch_dir("cache");
  llm::CompletionCache cache(dir);
  llm::CompletionRequest r = basic_request("cache me");

  CHECK(!cache.get(r).has_value());
  cache.put(r, "stored");
  auto hit = cache.get(r);
  REQUIRE(hit.has_value());
  CHECK(*hit == "stored");

  for (const auto& entry : std::filesystem::directory_iterator(dir))
    spit(entry.path(), "{not json");
  CHECK(!cache.get(r).has_value());
  cache.put(r, "repaired");
  CHECK(cache.get(r) == std::optional<std::string>("repaired"));
}

TEST_CASE("cached_complete consults the provider once per request") {
  auto dir = scratch_dir("cache-complete");
  llm::CompletionCache cache(dir);
  llm::ScriptedProvider provider({std::string("fresh")});
  llm::CompletionRequest r = basic_request("expensive");

  CHECK(llm::cached_complete(r, provider, cache) == "fresh");
  CHECK(llm::cached_complete(r, provider, cache) == "fresh");  // script is exhausted; hit
  CHECK(provider.calls() == 1);

  llm::ScriptedProvider uncached({std::string("a"), std::string("b")});
  CHECK(llm::maybe_cached_complete(r, uncached, nullptr) == "a");
  CHECK(llm::maybe_cached_complete(r, uncached, nullptr) == "b");
}

TEST_CASE("cache transparency: cached equals uncached for a deterministic provider") {
  auto dir = scratch_dir("cache-transparent");
  llm::CompletionCache cache(dir);
  llm::DeterministicMockProvider mock(5);
  for (int i = 0; i < 10; ++i) {
    llm::CompletionRequest r = basic_request("prompt " + std::to_string(i % 4));
    r.seed = static_cast<std::uint64_t>(i % 3);
    CHECK(llm::maybe_cached_complete(r, mock, &cache) ==
          llm::maybe_cached_complete(r, mock, nullptr));
  }
}

TEST_CASE("http provider requires a scheme and a credential") {
  CHECK(error_code_of([] {
          llm::HttpProvider provider({/*endpoint_url=*/"localhost/v1", "KEY_VAR", 5});
        }) == Errc::config_invalid);

  ::unsetenv("CHOICEKIT_TEST_NO_KEY");
  llm::HttpProvider provider({"http://127.0.0.1:1/v1/chat/completions",
                              "CHOICEKIT_TEST_NO_KEY", 5});
  CHECK(error_code_of([&] { provider.complete(basic_request()); }) == Errc::auth_missing);
}

TEST_CASE("http provider speaks the chat-completion shape over loopback") {
  httplib::Server server;
  nlohmann::json seen_body;
  std::string seen_auth;
  int status = 200;

  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    seen_body = nlohmann::json::parse(req.body);
    if (status != 200) {
      res.status = status;
      res.set_content("busy", "text/plain");
      return;
    }
    nlohmann::json reply = {
        {"choices", {{{"message", {{"role", "assistant"}, {"content", "pong"}}}}}}};
    res.set_content(reply.dump(), "application/json");
  });

  int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread server_thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  ::setenv("CHOICEKIT_TEST_KEY", "sesame", 1);
  llm::HttpProvider provider({"http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions",
                              "CHOICEKIT_TEST_KEY", 5});

  llm::CompletionRequest r = basic_request("ping");
  r.system_text = "be brief";
  r.temperature = 0.5;
  r.seed = 9;
  CHECK(provider.complete(r) == "pong");
  CHECK(seen_auth == "Bearer sesame");
  CHECK(seen_body["model"] == "test-model");
  CHECK(seen_body["temperature"] == 0.5);
  CHECK(seen_body["seed"] == 9);
  REQUIRE(seen_body["messages"].size() == 2);
  CHECK(seen_body["messages"][0]["role"] == "system");
  CHECK(seen_body["messages"][0]["content"] == "be brief");
  CHECK(seen_body["messages"][1]["role"] == "user");
  CHECK(seen_body["messages"][1]["content"] == "ping");

  status = 503;
  CHECK(error_code_of([&] { provider.complete(r); }) == Errc::provider_transient);
  status = 404;
  CHECK(error_code_of([&] { provider.complete(r); }) == Errc::provider_failure);

  server.stop();
  server_thread.join();
}
