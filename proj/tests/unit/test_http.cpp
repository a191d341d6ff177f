#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <mutex>

#include "opinion_loom/commands.hpp"
#include "opinion_loom/dialog.hpp"
#include "opinion_loom/io.hpp"
#include "opinion_loom/llm_client.hpp"
#include "opinion_loom/sidecar.hpp"
#include "support/checks.hpp"
#include "support/temp_dir.hpp"

#include <json.hpp>

#include "support/mock_server.hpp"

using namespace opinion_loom;
using namespace opinion_loom::sentiment;
using namespace opinion_loom::dialog;
using testing_support::MockServer;
using json = nlohmann::json;
using EK = ErrorKind;

namespace {

// Deterministic stand-in for the classifier: the lexicon, reported as probabilities.
json classify(const std::string& text) {
  const auto s = LexiconScorer().score(text);
  return {{"p_negative", s.p_negative}, {"p_neutral", s.p_neutral}, {"p_positive", s.p_positive}};
}

struct SidecarStats {
  std::mutex mutex;
  std::vector<std::size_t> batch_sizes;
  std::vector<std::string> bodies;
  std::atomic<int> in_flight{0};
  std::atomic<int> peak{0};
};

void protocol_routes(httplib::Server& server, SidecarStats& stats, int delay_ms = 0) {
  server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"status": "ok", "model": "mock-classifier"})", "application/json");
  });
  server.Post("/score", [&stats, delay_ms](const httplib::Request& req, httplib::Response& res) {
    const int now = ++stats.in_flight;
    for (int seen = stats.peak.load(); now > seen && !stats.peak.compare_exchange_weak(seen, now);) {
    }
    if (delay_ms) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::exception&) {
      res.status = 400;
      res.set_content(R"({"error": "malformed JSON"})", "application/json");
      --stats.in_flight;
      return;
    }
    const auto& texts = body.at("texts");
    {
      std::lock_guard<std::mutex> lock(stats.mutex);
      stats.batch_sizes.push_back(texts.size());
      stats.bodies.push_back(req.body);
    }
    if (texts.size() > 64) {
      res.status = 413;
      res.set_content(R"({"error": "batch too large"})", "application/json");
    } else {
      json scores = json::array();
      for (const auto& t : texts) scores.push_back(classify(t.get<std::string>()));
      res.set_content(json{{"scores", scores}}.dump(), "application/json");
    }
    --stats.in_flight;
  });
}

MockServer fixed_response(int status, std::string body) {
  return MockServer([status, body](httplib::Server& server) {
    auto handler = [status, body](const httplib::Request&, httplib::Response& res) {
      res.status = status;
      res.set_content(body, "application/json");
    };
    server.Post("/score", handler);
    server.Get("/health", handler);
  });
}

}  // namespace

TEST_CASE("sidecar health") {
  SidecarStats stats;
  MockServer server([&](httplib::Server& s) { protocol_routes(s, stats); });
  const auto health = SidecarScorer(server.url()).health();
  CHECK(health.status == "ok");
  CHECK(health.model == "mock-classifier");
}

TEST_CASE("sidecar request body and order") {
  SidecarStats stats;
  MockServer server([&](httplib::Server& s) { protocol_routes(s, stats); });
  const SidecarScorer scorer(server.url());
  const std::vector<std::string> texts{"kind kind", "rude", "plain \"quoted\"", "\xC3\xA9t\xC3\xA9 kind"};
  const auto scores = scorer.score_batch(texts);
  REQUIRE(scores.size() == texts.size());
  for (std::size_t k = 0; k < texts.size(); ++k) CHECK(scores[k] == LexiconScorer().score(texts[k]));
  REQUIRE(stats.bodies.size() == 1);
  CHECK(json::parse(stats.bodies[0]) == json{{"texts", texts}});
  CHECK(SidecarScorer::encode_request({"a"}) == R"({"texts":["a"]})");
  CHECK(scorer.score("kind").p_positive == 1.0);
  CHECK(scorer.score_batch({}).empty());
}

TEST_CASE("sidecar batches of at most 64 with bounded concurrency") {
  SidecarStats stats;
  MockServer server([&](httplib::Server& s) { protocol_routes(s, stats, 30); });
  std::vector<std::string> texts;
  for (int k = 0; k < 600; ++k) texts.push_back(k % 3 == 0 ? "kind" : k % 3 == 1 ? "rude" : "plain");
  const auto scores = SidecarScorer(server.url()).score_batch(texts);
  REQUIRE(scores.size() == 600);
  for (int k = 0; k < 600; ++k) CHECK(scores[k].scalar == (k % 3 == 0 ? 1.0 : k % 3 == 1 ? 0.0 : 0.5));
  CHECK(*std::max_element(stats.batch_sizes.begin(), stats.batch_sizes.end()) <= 64);
  std::size_t total = 0;
  for (auto n : stats.batch_sizes) total += n;
  CHECK(total == 600);
  CHECK(stats.peak.load() <= 4);
  CHECK(stats.peak.load() >= 2);

  SidecarStats narrow_stats;
  MockServer narrow([&](httplib::Server& s) { protocol_routes(s, narrow_stats, 10); });
  SidecarOptions options;
  options.max_in_flight = 1;
  options.batch_size = 10;
  SidecarScorer(narrow.url(), options).score_batch(std::vector<std::string>(35, "kind"));
  CHECK(narrow_stats.peak.load() == 1);
  CHECK(narrow_stats.batch_sizes == std::vector<std::size_t>{10, 10, 10, 5});
}

TEST_CASE("sidecar error mapping") {
  SUBCASE("400 with an error body") {
    auto server = fixed_response(400, R"({"error": "texts must be strings"})");
    CHECK_KIND(SidecarScorer(server.url()).score("x"), EK::SidecarMalformedResponse);
  }
  SUBCASE("413") {
    auto server = fixed_response(413, R"({"error": "batch too large"})");
    CHECK_KIND(SidecarScorer(server.url()).score("x"), EK::SidecarMalformedResponse);
  }
  SUBCASE("503 while loading") {
    auto server = fixed_response(503, R"({"error": "loading"})");
    CHECK_KIND(SidecarScorer(server.url()).score("x"), EK::SidecarUnavailable);
    CHECK_KIND(SidecarScorer(server.url()).health(), EK::SidecarUnavailable);
  }
  SUBCASE("not JSON") {
    auto server = fixed_response(200, "<html>");
    CHECK_KIND(SidecarScorer(server.url()).score("x"), EK::SidecarMalformedResponse);
  }
  SUBCASE("wrong number of scores") {
    auto server = fixed_response(200, R"({"scores": []})");
    CHECK_KIND(SidecarScorer(server.url()).score("x"), EK::SidecarMalformedResponse);
  }
  SUBCASE("probabilities that do not sum to one") {
    auto server = fixed_response(200, R"({"scores": [{"p_negative": 0.5, "p_neutral": 0.5, "p_positive": 0.5}]})");
    CHECK_KIND(SidecarScorer(server.url()).score("x"), EK::SidecarMalformedResponse);
  }
  SUBCASE("missing field") {
    auto server = fixed_response(200, R"({"scores": [{"p_negative": 0.5, "p_neutral": 0.5}]})");
    CHECK_KIND(SidecarScorer(server.url()).score("x"), EK::SidecarMalformedResponse);
  }
  SUBCASE("nobody listening") {
    CHECK_KIND(SidecarScorer(testing_support::dead_url()).score("x"), EK::SidecarUnavailable);
    CHECK_KIND(SidecarScorer(testing_support::dead_url()).health(), EK::SidecarUnavailable);
  }
}

TEST_CASE("sidecar decode reports the failing index") {
  const std::string body =
      R"({"scores": [{"p_negative": 0, "p_neutral": 1, "p_positive": 0}, {"p_negative": 2, "p_neutral": 0, "p_positive": 0}]})";
  try {
    SidecarScorer::decode_response(body, 2, 64);
    FAIL("expected a scoring error");
  } catch (const ScoringError& e) {
    CHECK(e.index() == 65);
    CHECK(e.kind() == EK::SidecarMalformedResponse);
  }
}

TEST_CASE("sidecar url from the environment") {
  ::unsetenv("OPINION_LOOM_SIDECAR_URL");
  CHECK(sidecar_url_from_env() == "http://127.0.0.1:8091");
  ::setenv("OPINION_LOOM_SIDECAR_URL", "http://10.0.0.2:9000", 1);
  CHECK(sidecar_url_from_env() == "http://10.0.0.2:9000");
  ::unsetenv("OPINION_LOOM_SIDECAR_URL");
}

TEST_CASE("scoring through the sidecar writes probability columns") {
  SidecarStats stats;
  MockServer server([&](httplib::Server& s) { protocol_routes(s, stats); });
  testing_support::TempDir dir;
  Transcript t;
  t.agent_specs = {{"a", BackendKind::scripted, Stance::neutral, {}}, {"b", BackendKind::scripted, Stance::neutral, {}}};
  t.rounds = {{Message::make("a", 1, "kind"), Message::make("b", 1, "rude plain")},
              {Message::make("a", 2, "kind rude"), Message::make("b", 2, "plain")}};
  io::save_transcript(dir / "transcript.jsonl", t);
  const auto path = commands::cmd_score(dir / "transcript.jsonl", commands::ScoreBackend::sidecar, dir.path(), server.url());
  const auto table = io::load_trajectory(path);
  REQUIRE(table.scores.has_value());
  CHECK((*table.scores)[0][1].p_negative == 0.5);
  CHECK((*table.scores)[0][1].p_neutral == 0.5);
  CHECK(table.trajectory.at(0)[1] == 0.25);

  auto loading = fixed_response(200, R"({"status": "loading", "model": "m"})");
  CHECK_KIND(commands::cmd_score(dir / "transcript.jsonl", commands::ScoreBackend::sidecar, dir.path(), loading.url()),
             EK::SidecarUnavailable);
  CHECK_KIND(commands::cmd_score(dir / "transcript.jsonl", commands::ScoreBackend::sidecar, dir.path(),
                                 testing_support::dead_url()),
             EK::SidecarUnavailable);
}

// ---------------------------------------------------------------------------

namespace {

struct ChatLog {
  std::mutex mutex;
  std::vector<json> bodies;
  std::vector<std::string> auth;
  std::vector<std::string> paths;
  std::atomic<int> calls{0};
};

std::string chat_reply(const std::string& content) {
  return json{{"id", "x"}, {"choices", {{{"index", 0}, {"message", {{"role", "assistant"}, {"content", content}}}}}}}
      .dump();
}

// Answers with a status per call index; successes echo the last user turn length.
MockServer chat_server(ChatLog& log, std::vector<int> statuses) {
  return MockServer([&log, statuses](httplib::Server& server) {
    server.Post(R"(/v1/chat/completions)", [&log, statuses](const httplib::Request& req, httplib::Response& res) {
      const int call = log.calls++;
      {
        std::lock_guard<std::mutex> lock(log.mutex);
        log.bodies.push_back(json::parse(req.body));
        log.auth.push_back(req.get_header_value("Authorization"));
        log.paths.push_back(req.path);
      }
      const int status = call < static_cast<int>(statuses.size()) ? statuses[call] : 200;
      res.status = status;
      if (status == 200) {
        res.set_content(chat_reply("reply " + std::to_string(call)), "application/json");
      } else {
        res.set_content(R"({"error": {"message": "nope"}})", "application/json");
      }
    });
  });
}

LlmSettings settings_for(const MockServer& server) {
  LlmSettings s;
  s.endpoint = server.url() + "/v1/chat/completions";
  s.model = "test-model";
  s.temperature = 0.7;
  s.max_tokens = 120;
  s.timeout_s = 5;
  return s;
}

RetryPolicy recording_policy(std::vector<std::chrono::milliseconds>& sleeps) {
  RetryPolicy policy;
  policy.sleep = [&sleeps](std::chrono::milliseconds d) { sleeps.push_back(d); };
  return policy;
}

GenerationRequest sample_request() {
  return {"ann", 2, "be brief", {{ChatRole::self, "my earlier view"}, {ChatRole::peer, "what others said"}}};
}

}  // namespace

TEST_CASE("chat request format") {
  ChatLog log;
  auto server = chat_server(log, {});
  std::vector<std::chrono::milliseconds> sleeps;
  OpenAiChatBackend backend(settings_for(server), "secret", recording_policy(sleeps));
  CHECK(backend.generate(sample_request()) == "reply 0");
  REQUIRE(log.bodies.size() == 1);
  const json expected = {{"model", "test-model"},
                         {"messages",
                          {{{"role", "system"}, {"content", "be brief"}},
                           {{"role", "assistant"}, {"content", "my earlier view"}},
                           {{"role", "user"}, {"content", "what others said"}}}},
                         {"temperature", 0.7},
                         {"max_tokens", 120}};
  CHECK(log.bodies[0] == expected);
  CHECK(log.auth[0] == "Bearer secret");
  CHECK(log.paths[0] == "/v1/chat/completions");
  CHECK(sleeps.empty());
}

TEST_CASE("rate limits are retried with exponential backoff") {
  ChatLog log;
  auto server = chat_server(log, {429, 429});
  std::vector<std::chrono::milliseconds> sleeps;
  OpenAiChatBackend backend(settings_for(server), "", recording_policy(sleeps));
  CHECK(backend.generate(sample_request()) == "reply 2");
  CHECK(log.calls.load() == 3);
  CHECK(sleeps == std::vector<std::chrono::milliseconds>{std::chrono::milliseconds(1000), std::chrono::milliseconds(2000)});
  CHECK(log.auth[0].empty());
}

TEST_CASE("server errors exhaust the attempts") {
  ChatLog log;
  auto server = chat_server(log, {500, 502, 503, 500, 500, 500});
  std::vector<std::chrono::milliseconds> sleeps;
  OpenAiChatBackend backend(settings_for(server), "", recording_policy(sleeps));
  CHECK_KIND(backend.generate(sample_request()), EK::BackendFailure);
  CHECK(log.calls.load() == 5);
  CHECK(sleeps.size() == 4);
  CHECK(sleeps.back() == std::chrono::milliseconds(8000));
}

TEST_CASE("client errors are not retried") {
  ChatLog log;
  auto server = chat_server(log, {400});
  std::vector<std::chrono::milliseconds> sleeps;
  OpenAiChatBackend backend(settings_for(server), "", recording_policy(sleeps));
  const auto message = testing_support::error_message([&] { backend.generate(sample_request()); });
  CHECK(message.find("HTTP 400") != std::string::npos);
  CHECK(log.calls.load() == 1);
  CHECK(sleeps.empty());
}

TEST_CASE("transport failures are retried") {
  LlmSettings s;
  s.endpoint = testing_support::dead_url() + "/v1/chat/completions";
  s.timeout_s = 2;
  std::vector<std::chrono::milliseconds> sleeps;
  RetryPolicy policy = recording_policy(sleeps);
  policy.max_attempts = 3;
  OpenAiChatBackend backend(s, "", policy);
  CHECK_KIND(backend.generate(sample_request()), EK::BackendFailure);
  CHECK(sleeps.size() == 2);
}

TEST_CASE("malformed chat responses") {
  CHECK(OpenAiChatBackend::parse_response(chat_reply("hi")) == "hi");
  CHECK_KIND(OpenAiChatBackend::parse_response(R"({"choices": []})"), EK::BackendFailure);
  CHECK_KIND(OpenAiChatBackend::parse_response("not json"), EK::BackendFailure);
}

TEST_CASE("api key from the environment") {
  ::unsetenv("OPINION_LOOM_API_KEY");
  CHECK(api_key_from_env().empty());
  ::setenv("OPINION_LOOM_API_KEY", "k-123", 1);
  CHECK(api_key_from_env() == "k-123");
  ::unsetenv("OPINION_LOOM_API_KEY");
}

TEST_CASE("discussion over HTTP backends aborts with a partial transcript") {
  ChatLog log;
  // Two agents, sequential generation: calls 0,1 are round 1, call 2 fails for good.
  auto server = chat_server(log, {200, 200, 400});
  RunConfig config;
  config.rounds = 3;
  config.options.parallel = false;
  config.llm = settings_for(server);
  config.agent_specs = {{"ann", BackendKind::llm_http, Stance::positive, {}},
                        {"bob", BackendKind::llm_http, Stance::negative, {}}};
  const auto backends = commands::make_backends(config, "");
  try {
    run_discussion(config, backends);
    FAIL("expected a backend failure");
  } catch (const BackendFailure& failure) {
    CHECK(failure.agent_id() == "ann");
    CHECK(failure.round() == 2);
    CHECK(failure.partial().rounds.size() == 2);
    CHECK(failure.partial().rounds[0].size() == 2);
    CHECK(failure.partial().rounds[1].empty());
    CHECK_FALSE(failure.partial().complete);
  }
  CHECK(log.bodies[0]["messages"][1]["content"].get<std::string>().find("strongly") == std::string::npos);
  CHECK(log.bodies[0]["messages"][1]["content"].get<std::string>().find("stance as positive") != std::string::npos);
}
