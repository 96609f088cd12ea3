#include <doctest.h>

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <filesystem>
#include <thread>

#include "assoc/clients.hpp"
#include "assoc/error.hpp"

using namespace assoc;
using nlohmann::json;

namespace {

// httplib server on an ephemeral port, stopped on destruction.
class MockServer {
 public:
  httplib::Server server;

  void start() {
    port_ = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port_ > 0);
    thread_ = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~MockServer() {
    server.stop();
    if (thread_.joinable()) thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  int port_ = 0;
  std::thread thread_;
};

RetryPolicy fast_retry(int attempts = 3) {
  RetryPolicy r;
  r.attempts = attempts;
  r.initial_backoff = std::chrono::milliseconds(5);
  r.timeout = std::chrono::milliseconds(2000);
  return r;
}

void serve_wiki(MockServer& m, std::atomic<int>& hits) {
  m.server.Get(R"(/api/rest_v1/page/summary/(.+))", [&](const httplib::Request& req, httplib::Response& res) {
    ++hits;
    if (req.matches[1] == "Matterhorn") {
      res.set_content(json{{"title", "Matterhorn"}, {"titles", {{"normalized", "Matterhorn"}}}}.dump(), "application/json");
    } else {
      res.status = 404;
    }
  });
  m.server.Get("/w/api.php", [&](const httplib::Request& req, httplib::Response& res) {
    ++hits;
    CHECK(req.get_param_value("action") == "opensearch");
    const auto q = req.get_param_value("search");
    if (q == "Mattehorn") {
      res.set_content(json::array({q, {"Matterhorn"}, {""}, {"https://de.wikipedia.org/wiki/Matterhorn"}}).dump(),
                      "application/json");
    } else {
      res.set_content(json::array({q, json::array(), json::array(), json::array()}).dump(), "application/json");
    }
  });
}

LlmCorrectionRequest request(const std::string& incorrect) {
  return make_correction_request("Argument", {incorrect, "Streit", "Debatte"}, 0, "");
}

}  // namespace

TEST_SUITE("clients") {
  TEST_CASE("sha256 of a known string") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  }

  TEST_CASE("url splitting and encoding") {
    CHECK(split_url("http://h:1/v1/chat").origin == "http://h:1");
    CHECK(split_url("http://h:1/v1/chat").path == "/v1/chat");
    CHECK(split_url("https://de.wikipedia.org").path.empty());
    CHECK_THROWS_AS(split_url("localhost:1"), ConfigError);
    CHECK(percent_encode("Kälte a") == "K%C3%A4lte%20a");
  }

  TEST_CASE("wikipedia exact title, search redirect, and miss") {
    MockServer m;
    std::atomic<int> hits{0};
    serve_wiki(m, hits);
    m.start();
    WikiConfig cfg;
    cfg.base_url = m.url();
    cfg.retry = fast_retry();
    HttpWikiClient wiki(cfg, nullptr);

    const auto exact = wiki.lookup("Matterhorn");
    CHECK(exact.matched_title == std::optional<std::string>("Matterhorn"));
    CHECK_FALSE(exact.via_search_redirect);
    CHECK(hits == 1);

    const auto redirected = wiki.lookup("Mattehorn");
    CHECK(redirected.matched_title == std::optional<std::string>("Matterhorn"));
    CHECK(redirected.via_search_redirect);
    CHECK(hits == 3);

    const auto miss = wiki.lookup("Qwertzuiop");
    CHECK_FALSE(miss.matched_title.has_value());
  }

  TEST_CASE("cached lookups make no network calls") {
    MockServer m;
    std::atomic<int> hits{0};
    serve_wiki(m, hits);
    m.start();
    const auto dir = std::filesystem::temp_directory_path() / ("assoc-cache-" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    WikiConfig cfg;
    cfg.base_url = m.url();
    cfg.retry = fast_retry();
    {
      ResponseCache cache(dir);
      HttpWikiClient wiki(cfg, &cache);
      wiki.lookup("Mattehorn");
      CHECK(wiki.network_calls() == 2);
    }
    ResponseCache reopened(dir);
    HttpWikiClient wiki(cfg, &reopened);
    const auto r = wiki.lookup("Mattehorn");
    CHECK(wiki.network_calls() == 0);
    CHECK(r.matched_title == std::optional<std::string>("Matterhorn"));
    CHECK(r.via_search_redirect);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("server errors are retried, client errors are not") {
    MockServer m;
    std::atomic<int> hits{0};
    m.server.Get(R"(/api/rest_v1/page/summary/(.+))", [&](const httplib::Request& req, httplib::Response& res) {
      ++hits;
      res.status = req.matches[1] == "Teapot" ? 418 : 503;
    });
    m.start();
    WikiConfig cfg;
    cfg.base_url = m.url();
    cfg.retry = fast_retry(3);
    HttpWikiClient wiki(cfg, nullptr);
    CHECK_THROWS_AS(wiki.lookup("Berg"), TransportError);
    CHECK(hits == 3);
    hits = 0;
    CHECK_THROWS_AS(wiki.lookup("Teapot"), ProtocolError);
    CHECK(hits == 1);
  }

  TEST_CASE("unreachable endpoint is a transport error") {
    WikiConfig cfg;
    cfg.base_url = "http://127.0.0.1:1";
    cfg.retry = fast_retry(2);
    HttpWikiClient wiki(cfg, nullptr);
    CHECK_THROWS_AS(wiki.lookup("Berg"), TransportError);
  }

  TEST_CASE("prompt template substitution") {
    const auto req = request("Diskussoin");
    const auto p = build_prompt(req);
    CHECK(p.user.find("1. 'WORD'") != std::string::npos);
    CHECK(p.user.find("die Response 'Diskussoin'") != std::string::npos);
    CHECK(p.user.find("Cue 'Argument'") != std::string::npos);
    CHECK(p.system.find("Response: Hohheits; Korrigiert: Hoheitsgebiet") != std::string::npos);
    CHECK(p.system.find("Gebiet") != std::string::npos);
    CHECK(build_prompt(req).user == p.user);
    auto two = req;
    two.responses[1] = std::string(kMask);
    CHECK_THROWS_AS(build_prompt(two), ConfigError);
    auto none = req;
    none.responses[0] = "Diskussion";
    CHECK_THROWS_AS(build_prompt(none), ConfigError);
  }

  TEST_CASE("reply stripping") {
    CHECK(strip_reply("'Werbung'") == "Werbung");
    CHECK(strip_reply("  \"Diskussion\"\n") == "Diskussion");
    CHECK(strip_reply("„Haus“") == "Haus");
    CHECK(strip_reply("Rock'n'Roll") == "Rock'n'Roll");
  }

  TEST_CASE("llm endpoint round trip") {
    MockServer m;
    std::atomic<int> hits{0};
    json last_body;
    std::string auth;
    m.server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
      ++hits;
      last_body = json::parse(req.body);
      auth = req.get_header_value("Authorization");
      const std::string user = last_body["messages"][1]["content"];
      const std::string reply = user.find("Werbungh") != std::string::npos ? "'Werbung'" : "Diskussion";
      res.set_content(json{{"choices", {{{"message", {{"role", "assistant"}, {"content", reply}}}}}}}.dump(),
                      "application/json");
    });
    m.start();
    LlmConfig cfg;
    cfg.url = m.url() + "/v1/chat/completions";
    cfg.model = "test-model";
    cfg.api_key = "secret";
    cfg.retry = fast_retry();
    ResponseCache cache;
    HttpLlmClient llm(cfg, &cache);
    CHECK(llm.correct(request("Diskussoin")) == "Diskussion");
    CHECK(last_body["model"] == "test-model");
    CHECK(last_body["temperature"] == 0.0);
    CHECK(last_body["messages"][0]["role"] == "system");
    CHECK(auth == "Bearer secret");
    CHECK(llm.correct(request("Werbungh")) == "Werbung");
    CHECK(hits == 2);
    CHECK(llm.correct(request("Diskussoin")) == "Diskussion");
    CHECK(hits == 2);
  }

  TEST_CASE("llm timeout surfaces as transport error") {
    MockServer m;
    m.server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
      std::this_thread::sleep_for(std::chrono::milliseconds(600));
      res.set_content("{}", "application/json");
    });
    m.start();
    LlmConfig cfg;
    cfg.url = m.url() + "/v1/chat/completions";
    cfg.retry = fast_retry(1);
    cfg.retry.timeout = std::chrono::milliseconds(150);
    HttpLlmClient llm(cfg, nullptr);
    CHECK_THROWS_AS(llm.correct(request("Diskussoin")), TransportError);
  }

  TEST_CASE("empty llm reply is a failed correction") {
    MockServer m;
    m.server.Post("/chat", [&](const httplib::Request&, httplib::Response& res) {
      res.set_content(json{{"message", {{"content", " '' "}}}}.dump(), "application/json");
    });
    m.start();
    LlmConfig cfg;
    cfg.url = m.url() + "/chat";
    cfg.retry = fast_retry(1);
    HttpLlmClient llm(cfg, nullptr);
    CHECK_THROWS_AS(llm.correct(request("Diskussoin")), CorrectionFailed);
  }
}
