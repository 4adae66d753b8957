#include "helpers.hpp"

#include <httplib.h>

#include <thread>

#include "classmind/prompts.hpp"

using namespace classmind;
using Json = nlohmann::json;

namespace {

// In-process stand-in for a hosted model endpoint.
struct FakeModelServer {
  httplib::Server http;
  std::thread thread;
  int port = 0;
  std::atomic<int> hits{0};
  std::atomic<int> fail_first{0};
  std::string last_auth;
  Json last_body;

  FakeModelServer() {
    http.Post("/v1/generate", [this](const httplib::Request& req, httplib::Response& res) {
      const int n = ++hits;
      last_auth = req.get_header_value("Authorization");
      last_body = Json::parse(req.body);
      if (n <= fail_first) {
        res.status = 503;
        return;
      }
      res.set_content(Json{{"payload", {{"caption", "from remote"}}}}.dump(), "application/json");
    });
    http.Post("/v1/embed", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("not json", "text/plain");
    });
    http.Post("/v1/validate", [](const httplib::Request&, httplib::Response& res) { res.status = 403; });
    port = http.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { http.listen_after_bind(); });
    http.wait_until_ready();
  }
  ~FakeModelServer() {
    http.stop();
    thread.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port); }
};

StructuredRequest req() {
  return {"caption", {{std::string(prompts::kInterval), "[0.000, 1.000)"}}, schema_ids::kCaption, 0};
}

}  // namespace

TEST_SUITE("remote") {

TEST_CASE("request body carries task, rendered prompt, schema and auth header") {
  FakeModelServer server;
  RemoteConfig rc;
  rc.base_url = server.url();
  rc.auth_value = "Bearer s3cret";
  ModelGateway gw(std::make_shared<RemoteBackend>(rc), testing::fast_config());
  CHECK(gw.generate(req()).payload["caption"] == "from remote");
  CHECK(server.last_auth == "Bearer s3cret");
  CHECK(server.last_body["task_tag"] == "caption");
  CHECK(server.last_body["prompt"].get<std::string>().find("## interval") != std::string::npos);
  CHECK(server.last_body["schema"]["required"][0] == "caption");
  CHECK(gw.stats().network_calls == 1);
}

TEST_CASE("5xx is retried; a cached answer makes no network call") {
  FakeModelServer server;
  server.fail_first = 2;
  testing::TempDir cache;
  RemoteConfig rc;
  rc.base_url = server.url();
  auto cfg = testing::fast_config();
  cfg.cache_dir = cache.path();
  {
    ModelGateway gw(std::make_shared<RemoteBackend>(rc), cfg);
    CHECK(gw.generate(req()).payload["caption"] == "from remote");
    CHECK(server.hits == 3);
    CHECK(gw.stats().retries == 2);
  }
  ModelGateway again(std::make_shared<RemoteBackend>(rc), cfg);
  CHECK(again.generate(req()).payload["caption"] == "from remote");
  CHECK(again.stats().network_calls == 0);
  CHECK(server.hits == 3);
}

TEST_CASE("non-JSON bodies become schema violations and 4xx is not retried") {
  FakeModelServer server;
  RemoteConfig rc;
  rc.base_url = server.url();
  ModelGateway gw(std::make_shared<RemoteBackend>(rc), testing::fast_config());
  CHECK_THROWS_AS(gw.embed("x"), SchemaViolation);
  CHECK_CODE(gw.validate("x", {{"caption"}, {}}), ErrorCode::kBackendUnavailable);
  CHECK(gw.stats().network_calls == 4);
}

TEST_CASE("unreachable endpoint") {
  RemoteConfig rc;
  rc.base_url = "http://127.0.0.1:1";
  ModelGateway gw(std::make_shared<RemoteBackend>(rc), testing::fast_config());
  CHECK_CODE(gw.generate(req()), ErrorCode::kBackendUnavailable);
  CHECK_CODE(RemoteBackend(RemoteConfig{}), ErrorCode::kConfig);
}

}
