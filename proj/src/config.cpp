#include "classmind/config.hpp"

#include <cstdlib>

#include "classmind/json_io.hpp"

namespace classmind {

using Json = nlohmann::json;

void Config::validate() const {
  if (backend != "mock" && backend != "remote") fail(ErrorCode::kConfig, "backend must be mock or remote, got '" + backend + "'");
  if (backend == "remote" && remote.base_url.empty()) {
    fail(ErrorCode::kConfig, "backend=remote requires remote.base_url (or CLASSMIND_REMOTE_URL)");
  }
  if (parallelism < 1) fail(ErrorCode::kConfig, "parallelism must be >= 1");
  if (workers < 1) fail(ErrorCode::kConfig, "workers must be >= 1");
  if (port < 0 || port > 65535) fail(ErrorCode::kConfig, "port out of range");
}

namespace {

template <typename T>
void take(const Json& doc, const char* key, T& out) {
  if (!doc.contains(key)) return;
  try {
    out = doc[key].get<T>();
  } catch (const Json::exception& e) {
    fail(ErrorCode::kConfig, std::string("config.") + key + ": " + e.what());
  }
}

void take_path(const Json& doc, const char* key, std::optional<std::filesystem::path>& out) {
  std::string s;
  take(doc, key, s);
  if (!s.empty()) out = s;
}

}  // namespace

void apply_config_json(Config& c, const Json& doc) {
  if (!doc.is_object()) fail(ErrorCode::kConfig, "config must be a JSON object");
  std::string store;
  take(doc, "store_dir", store);
  if (!store.empty()) c.store_dir = store;
  take(doc, "backend", c.backend);
  take_path(doc, "fixtures_dir", c.fixtures_dir);
  take_path(doc, "cache_dir", c.cache_dir);
  take(doc, "parallelism", c.parallelism);
  take(doc, "log_level", c.log_level);
  take(doc, "host", c.host);
  take(doc, "port", c.port);
  take(doc, "cors_origin", c.cors_origin);
  take(doc, "api_token", c.api_token);
  take(doc, "workers", c.workers);
  take_path(doc, "rubric", c.rubric);
  take_path(doc, "taxonomy", c.taxonomy);
  take_path(doc, "index_dir", c.index_dir);
  take(doc, "window_seconds", c.window_seconds);
  if (doc.contains("remote")) {
    const auto& r = doc["remote"];
    take(r, "base_url", c.remote.base_url);
    take(r, "auth_header", c.remote.auth_header);
    take(r, "auth_value", c.remote.auth_value);
    take(r, "timeout_seconds", c.remote.timeout_seconds);
  }
}

Config load_config(const std::optional<std::filesystem::path>& file) {
  Config c;
  if (file) {
    try {
      apply_config_json(c, json_io::read_file(*file));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kConfig) throw;
      fail(ErrorCode::kConfig, file->string() + ": " + e.what());
    }
  }
  apply_env(c);
  return c;
}

void apply_env(Config& c) {
  auto env = [](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    return std::string(v);
  };
  if (auto v = env("CLASSMIND_STORE")) c.store_dir = *v;
  if (auto v = env("CLASSMIND_BACKEND")) c.backend = *v;
  if (auto v = env("CLASSMIND_PORT")) {
    try {
      c.port = std::stoi(*v);
    } catch (const std::exception&) {
      fail(ErrorCode::kConfig, "CLASSMIND_PORT is not a number: " + *v);
    }
  }
  if (auto v = env("CLASSMIND_REMOTE_URL")) c.remote.base_url = *v;
  if (auto v = env("CLASSMIND_REMOTE_TOKEN")) c.remote.auth_value = "Bearer " + *v;
  if (auto v = env("CLASSMIND_API_TOKEN")) c.api_token = *v;
  if (auto v = env("CLASSMIND_FIXTURES")) c.fixtures_dir = *v;
  if (auto v = env("CLASSMIND_CACHE")) c.cache_dir = *v;
}

std::shared_ptr<Backend> make_backend(const Config& c) {
  c.validate();
  if (c.backend == "remote") return std::make_shared<RemoteBackend>(c.remote);
  return std::make_shared<MockBackend>(c.fixtures_dir ? MockFixtures::load(*c.fixtures_dir) : MockFixtures{});
}

std::unique_ptr<ModelGateway> make_gateway(const Config& c) {
  GatewayConfig g;
  g.max_in_flight = c.parallelism;
  g.cache_dir = c.cache_dir ? *c.cache_dir : c.store_dir / "cache";
  return std::make_unique<ModelGateway>(make_backend(c), g);
}

}  // namespace classmind
