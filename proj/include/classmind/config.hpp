#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "classmind/gateway.hpp"

namespace classmind {

struct Config {
  std::filesystem::path store_dir = "store";
  std::string backend = "mock";  // mock | remote
  std::optional<std::filesystem::path> fixtures_dir;
  std::optional<std::filesystem::path> cache_dir;  // default <store>/cache
  RemoteConfig remote;
  int parallelism = 4;
  std::string log_level = "warn";

  // serve
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string cors_origin = "*";
  std::string api_token;  // static bearer token; empty disables auth
  int workers = 2;

  // Defaults for jobs submitted over HTTP.
  std::optional<std::filesystem::path> rubric;
  std::optional<std::filesystem::path> taxonomy;
  std::optional<std::filesystem::path> index_dir;
  double window_seconds = 120.0;

  void validate() const;  // ConfigError
};

// Keys mirror the field names; remote settings live under "remote":
// {base_url, auth_header, auth_value, timeout_seconds}.
void apply_config_json(Config& config, const nlohmann::json& doc);
Config load_config(const std::optional<std::filesystem::path>& file);
// CLASSMIND_STORE, CLASSMIND_BACKEND, CLASSMIND_PORT, CLASSMIND_REMOTE_URL,
// CLASSMIND_REMOTE_TOKEN, CLASSMIND_API_TOKEN, CLASSMIND_FIXTURES,
// CLASSMIND_CACHE.
void apply_env(Config& config);

std::shared_ptr<Backend> make_backend(const Config& config);
std::unique_ptr<ModelGateway> make_gateway(const Config& config);

}  // namespace classmind
