#include <httplib.h>

#include "classmind/gateway.hpp"
#include "classmind/hashing.hpp"

namespace classmind {

using Json = nlohmann::json;

RemoteBackend::RemoteBackend(RemoteConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty()) fail(ErrorCode::kConfig, "remote backend requires a base URL");
}

std::string RemoteBackend::fingerprint() const { return "remote:" + config_.base_url; }

std::string RemoteBackend::render_prompt(const StructuredRequest& request) {
  std::string out;
  for (const auto& s : request.prompt_sections) {
    out += "## " + s.label + "\n" + s.text + "\n\n";
  }
  return out;
}

Json RemoteBackend::complete(BackendKind kind, const StructuredRequest& request) {
  const auto route = config_.routes.find(kind);
  if (route == config_.routes.end()) {
    fail(ErrorCode::kConfig, "no remote route configured for " + std::string(to_string(kind)));
  }
  const Json body = {{"task_tag", request.task_tag},
                     {"prompt", render_prompt(request)},
                     {"schema", SchemaRegistry::builtin().get(request.response_schema_id)}};

  httplib::Client client(config_.base_url);
  client.set_connection_timeout(std::chrono::seconds(10));
  client.set_read_timeout(std::chrono::seconds(config_.timeout_seconds));
  httplib::Headers headers;
  if (!config_.auth_value.empty()) headers.emplace(config_.auth_header, config_.auth_value);

  ++network_calls_;
  auto res = client.Post(route->second, headers, body.dump(), "application/json");
  if (!res) throw TransportError("POST " + route->second + " failed: " + httplib::to_string(res.error()));
  if (res->status >= 500 || res->status == 429) {
    throw TransportError("POST " + route->second + " returned HTTP " + std::to_string(res->status));
  }
  if (res->status != 200) {
    fail(ErrorCode::kBackendUnavailable,
         "POST " + route->second + " rejected with HTTP " + std::to_string(res->status));
  }
  // A body that is not JSON or lacks "payload" counts as a schema violation.
  const auto doc = Json::parse(res->body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("payload")) return Json();
  return doc["payload"];
}

}  // namespace classmind
