#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "classmind/error.hpp"
#include "classmind/model.hpp"
#include "classmind/schema.hpp"

namespace classmind {

enum class BackendKind { kCaptioner, kTranscriberDiarizer, kReasoner, kValidator, kEmbedder };

std::string_view to_string(BackendKind kind);
BackendKind parse_backend_kind(std::string_view text);

struct PromptSection {
  std::string label;
  std::string text;
};

struct StructuredRequest {
  std::string task_tag;
  std::vector<PromptSection> prompt_sections;
  std::string response_schema_id;
  std::int64_t determinism_seed = 0;

  // Text of the first section with this label, or empty.
  std::string section(std::string_view label) const;
  std::vector<std::string> sections(std::string_view label) const;
};

struct StructuredResponse {
  std::string schema_id;
  nlohmann::json payload;
  std::string backend_fingerprint;
};

struct ValidationVerdict {
  bool consistent = true;
  std::string rationale;

  friend bool operator==(const ValidationVerdict&, const ValidationVerdict&) = default;
};

struct EmbeddingVector {
  std::vector<double> values;
  std::size_t dim() const { return values.size(); }
};

struct EvidenceBundle {
  std::vector<std::string> captions;
  std::vector<TranscriptTurn> turns;
  bool empty() const { return captions.empty() && turns.empty(); }
};

// Thrown by backends for transient failures (connection refused, 5xx, ...).
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A raw model backend. Implementations answer one structured request and
// return an unvalidated payload; the gateway owns retries, caching and schema
// checks.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string fingerprint() const = 0;
  virtual nlohmann::json complete(BackendKind kind, const StructuredRequest& request) = 0;
  virtual std::uint64_t network_calls() const { return 0; }
};

struct GatewayConfig {
  int max_in_flight = 4;
  int max_attempts = 3;
  std::chrono::milliseconds base_backoff{500};  // doubles per retry: 0.5s, 1s, 2s
  std::int64_t max_caption_window_ms = 180'000;
  std::optional<std::filesystem::path> cache_dir;
};

struct GatewayStats {
  std::uint64_t requests = 0;
  std::uint64_t backend_calls = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t retries = 0;
  std::uint64_t network_calls = 0;
};

class ModelGateway {
 public:
  ModelGateway(std::shared_ptr<Backend> backend, GatewayConfig config = {},
               const SchemaRegistry& registry = SchemaRegistry::builtin());

  std::string caption(const std::string& lesson_id, const TimeInterval& window,
                      const std::optional<std::string>& hint);
  StructuredResponse generate(const StructuredRequest& request);
  ValidationVerdict validate(const std::string& feedback_text, const EvidenceBundle& evidence);
  EmbeddingVector embed(const std::string& text);

  GatewayStats stats() const;
  const GatewayConfig& config() const { return config_; }
  std::string backend_fingerprint() const { return backend_->fingerprint(); }

  // Cache key: SHA-256 over the canonical JSON form of the request.
  std::string request_hash(BackendKind kind, const StructuredRequest& request) const;

 private:
  nlohmann::json call(BackendKind kind, const StructuredRequest& request);
  std::optional<nlohmann::json> cache_load(const std::string& key, const std::string& schema_id) const;
  void cache_store(const std::string& key, const std::string& schema_id,
                   const nlohmann::json& payload) const;

  std::shared_ptr<Backend> backend_;
  GatewayConfig config_;
  const SchemaRegistry& registry_;
  std::counting_semaphore<1024> in_flight_;
  std::atomic<std::uint64_t> requests_{0};
  std::atomic<std::uint64_t> backend_calls_{0};
  std::atomic<std::uint64_t> cache_hits_{0};
  std::atomic<std::uint64_t> retries_{0};
};

// ---- mock backend ---------------------------------------------------------

struct HotspotRule {
  std::string keyword;
  std::string dimension_id;
  std::string polarity;  // STRENGTH | WEAKNESS
  std::optional<std::string> quote_override;  // plants a fabricated quote
};

struct ActivityRule {
  std::string keyword;
  std::vector<std::string> codes;
  std::string source;  // "turn", "caption" or "any"
};

// Keyword-rule tables that drive the mock reasoner. Loaded from
// <fixtures>/rules.json; missing keys keep these defaults.
struct MockRules {
  std::vector<HotspotRule> hotspot_rules;
  std::map<std::string, std::vector<std::string>> guidelines;  // dimension -> templates
  std::map<std::string, std::string> advice;                   // dimension -> advice
  std::vector<ActivityRule> activity_rules;
  std::vector<std::string> outline_shift_keywords;
  std::map<int, std::vector<std::string>> bloom_verbs;  // level -> verbs
};

MockRules default_mock_rules();

struct MockFixtures {
  MockRules rules = default_mock_rules();
  // (lesson_id, start_ms, end_ms) -> caption text
  std::map<std::tuple<std::string, std::int64_t, std::int64_t>, std::string> captions;
  std::string content_hash;  // of the loaded fixture files

  static MockFixtures load(const std::filesystem::path& dir);
};

class MockBackend : public Backend {
 public:
  explicit MockBackend(MockFixtures fixtures = {});

  std::string fingerprint() const override;
  nlohmann::json complete(BackendKind kind, const StructuredRequest& request) override;

  const MockFixtures& fixtures() const { return fixtures_; }

  static constexpr std::size_t kEmbeddingDim = 16;
  // Signed feature hashing of lower-cased words into 16 buckets, then L2
  // normalization. Text without words hashes as a whole.
  static std::vector<double> hash_embedding(std::string_view text);

 private:
  nlohmann::json reason(const StructuredRequest& request) const;

  MockFixtures fixtures_;
};

// ---- remote backend ---------------------------------------------------------

struct RemoteConfig {
  std::string base_url;  // e.g. http://127.0.0.1:8080
  std::string auth_header = "Authorization";
  std::string auth_value;  // e.g. "Bearer abc"; header omitted when empty
  std::map<BackendKind, std::string> routes = {
      {BackendKind::kCaptioner, "/v1/caption"},
      {BackendKind::kTranscriberDiarizer, "/v1/transcribe"},
      {BackendKind::kReasoner, "/v1/generate"},
      {BackendKind::kValidator, "/v1/validate"},
      {BackendKind::kEmbedder, "/v1/embed"}};
  int timeout_seconds = 120;
};

// Generic JSON-over-HTTP adapter. Request body: {task_tag, prompt, schema};
// response body: {payload}.
class RemoteBackend : public Backend {
 public:
  explicit RemoteBackend(RemoteConfig config);

  std::string fingerprint() const override;
  nlohmann::json complete(BackendKind kind, const StructuredRequest& request) override;
  std::uint64_t network_calls() const override { return network_calls_.load(); }

  static std::string render_prompt(const StructuredRequest& request);

 private:
  RemoteConfig config_;
  std::atomic<std::uint64_t> network_calls_{0};
};

}  // namespace classmind
