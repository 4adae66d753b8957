#include "classmind/gateway.hpp"

#include <thread>

#include <spdlog/spdlog.h>

#include "classmind/fsutil.hpp"
#include "classmind/hashing.hpp"
#include "classmind/json_io.hpp"
#include "classmind/prompts.hpp"
#include "classmind/text.hpp"

namespace classmind {

using Json = nlohmann::json;

std::string_view to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::kCaptioner: return "CAPTIONER";
    case BackendKind::kTranscriberDiarizer: return "TRANSCRIBER_DIARIZER";
    case BackendKind::kReasoner: return "REASONER";
    case BackendKind::kValidator: return "VALIDATOR";
    case BackendKind::kEmbedder: return "EMBEDDER";
  }
  return "REASONER";
}

BackendKind parse_backend_kind(std::string_view text) {
  for (auto k : {BackendKind::kCaptioner, BackendKind::kTranscriberDiarizer, BackendKind::kReasoner,
                 BackendKind::kValidator, BackendKind::kEmbedder}) {
    if (to_string(k) == text) return k;
  }
  fail(ErrorCode::kConfig, "unknown backend kind '" + std::string(text) + "'");
}

std::string StructuredRequest::section(std::string_view label) const {
  for (const auto& s : prompt_sections) {
    if (s.label == label) return s.text;
  }
  return {};
}

std::vector<std::string> StructuredRequest::sections(std::string_view label) const {
  std::vector<std::string> out;
  for (const auto& s : prompt_sections) {
    if (s.label == label) out.push_back(s.text);
  }
  return out;
}

namespace {

// Releases a semaphore slot on scope exit.
class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<1024>& sem) : sem_(sem) { sem_.acquire(); }
  ~SlotGuard() { sem_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<1024>& sem_;
};

}  // namespace

ModelGateway::ModelGateway(std::shared_ptr<Backend> backend, GatewayConfig config,
                           const SchemaRegistry& registry)
    : backend_(std::move(backend)),
      config_(std::move(config)),
      registry_(registry),
      in_flight_(std::max(1, std::min(config_.max_in_flight, 1024))) {
  if (!backend_) fail(ErrorCode::kConfig, "gateway requires a backend");
  if (config_.max_attempts < 1) fail(ErrorCode::kConfig, "max_attempts must be >= 1");
}

std::string ModelGateway::request_hash(BackendKind kind, const StructuredRequest& request) const {
  Json sections = Json::array();
  for (const auto& s : request.prompt_sections) sections.push_back(Json::array({s.label, s.text}));
  const Json canonical = {{"backend", backend_->fingerprint()},
                          {"kind", std::string(to_string(kind))},
                          {"task_tag", request.task_tag},
                          {"sections", std::move(sections)},
                          {"schema", request.response_schema_id},
                          {"seed", request.determinism_seed}};
  return sha256_hex(canonical.dump());
}

std::optional<Json> ModelGateway::cache_load(const std::string& key, const std::string& schema_id) const {
  if (!config_.cache_dir) return std::nullopt;
  const auto path = *config_.cache_dir / (key + ".json");
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return std::nullopt;
  try {
    auto doc = json_io::read_file(path);
    if (doc.value("schema_id", "") != schema_id || !doc.contains("payload")) return std::nullopt;
    if (!registry_.validate(schema_id, doc["payload"]).empty()) return std::nullopt;
    return doc["payload"];
  } catch (const std::exception& e) {
    spdlog::warn("ignoring unreadable cache entry {}: {}", path.string(), e.what());
    return std::nullopt;
  }
}

void ModelGateway::cache_store(const std::string& key, const std::string& schema_id,
                               const Json& payload) const {
  if (!config_.cache_dir) return;
  const Json doc = {{"schema_id", schema_id},
                    {"backend_fingerprint", backend_->fingerprint()},
                    {"payload", payload}};
  // Identical keys carry identical values, so concurrent writers are benign.
  fsutil::write_atomic(*config_.cache_dir / (key + ".json"), doc.dump());
}

Json ModelGateway::call(BackendKind kind, const StructuredRequest& request) {
  ++requests_;
  if (!registry_.contains(request.response_schema_id)) {
    throw SchemaViolation("unregistered response schema '" + request.response_schema_id + "'", 0);
  }
  if (request.prompt_sections.empty()) fail(ErrorCode::kPrecondition, "request has no prompt sections");

  const auto key = request_hash(kind, request);
  if (auto cached = cache_load(key, request.response_schema_id)) {
    ++cache_hits_;
    return *cached;
  }

  std::string last_error;
  bool last_was_schema = false;
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    if (attempt > 1) {
      ++retries_;
      std::this_thread::sleep_for(config_.base_backoff * (1 << (attempt - 2)));
    }
    Json payload;
    try {
      SlotGuard slot(in_flight_);
      ++backend_calls_;
      payload = backend_->complete(kind, request);
    } catch (const TransportError& e) {
      last_error = e.what();
      last_was_schema = false;
      spdlog::warn("{} attempt {}/{} failed: {}", request.task_tag, attempt, config_.max_attempts,
                   last_error);
      continue;
    }
    auto errors = registry_.validate(request.response_schema_id, payload);
    if (errors.empty()) {
      cache_store(key, request.response_schema_id, payload);
      return payload;
    }
    last_error = text::join(errors, "; ");
    last_was_schema = true;
    spdlog::warn("{} attempt {}/{} returned invalid payload: {}", request.task_tag, attempt,
                 config_.max_attempts, last_error);
  }
  if (last_was_schema) {
    throw SchemaViolation("response for '" + request.task_tag + "' violates " +
                              request.response_schema_id + " after " +
                              std::to_string(config_.max_attempts) + " attempts: " + last_error,
                          config_.max_attempts);
  }
  fail(ErrorCode::kBackendUnavailable, "backend unavailable for '" + request.task_tag + "' after " +
                                           std::to_string(config_.max_attempts) +
                                           " attempts: " + last_error);
}

std::string ModelGateway::caption(const std::string& lesson_id, const TimeInterval& window,
                                  const std::optional<std::string>& hint) {
  if (window.duration_ms() > config_.max_caption_window_ms) {
    fail(ErrorCode::kWindowTooLong, "caption window " + window.to_string() + " exceeds the " +
                                        MediaTime::from_ms(config_.max_caption_window_ms).to_string() +
                                        " s limit");
  }
  StructuredRequest req{"caption",
                        {{std::string(prompts::kInstructions),
                          "Describe what is visible and happening in this classroom video segment."},
                         {std::string(prompts::kLessonId), lesson_id},
                         {std::string(prompts::kInterval), prompts::stamp(window)}},
                        schema_ids::kCaption,
                        0};
  if (hint && !hint->empty()) req.prompt_sections.push_back({std::string(prompts::kHint), *hint});
  return call(BackendKind::kCaptioner, req)["caption"].get<std::string>();
}

StructuredResponse ModelGateway::generate(const StructuredRequest& request) {
  auto payload = call(BackendKind::kReasoner, request);
  return {request.response_schema_id, std::move(payload), backend_->fingerprint()};
}

ValidationVerdict ModelGateway::validate(const std::string& feedback_text,
                                         const EvidenceBundle& evidence) {
  require(!evidence.empty(), "validation requires non-empty evidence");
  StructuredRequest req{"validate",
                        {{std::string(prompts::kInstructions),
                          "Check every claim and every quoted span of the feedback against the "
                          "timestamped evidence. Report whether the feedback is consistent."},
                         {std::string(prompts::kFeedback), feedback_text}},
                        schema_ids::kVerdict,
                        0};
  for (const auto& c : evidence.captions) req.prompt_sections.push_back({std::string(prompts::kCaptions), c});
  for (const auto& t : evidence.turns) {
    req.prompt_sections.push_back(
        {std::string(prompts::kSentences), prompts::line(t.interval, to_string(t.speaker), t.text)});
  }
  auto payload = call(BackendKind::kValidator, req);
  ValidationVerdict v{payload["consistent"].get<bool>(), payload["rationale"].get<std::string>()};
  if (!v.consistent && v.rationale.empty()) v.rationale = "validator reported an inconsistency";
  return v;
}

EmbeddingVector ModelGateway::embed(const std::string& text) {
  require(!text.empty(), "embed requires non-empty text");
  StructuredRequest req{"embed", {{std::string(prompts::kText), text}}, schema_ids::kEmbedding, 0};
  auto payload = call(BackendKind::kEmbedder, req);
  EmbeddingVector v;
  for (const auto& x : payload["values"]) {
    const double d = x.get<double>();
    if (!std::isfinite(d)) throw SchemaViolation("embedding contains a non-finite value", 1);
    v.values.push_back(d);
  }
  return v;
}

GatewayStats ModelGateway::stats() const {
  return {requests_.load(), backend_calls_.load(), cache_hits_.load(), retries_.load(),
          backend_->network_calls()};
}

}  // namespace classmind
