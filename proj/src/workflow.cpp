#include "classmind/workflow.hpp"

#include <cstdlib>
#include <ctime>

#include <spdlog/spdlog.h>

#include "classmind/failpoint.hpp"
#include "classmind/hashing.hpp"
#include "classmind/json_io.hpp"
#include "classmind/schema.hpp"
#include "classmind/text.hpp"

namespace classmind::workflow {

using Json = nlohmann::json;

void require_artifact(const ArtifactStore& store, const std::string& lesson_id, const std::string& artifact,
                      const std::string& producer) {
  if (!store.has_lesson(lesson_id)) fail(ErrorCode::kLessonNotFound, "lesson '" + lesson_id + "' not found");
  if (!store.has_artifact(lesson_id, artifact)) {
    fail(ErrorCode::kDependencyMissing,
         "lesson '" + lesson_id + "' has no " + artifact + "; run " + producer + " first");
  }
}

LessonTimeline load_timeline(const ArtifactStore& store, const std::string& lesson_id) {
  require_artifact(store, lesson_id, kTimelineArtifact, "ingest");
  return json_io::timeline_from_json(json_io::parse(store.get_artifact(lesson_id, kTimelineArtifact), kTimelineArtifact));
}

ava::FeedbackReport load_feedback(const ArtifactStore& store, const std::string& lesson_id) {
  require_artifact(store, lesson_id, ava::kFeedbackArtifact, "analyze");
  return ava::report_from_json(json_io::parse(store.get_artifact(lesson_id, ava::kFeedbackArtifact), "feedback.json"));
}

void store_artifact(ArtifactStore& store, const std::string& lesson_id, const std::string& name,
                    const std::string& schema_id, const Json& doc) {
  const auto bytes = json_io::dump_artifact(doc);
  const auto errors = SchemaRegistry::builtin().validate(schema_id, json_io::parse(bytes, name));
  if (!errors.empty()) {
    fail(ErrorCode::kSchemaViolation, name + " does not match " + schema_id + ": " + text::join(errors, "; "));
  }
  store.put_artifact(lesson_id, name, bytes);
}

std::string generation_time() {
  if (const char* s = std::getenv("SOURCE_DATE_EPOCH"); s && *s) {
    char* end = nullptr;
    const auto v = std::strtoll(s, &end, 10);
    if (end && *end == '\0' && v >= 0) {
      const auto t = static_cast<std::time_t>(v);
      std::tm tm{};
      gmtime_r(&t, &tm);
      char buf[32];
      std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
      return buf;
    }
    spdlog::warn("ignoring malformed SOURCE_DATE_EPOCH '{}'", s);
  }
  return utc_now_iso8601();
}

LessonTimeline run_ingest(Context& ctx, const IngestRequest& req) {
  auto& store = ctx.store;
  LessonRecord record;
  if (store.has_lesson(req.lesson_id)) {
    record = req.duration ? store.ensure_lesson(req.lesson_id, *req.duration) : store.lesson(req.lesson_id);
  } else {
    if (!req.duration) fail(ErrorCode::kPrecondition, "a new lesson needs a duration");
    record = store.create_lesson(req.lesson_id, req.title, *req.duration);
  }
  std::string transcript;
  if (req.transcript_jsonl) {
    transcript = *req.transcript_jsonl;
    // Parse before storing so a bad upload never replaces a good one.
    ingestion::parse_transcript(transcript, ingestion::SpeakerMap::defaults(), kTranscriptArtifact);
    store.put_artifact(req.lesson_id, kTranscriptArtifact, transcript);
  } else {
    require_artifact(store, req.lesson_id, kTranscriptArtifact, "a transcript upload");
    transcript = store.get_artifact(req.lesson_id, kTranscriptArtifact);
  }
  auto turns = ingestion::parse_transcript(transcript, ingestion::SpeakerMap::defaults(), kTranscriptArtifact);
  ingestion::WindowingPolicy policy;
  policy.window_seconds = req.window_seconds;
  auto timeline = ingestion::ingest(req.lesson_id, record.duration, std::move(turns), req.context_docs, policy,
                                    ctx.gateway);
  failpoint::hit("ingest:before_write");
  store_artifact(store, req.lesson_id, kTimelineArtifact, "artifact.timeline.v1", json_io::timeline_to_json(timeline));
  return timeline;
}

namespace {

// Stage checkpoints stored as lesson artifacts. Unreadable or mismatching
// checkpoints are treated as absent.
class StoreCheckpoints : public ava::CheckpointSink {
 public:
  StoreCheckpoints(ArtifactStore& store, std::string lesson_id) : store_(store), lesson_id_(std::move(lesson_id)) {}

  std::optional<Json> load(const std::string& name) override {
    if (!store_.has_artifact(lesson_id_, name)) return std::nullopt;
    try {
      return json_io::parse(store_.get_artifact(lesson_id_, name), name);
    } catch (const Error& e) {
      spdlog::warn("ignoring checkpoint {}: {}", name, e.what());
      return std::nullopt;
    }
  }

  void save(const std::string& name, const Json& doc) override {
    const auto schema = name == ava::kHotspotsArtifact ? "artifact.hotspots.v1" : "artifact.feedback_draft.v1";
    store_artifact(store_, lesson_id_, name, schema, doc);
  }

 private:
  ArtifactStore& store_;
  std::string lesson_id_;
};

}  // namespace

ava::FeedbackReport run_analyze(Context& ctx, const AnalyzeRequest& req) {
  validate_rubric(req.rubric);
  require_artifact(ctx.store, req.lesson_id, kTimelineArtifact, "ingest");
  const auto timeline_bytes = ctx.store.get_artifact(req.lesson_id, kTimelineArtifact);
  const auto timeline = json_io::timeline_from_json(json_io::parse(timeline_bytes, kTimelineArtifact));
  const auto rubric_doc = json_io::rubric_to_json(req.rubric);
  const Json policy{{"max_per_dimension", req.policy.max_per_dimension},
                    {"max_total", req.policy.max_total},
                    {"refine", req.policy.refine}};
  const auto fingerprint = sha256_hex(timeline_bytes + "\n" + rubric_doc.dump() + "\n" + policy.dump() + "\n" +
                                      ctx.gateway.backend_fingerprint());

  // A rerun over identical inputs keeps the original timestamp so the
  // artifact bytes stay stable.
  std::string generated_at;
  if (std::getenv("SOURCE_DATE_EPOCH") == nullptr && ctx.store.has_artifact(req.lesson_id, ava::kFeedbackArtifact)) {
    try {
      const auto prev = json_io::parse(ctx.store.get_artifact(req.lesson_id, ava::kFeedbackArtifact), "feedback.json");
      if (prev.value("inputs_fingerprint", "") == fingerprint) generated_at = prev.value("generated_at", "");
    } catch (const Error& e) {
      spdlog::warn("previous feedback.json unreadable: {}", e.what());
    }
  }
  if (generated_at.empty()) generated_at = generation_time();

  store_artifact(ctx.store, req.lesson_id, kRubricArtifact, "artifact.rubric.v1", rubric_doc);
  StoreCheckpoints checkpoints(ctx.store, req.lesson_id);
  const ava::PipelineInputs inputs{timeline, req.rubric, fingerprint, generated_at};
  auto report = ava::run_pipeline(inputs, ctx.gateway, req.policy, &checkpoints, ctx.parallelism);
  failpoint::hit("analyze:before_write");
  store_artifact(ctx.store, req.lesson_id, ava::kFeedbackArtifact, "artifact.feedback.v1", ava::report_to_json(report));
  return report;
}

annotations::AnnotationSet run_annotate(Context& ctx, const std::string& lesson_id,
                                        const annotations::Taxonomy& taxonomy) {
  const auto timeline = load_timeline(ctx.store, lesson_id);
  auto set = annotations::annotate(timeline, taxonomy, ctx.gateway, ctx.parallelism);
  failpoint::hit("annotate:before_write");
  store_artifact(ctx.store, lesson_id, annotations::kAnnotationsArtifact, "artifact.annotations.v1",
                 annotations::annotations_to_json(set));
  return set;
}

std::vector<recommendation::Recommendation> run_recommend(Context& ctx, const std::string& lesson_id,
                                                          const recommendation::ClipIndex& index,
                                                          const recommendation::RecommendOptions& options) {
  const auto report = load_feedback(ctx.store, lesson_id);
  auto opts = options;
  opts.parallelism = ctx.parallelism;
  auto recs = recommendation::recommend(report, index, ctx.gateway, opts);
  store_artifact(ctx.store, lesson_id, recommendation::kRecommendationsArtifact, "artifact.recommendations.v1",
                 recommendation::recommendations_to_json(lesson_id, index, recs));
  return recs;
}

metrics::EvaluationReport run_evaluate(Context& ctx, const std::string& lesson_id,
                                       const metrics::EvaluationOptions& options) {
  const auto timeline = load_timeline(ctx.store, lesson_id);
  const auto report = load_feedback(ctx.store, lesson_id);
  std::optional<annotations::AnnotationSet> ann;
  if (ctx.store.has_artifact(lesson_id, annotations::kAnnotationsArtifact)) {
    ann = annotations::annotations_from_json(
        json_io::parse(ctx.store.get_artifact(lesson_id, annotations::kAnnotationsArtifact), "annotations.json"));
  } else if (options.gold_questions || options.gold_activities) {
    fail(ErrorCode::kDependencyMissing, "lesson '" + lesson_id + "' has no annotations.json; run annotate first");
  }
  auto eval = metrics::evaluate_lesson(report, timeline, ann ? &*ann : nullptr, options);
  store_artifact(ctx.store, lesson_id, metrics::kEvaluationArtifact, "artifact.evaluation.v1",
                 metrics::evaluation_to_json(eval));
  return eval;
}

}  // namespace classmind::workflow
