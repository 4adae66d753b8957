#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "classmind/annotations.hpp"
#include "classmind/ava_align.hpp"
#include "classmind/gateway.hpp"
#include "classmind/ingestion.hpp"
#include "classmind/metrics.hpp"
#include "classmind/recommendation.hpp"
#include "classmind/store.hpp"

// Stage runners shared by the CLI and the job service. Each reads its inputs
// from the lesson store and writes its artifact back through it.
namespace classmind::workflow {

struct Context {
  ArtifactStore& store;
  ModelGateway& gateway;
  int parallelism = 4;
};

inline constexpr const char* kTimelineArtifact = "timeline.json";
inline constexpr const char* kTranscriptArtifact = "transcript.jsonl";
inline constexpr const char* kRubricArtifact = "rubric.json";

struct IngestRequest {
  std::string lesson_id;
  std::optional<MediaTime> duration;          // required when the lesson does not exist yet
  std::optional<std::string> transcript_jsonl;  // defaults to the stored transcript.jsonl
  std::vector<ContextDocument> context_docs;
  double window_seconds = 120.0;
  std::string title;
};

LessonTimeline run_ingest(Context& ctx, const IngestRequest& request);

struct AnalyzeRequest {
  std::string lesson_id;
  Rubric rubric;
  ava::PipelinePolicy policy;
};

ava::FeedbackReport run_analyze(Context& ctx, const AnalyzeRequest& request);

annotations::AnnotationSet run_annotate(Context& ctx, const std::string& lesson_id,
                                        const annotations::Taxonomy& taxonomy);

std::vector<recommendation::Recommendation> run_recommend(Context& ctx, const std::string& lesson_id,
                                                          const recommendation::ClipIndex& index,
                                                          const recommendation::RecommendOptions& options = {});

metrics::EvaluationReport run_evaluate(Context& ctx, const std::string& lesson_id,
                                       const metrics::EvaluationOptions& options = {});

// DependencyMissing unless the lesson exists and has `artifact`.
void require_artifact(const ArtifactStore& store, const std::string& lesson_id, const std::string& artifact,
                      const std::string& producer);

LessonTimeline load_timeline(const ArtifactStore& store, const std::string& lesson_id);
ava::FeedbackReport load_feedback(const ArtifactStore& store, const std::string& lesson_id);

// Validates the document against its artifact schema and stores the
// rendered bytes.
void store_artifact(ArtifactStore& store, const std::string& lesson_id, const std::string& name,
                    const std::string& schema_id, const nlohmann::json& doc);

// SOURCE_DATE_EPOCH when set, else the current UTC time.
std::string generation_time();

}  // namespace classmind::workflow
