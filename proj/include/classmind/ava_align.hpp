#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "classmind/gateway.hpp"
#include "classmind/model.hpp"

// Rubric-aligned feedback agent: hotspots -> guidelines -> draft -> refine ->
// validate -> ordered report.
namespace classmind::ava {

enum class Polarity { kStrength, kWeakness };
std::string_view to_string(Polarity p);
Polarity parse_polarity(std::string_view s);

struct Hotspot {
  TimeInterval interval = TimeInterval::from_ms(0, 1);
  std::size_t window_index = 0;
  std::string dimension_id;
  Polarity polarity = Polarity::kWeakness;
  std::string context_summary;
  std::string trigger_excerpt;

  friend bool operator==(const Hotspot&, const Hotspot&) = default;
};

struct Guideline {
  std::string text;
  std::size_t hotspot_ref = 0;

  friend bool operator==(const Guideline&, const Guideline&) = default;
};

enum class FeedbackStatus { kUnset, kValidated, kRejected };
std::string_view to_string(FeedbackStatus s);

struct FeedbackItem {
  std::string feedback_id;
  std::size_t hotspot_index = 0;
  std::string dimension_id;
  std::string dimension_title;
  TimeInterval interval = TimeInterval::from_ms(0, 1);
  Polarity polarity = Polarity::kWeakness;
  std::vector<std::string> guidelines;
  std::string content;
  std::string observed_behaviors;
  std::string actionable_advice;
  std::optional<ValidationVerdict> validation;
  FeedbackStatus status = FeedbackStatus::kUnset;

  // Text handed to the validator.
  std::string full_text() const;

  friend bool operator==(const FeedbackItem&, const FeedbackItem&) = default;
};

struct FeedbackReport {
  std::string lesson_id;
  std::string rubric_id;
  std::string inputs_fingerprint;
  std::string generated_at;
  std::vector<FeedbackItem> items;     // VALIDATED, strengths first, each by time
  std::vector<FeedbackItem> rejected;  // audit trail
};

struct PipelinePolicy {
  std::size_t max_per_dimension = 3;
  std::size_t max_total = 20;
  bool refine = true;
};

// Evidence for one interval: every caption window and turn overlapping it.
EvidenceBundle evidence_for(const LessonTimeline& timeline, const TimeInterval& interval);

std::vector<Hotspot> generate_hotspots(const LessonTimeline& timeline, const Rubric& rubric,
                                       ModelGateway& gateway, const PipelinePolicy& policy = {});

std::vector<Guideline> generate_guidelines(const Hotspot& hotspot, std::size_t hotspot_index,
                                           const RubricDimension& dimension, ModelGateway& gateway);

FeedbackItem draft_feedback(const Hotspot& hotspot, std::size_t hotspot_index,
                            const std::vector<Guideline>& guidelines, const EvidenceBundle& evidence,
                            const RubricDimension& dimension, ModelGateway& gateway);

// Refinement pass; a well-formed item is a fixed point.
FeedbackItem refine_feedback(FeedbackItem item, const RubricDimension& dimension, ModelGateway& gateway);

FeedbackItem validate_feedback(FeedbackItem item, const EvidenceBundle& evidence, ModelGateway& gateway);

// Orders items (strengths first, then weaknesses; each group by start time)
// and splits VALIDATED from REJECTED.
void assemble(FeedbackReport& report, std::vector<FeedbackItem> validated_or_rejected);

// Stage artifacts are saved and reloaded through this interface so an
// interrupted run resumes from the last completed stage.
class CheckpointSink {
 public:
  virtual ~CheckpointSink() = default;
  virtual std::optional<nlohmann::json> load(const std::string& name) = 0;
  virtual void save(const std::string& name, const nlohmann::json& doc) = 0;
};

struct PipelineInputs {
  const LessonTimeline& timeline;
  const Rubric& rubric;
  std::string inputs_fingerprint;
  std::string generated_at;
};

FeedbackReport run_pipeline(const PipelineInputs& inputs, ModelGateway& gateway,
                            const PipelinePolicy& policy = {}, CheckpointSink* checkpoints = nullptr,
                            int parallelism = 4);

// Backend-free grounding check: at least one quoted span, and every quoted
// span in observed_behaviors occurs verbatim in a caption or turn that
// overlaps the item interval.
bool is_grounded(const FeedbackItem& item, const LessonTimeline& timeline);

// ---- artifact documents ----
nlohmann::json to_json(const Hotspot& h);
Hotspot hotspot_from_json(const nlohmann::json& j, const std::string& path);
nlohmann::json to_json(const FeedbackItem& item);
FeedbackItem feedback_item_from_json(const nlohmann::json& j, const std::string& path);

nlohmann::json hotspots_document(const std::string& lesson_id, const std::string& rubric_id,
                                 const std::string& fingerprint, const std::vector<Hotspot>& hotspots);
nlohmann::json drafts_document(const std::string& lesson_id, const std::string& rubric_id,
                               const std::string& fingerprint, const std::vector<FeedbackItem>& drafts);
nlohmann::json report_to_json(const FeedbackReport& report);
FeedbackReport report_from_json(const nlohmann::json& doc);

inline constexpr const char* kHotspotsArtifact = "hotspots.json";
inline constexpr const char* kDraftArtifact = "feedback_draft.json";
inline constexpr const char* kFeedbackArtifact = "feedback.json";

}  // namespace classmind::ava
