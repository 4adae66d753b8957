#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "classmind/annotations.hpp"
#include "classmind/ava_align.hpp"
#include "classmind/model.hpp"

namespace classmind::metrics {

struct CoverageReport {
  std::size_t k = 0;
  std::vector<double> weights;  // raw per-bin mass (counts or ms)
  std::vector<double> p;
  double H = 0.0;
  double H_norm = 0.0;
};

// max(2, ceil(duration / 120 s))
std::size_t default_bins(MediaTime duration);

// Bins are [i*d/k, (i+1)*d/k), the last one closed. Bin index is computed in
// integer milliseconds as floor(t*k/d).
CoverageReport temporal_entropy(const std::vector<MediaTime>& timestamps, MediaTime duration,
                                std::optional<std::size_t> k = std::nullopt);
// Duration-weighted variant: each interval adds its overlap with every bin.
CoverageReport temporal_entropy_weighted(const std::vector<TimeInterval>& events, MediaTime duration,
                                         std::optional<std::size_t> k = std::nullopt);
// Shared tail: normalizes weights and computes H, H_norm.
CoverageReport coverage_from_weights(std::vector<double> weights);

using LabeledTimeSet = std::vector<std::pair<SpeakerRole, TimeInterval>>;

// Per-role union as sorted, disjoint intervals.
std::map<SpeakerRole, std::vector<TimeInterval>> normalize(const LabeledTimeSet& set);

double jaccard_error_rate(const LabeledTimeSet& pred, const LabeledTimeSet& gold);

struct ClassificationScores {
  std::int64_t tp = 0, fp = 0, fn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
  bool degenerate = false;  // some ratio was 0/0 and was defined as 0
};

ClassificationScores prf1(std::int64_t tp, std::int64_t fp, std::int64_t fn);

struct Counts {
  std::int64_t tp = 0, fp = 0, fn = 0;
};

struct MultiLabelScores {
  std::map<std::string, Counts> per_class;
  double micro_precision = 0.0, micro_recall = 0.0, micro_f1 = 0.0;
  bool degenerate = false;
};

MultiLabelScores micro_f1(const std::map<std::string, Counts>& per_class);

// ---- gold files ----
struct GoldQuestion {
  std::string text;
  TimeInterval interval;
};
// {questions: [{text, start_ms, end_ms}]}
std::vector<GoldQuestion> load_gold_questions(const std::filesystem::path& path);

struct GoldActivity {
  annotations::Actor actor;
  TimeInterval interval;
  std::vector<std::string> labels;
};
// {spans: [{actor, start_ms, end_ms, labels}]}
std::vector<GoldActivity> load_gold_activities(const std::filesystem::path& path);

// {segments: [{speaker, start_ms, end_ms}]}; speaker labels go through the
// default speaker map.
LabeledTimeSet load_gold_diarization(const std::filesystem::path& path);

// Greedy one-to-one matching: intervals overlap and word-token Jaccard >= 0.5.
ClassificationScores score_questions(const std::vector<annotations::QuestionRecord>& pred,
                                     const std::vector<GoldQuestion>& gold);

struct ActivityScores {
  MultiLabelScores teacher, student, overall;
};
// Frames of 1 s; a code is present in a frame when a span carrying it covers
// the frame midpoint.
ActivityScores score_activities(const std::vector<annotations::ActivitySpan>& pred,
                                const std::vector<GoldActivity>& gold, MediaTime duration);

struct EvaluationOptions {
  std::optional<std::size_t> bins;
  bool duration_weighted = false;
  std::optional<std::filesystem::path> gold_questions;
  std::optional<std::filesystem::path> gold_activities;
  std::optional<std::filesystem::path> gold_diarization;
};

struct EvaluationReport {
  std::string lesson_id;
  std::size_t item_count = 0;
  bool duration_weighted = false;
  std::optional<CoverageReport> coverage;
  std::optional<double> grounding_rate;
  std::optional<ClassificationScores> questions;
  std::optional<ActivityScores> activities;
  std::optional<double> jer;
};

EvaluationReport evaluate_lesson(const ava::FeedbackReport& report, const LessonTimeline& timeline,
                                 const annotations::AnnotationSet* annotations, const EvaluationOptions& options);

nlohmann::json evaluation_to_json(const EvaluationReport& report);
// Text table with the comparison-table columns; human-rated columns are n/a.
std::string evaluation_table(const EvaluationReport& report);

inline constexpr const char* kEvaluationArtifact = "evaluation.json";

}  // namespace classmind::metrics
