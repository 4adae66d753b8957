#pragma once

#include <array>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "classmind/gateway.hpp"
#include "classmind/model.hpp"

namespace classmind::annotations {

enum class Actor { kTeacher, kStudent };
std::string_view to_string(Actor a);
Actor parse_actor(std::string_view s);

struct TaxonomyCode {
  std::string code;
  Actor actor = Actor::kTeacher;
  std::string description;
};

struct Taxonomy {
  std::string taxonomy_id;
  std::vector<TaxonomyCode> codes;

  const TaxonomyCode* find(std::string_view code) const;
};

// Non-empty, unique codes, and each code's prefix (TEACHER_/STUDENT_) agrees
// with its actor.
void validate_taxonomy(const Taxonomy& taxonomy);
Taxonomy default_taxonomy();
// {taxonomy_id, codes: [{code, actor, description}]}
Taxonomy taxonomy_from_json(const nlohmann::json& doc);
Taxonomy load_taxonomy(const std::filesystem::path& path);

struct ActivitySpan {
  TimeInterval interval;
  Actor actor = Actor::kTeacher;
  std::set<std::string> labels;

  friend bool operator==(const ActivitySpan&, const ActivitySpan&) = default;
};

struct QuestionCandidate {
  std::string text;
  TimeInterval interval;

  friend bool operator==(const QuestionCandidate&, const QuestionCandidate&) = default;
};

struct BloomResult {
  BloomLevel level = BloomLevel::kRemember;
  std::string justification;
};

struct QuestionRecord {
  std::string text;
  TimeInterval interval;
  BloomLevel bloom = BloomLevel::kRemember;
  std::string justification;

  friend bool operator==(const QuestionRecord&, const QuestionRecord&) = default;
};

struct OutlineSection {
  TimeInterval interval;
  std::string heading;
  std::string summary;

  friend bool operator==(const OutlineSection&, const OutlineSection&) = default;
};

using BloomHistogram = std::array<std::size_t, 6>;  // index = level - 1

struct AnnotationSet {
  std::string lesson_id;
  std::string taxonomy_id;
  std::vector<ActivitySpan> activities;
  std::vector<QuestionRecord> questions;
  BloomHistogram histogram{};
  std::vector<OutlineSection> outline;
};

struct SentenceSpan {
  std::string text;
  TimeInterval interval;
};

// Sentences of a turn with sub-intervals. Word timestamps are used when they
// line up one-to-one with the whitespace tokens of the text, otherwise every
// sentence gets the whole turn interval.
std::vector<SentenceSpan> sentence_spans(const TranscriptTurn& turn);

struct LabelRecord {
  TimeInterval interval;
  std::string code;
};

// Per-actor sweep: elementary segments take the union of covering codes and
// touching segments with equal label sets are coalesced.
std::vector<ActivitySpan> merge_activity_records(const std::vector<LabelRecord>& records,
                                                 const Taxonomy& taxonomy);

std::vector<ActivitySpan> annotate_activities(const LessonTimeline& timeline, const Taxonomy& taxonomy,
                                              ModelGateway& gateway);

std::vector<QuestionCandidate> extract_questions(const LessonTimeline& timeline);

BloomResult classify_bloom(const std::string& question, ModelGateway& gateway);

std::vector<QuestionRecord> classify_questions(const std::vector<QuestionCandidate>& questions,
                                               ModelGateway& gateway, int parallelism = 4);

BloomHistogram question_distribution(const std::vector<QuestionRecord>& records);

std::vector<OutlineSection> generate_outline(const LessonTimeline& timeline, ModelGateway& gateway);

AnnotationSet annotate(const LessonTimeline& timeline, const Taxonomy& taxonomy, ModelGateway& gateway,
                       int parallelism = 4);

nlohmann::json annotations_to_json(const AnnotationSet& set);
AnnotationSet annotations_from_json(const nlohmann::json& doc);

inline constexpr const char* kAnnotationsArtifact = "annotations.json";

}  // namespace classmind::annotations
