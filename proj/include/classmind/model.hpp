#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "classmind/time.hpp"

namespace classmind {

enum class SpeakerRole { kTeacher, kStudent, kUnknown };

std::string_view to_string(SpeakerRole role);
SpeakerRole parse_speaker_role(std::string_view text);  // exact enum names only

struct WordStamp {
  std::string token;
  MediaTime time;

  friend bool operator==(const WordStamp&, const WordStamp&) = default;
};

struct TranscriptTurn {
  TimeInterval interval;
  SpeakerRole speaker = SpeakerRole::kUnknown;
  std::string text;
  std::vector<WordStamp> words;  // empty when the transcriber gave none

  friend bool operator==(const TranscriptTurn&, const TranscriptTurn&) = default;
};

struct CaptionSegment {
  TimeInterval interval;
  std::string caption;
  std::size_t segment_index = 0;

  friend bool operator==(const CaptionSegment&, const CaptionSegment&) = default;
};

enum class ContextKind { kLessonPlan, kSlides, kNotes, kOther };

std::string_view to_string(ContextKind kind);
ContextKind parse_context_kind(std::string_view text);

struct ContextDocument {
  ContextKind kind = ContextKind::kOther;
  std::string title;
  std::string text;

  friend bool operator==(const ContextDocument&, const ContextDocument&) = default;
};

// One row of the temporally merged view over captions and turns.
struct TimelineEntry {
  enum class Kind { kCaption, kTurn };
  Kind kind;
  TimeInterval interval;
  std::optional<SpeakerRole> speaker;  // set for turns
  std::size_t source_index;            // index into captions or turns
  std::string_view text;
};

class LessonTimeline {
 public:
  LessonTimeline(std::string lesson_id, MediaTime duration, std::vector<TranscriptTurn> turns,
                 std::vector<CaptionSegment> captions, std::vector<ContextDocument> context_docs);

  const std::string& lesson_id() const { return lesson_id_; }
  MediaTime duration() const { return duration_; }
  const std::vector<TranscriptTurn>& turns() const { return turns_; }
  const std::vector<CaptionSegment>& captions() const { return captions_; }
  const std::vector<ContextDocument>& context_docs() const { return context_docs_; }

  // Captions and turns merged by start time; captions sort before turns that
  // start at the same instant.
  std::vector<TimelineEntry> merged_view() const;

  // Index of the caption window containing t (t == duration maps to the last).
  std::size_t window_index_at(MediaTime t) const;

  friend bool operator==(const LessonTimeline&, const LessonTimeline&) = default;

 private:
  std::string lesson_id_;
  MediaTime duration_;
  std::vector<TranscriptTurn> turns_;
  std::vector<CaptionSegment> captions_;
  std::vector<ContextDocument> context_docs_;
};

// Validates inputs and builds a timeline. Turns are stably sorted by start.
// Throws kOverlap when captions do not tile [0, duration), kRange when any
// interval leaves [0, duration].
LessonTimeline fuse_timeline(std::string lesson_id, std::vector<TranscriptTurn> turns,
                             std::vector<CaptionSegment> captions, MediaTime duration,
                             std::vector<ContextDocument> context_docs = {});

void validate_turn(const TranscriptTurn& turn);

// ---- rubric ----------------------------------------------------------------

struct PerformanceLevel {
  std::string label;
  std::string criteria;
  std::vector<std::string> examples;
};

struct RubricDimension {
  std::string dimension_id;
  std::string title;
  std::vector<std::string> elements;
  std::vector<std::string> indicators;
  std::vector<PerformanceLevel> levels;  // worst -> best
};

struct Rubric {
  std::string rubric_id;
  std::string name;
  std::vector<RubricDimension> dimensions;

  const RubricDimension* find(std::string_view dimension_id) const;
};

void validate_rubric(const Rubric& rubric);

// ---- Bloom -------------------------------------------------------------------

enum class BloomLevel {
  kRemember = 1,
  kUnderstand = 2,
  kApply = 3,
  kAnalyze = 4,
  kEvaluate = 5,
  kCreate = 6,
};

inline constexpr std::array<BloomLevel, 6> kBloomLevels = {
    BloomLevel::kRemember, BloomLevel::kUnderstand, BloomLevel::kApply,
    BloomLevel::kAnalyze,  BloomLevel::kEvaluate,   BloomLevel::kCreate};

constexpr int ordinal(BloomLevel level) { return static_cast<int>(level); }
BloomLevel bloom_from_ordinal(int ordinal);
std::string_view to_string(BloomLevel level);  // "Remember" ... "Create"

}  // namespace classmind
