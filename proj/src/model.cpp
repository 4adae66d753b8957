#include "classmind/model.hpp"

#include <algorithm>
#include <set>

#include "classmind/error.hpp"

namespace classmind {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kRange: return "RangeError";
    case ErrorCode::kOverlap: return "OverlapError";
    case ErrorCode::kParse: return "ParseError";
    case ErrorCode::kSchemaViolation: return "SchemaViolation";
    case ErrorCode::kBackendUnavailable: return "BackendUnavailable";
    case ErrorCode::kWindowTooLong: return "WindowTooLong";
    case ErrorCode::kPrecondition: return "PreconditionError";
    case ErrorCode::kUnknownCode: return "UnknownCode";
    case ErrorCode::kDependencyMissing: return "DependencyMissing";
    case ErrorCode::kLessonNotFound: return "LessonNotFound";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kHashMismatch: return "HashMismatch";
    case ErrorCode::kEmptyTimestamps: return "EmptyTimestamps";
    case ErrorCode::kEmptyUnion: return "EmptyUnion";
    case ErrorCode::kConfig: return "ConfigError";
    case ErrorCode::kIllegalTransition: return "IllegalTransition";
  }
  return "Error";
}

std::string_view to_string(SpeakerRole role) {
  switch (role) {
    case SpeakerRole::kTeacher: return "TEACHER";
    case SpeakerRole::kStudent: return "STUDENT";
    case SpeakerRole::kUnknown: return "UNKNOWN";
  }
  return "UNKNOWN";
}

SpeakerRole parse_speaker_role(std::string_view text) {
  if (text == "TEACHER") return SpeakerRole::kTeacher;
  if (text == "STUDENT") return SpeakerRole::kStudent;
  if (text == "UNKNOWN") return SpeakerRole::kUnknown;
  fail(ErrorCode::kParse, "unknown speaker role '" + std::string(text) + "'");
}

std::string_view to_string(ContextKind kind) {
  switch (kind) {
    case ContextKind::kLessonPlan: return "LESSON_PLAN";
    case ContextKind::kSlides: return "SLIDES";
    case ContextKind::kNotes: return "NOTES";
    case ContextKind::kOther: return "OTHER";
  }
  return "OTHER";
}

ContextKind parse_context_kind(std::string_view text) {
  if (text == "LESSON_PLAN") return ContextKind::kLessonPlan;
  if (text == "SLIDES") return ContextKind::kSlides;
  if (text == "NOTES") return ContextKind::kNotes;
  if (text == "OTHER") return ContextKind::kOther;
  fail(ErrorCode::kParse, "unknown context document kind '" + std::string(text) + "'");
}

void validate_turn(const TranscriptTurn& turn) {
  if (turn.text.empty()) fail(ErrorCode::kPrecondition, "turn text must be non-empty");
  MediaTime previous = turn.interval.start();
  for (const auto& w : turn.words) {
    if (w.time < turn.interval.start() || w.time > turn.interval.end()) {
      fail(ErrorCode::kRange, "word '" + w.token + "' at " + w.time.to_string() +
                                  " lies outside turn " + turn.interval.to_string());
    }
    if (w.time < previous) {
      fail(ErrorCode::kRange, "word timestamps must be non-decreasing at '" + w.token + "'");
    }
    previous = w.time;
  }
}

LessonTimeline::LessonTimeline(std::string lesson_id, MediaTime duration,
                               std::vector<TranscriptTurn> turns,
                               std::vector<CaptionSegment> captions,
                               std::vector<ContextDocument> context_docs)
    : lesson_id_(std::move(lesson_id)),
      duration_(duration),
      turns_(std::move(turns)),
      captions_(std::move(captions)),
      context_docs_(std::move(context_docs)) {}

std::vector<TimelineEntry> LessonTimeline::merged_view() const {
  std::vector<TimelineEntry> out;
  out.reserve(turns_.size() + captions_.size());
  for (std::size_t i = 0; i < captions_.size(); ++i) {
    out.push_back({TimelineEntry::Kind::kCaption, captions_[i].interval, std::nullopt, i,
                   captions_[i].caption});
  }
  for (std::size_t i = 0; i < turns_.size(); ++i) {
    out.push_back({TimelineEntry::Kind::kTurn, turns_[i].interval, turns_[i].speaker, i,
                   turns_[i].text});
  }
  std::stable_sort(out.begin(), out.end(), [](const TimelineEntry& a, const TimelineEntry& b) {
    if (a.interval.start() != b.interval.start()) return a.interval.start() < b.interval.start();
    return a.kind == TimelineEntry::Kind::kCaption && b.kind == TimelineEntry::Kind::kTurn;
  });
  return out;
}

std::size_t LessonTimeline::window_index_at(MediaTime t) const {
  require(!captions_.empty(), "timeline has no caption windows");
  for (std::size_t i = 0; i < captions_.size(); ++i) {
    if (captions_[i].interval.contains(t)) return i;
  }
  if (t == duration_) return captions_.size() - 1;
  fail(ErrorCode::kRange, "time " + t.to_string() + " is outside the lesson");
}

LessonTimeline fuse_timeline(std::string lesson_id, std::vector<TranscriptTurn> turns,
                             std::vector<CaptionSegment> captions, MediaTime duration,
                             std::vector<ContextDocument> context_docs) {
  if (duration.ms() <= 0) fail(ErrorCode::kRange, "lesson duration must be > 0");
  const MediaTime zero;
  for (const auto& turn : turns) {
    validate_turn(turn);
    if (!turn.interval.within(zero, duration)) {
      fail(ErrorCode::kRange, "turn " + turn.interval.to_string() + " lies outside [0, " +
                                  duration.to_string() + "]");
    }
  }
  std::stable_sort(turns.begin(), turns.end(), [](const TranscriptTurn& a, const TranscriptTurn& b) {
    return a.interval.start() < b.interval.start();
  });

  std::stable_sort(captions.begin(), captions.end(),
                   [](const CaptionSegment& a, const CaptionSegment& b) {
                     return a.interval.start() < b.interval.start();
                   });
  MediaTime cursor = zero;
  for (std::size_t i = 0; i < captions.size(); ++i) {
    const auto& c = captions[i];
    if (c.caption.empty()) fail(ErrorCode::kPrecondition, "caption text must be non-empty");
    if (!c.interval.within(zero, duration)) {
      fail(ErrorCode::kRange, "caption " + c.interval.to_string() + " lies outside [0, " +
                                  duration.to_string() + "]");
    }
    if (c.interval.start() != cursor) {
      const bool gap = c.interval.start() > cursor;
      fail(ErrorCode::kOverlap, std::string(gap ? "gap" : "overlap") + " in captions at " +
                                    (gap ? cursor : c.interval.start()).to_string() + "-" +
                                    (gap ? c.interval.start() : cursor).to_string());
    }
    if (c.segment_index != i) {
      fail(ErrorCode::kOverlap, "caption segment_index " + std::to_string(c.segment_index) +
                                    " out of sequence (expected " + std::to_string(i) + ")");
    }
    cursor = c.interval.end();
  }
  if (cursor != duration) {
    fail(ErrorCode::kOverlap, "captions end at " + cursor.to_string() + " but lesson runs to " +
                                  duration.to_string());
  }
  for (const auto& doc : context_docs) {
    if (doc.text.empty()) fail(ErrorCode::kPrecondition, "context document text must be non-empty");
  }
  return LessonTimeline(std::move(lesson_id), duration, std::move(turns), std::move(captions),
                        std::move(context_docs));
}

const RubricDimension* Rubric::find(std::string_view dimension_id) const {
  for (const auto& d : dimensions) {
    if (d.dimension_id == dimension_id) return &d;
  }
  return nullptr;
}

void validate_rubric(const Rubric& rubric) {
  if (rubric.dimensions.empty()) fail(ErrorCode::kPrecondition, "rubric needs at least one dimension");
  std::set<std::string> ids;
  for (const auto& d : rubric.dimensions) {
    if (d.dimension_id.empty()) fail(ErrorCode::kPrecondition, "rubric dimension id is empty");
    if (!ids.insert(d.dimension_id).second) {
      fail(ErrorCode::kPrecondition, "duplicate rubric dimension '" + d.dimension_id + "'");
    }
    if (d.title.empty()) fail(ErrorCode::kPrecondition, "dimension " + d.dimension_id + " has no title");
    if (d.levels.size() < 2) {
      fail(ErrorCode::kPrecondition, "dimension " + d.dimension_id + " needs at least 2 levels");
    }
    std::set<std::string> labels;
    for (const auto& level : d.levels) {
      if (level.criteria.empty()) {
        fail(ErrorCode::kPrecondition, "level '" + level.label + "' of " + d.dimension_id +
                                           " has empty criteria");
      }
      if (!labels.insert(level.label).second) {
        fail(ErrorCode::kPrecondition, "duplicate level label '" + level.label + "' in " +
                                           d.dimension_id);
      }
    }
  }
}

BloomLevel bloom_from_ordinal(int value) {
  if (value < 1 || value > 6) fail(ErrorCode::kRange, "Bloom level must be 1..6, got " + std::to_string(value));
  return static_cast<BloomLevel>(value);
}

std::string_view to_string(BloomLevel level) {
  switch (level) {
    case BloomLevel::kRemember: return "Remember";
    case BloomLevel::kUnderstand: return "Understand";
    case BloomLevel::kApply: return "Apply";
    case BloomLevel::kAnalyze: return "Analyze";
    case BloomLevel::kEvaluate: return "Evaluate";
    case BloomLevel::kCreate: return "Create";
  }
  return "Remember";
}

}  // namespace classmind
