#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "classmind/model.hpp"

// Line formats shared by the prompt builders and the mock reasoner that
// parses them back. Timestamped lines look like
//   [240.000-360.000] TEACHER: Let's look at the next slide.
// and "key | value" records separate fields with " | ".
namespace classmind::prompts {

inline constexpr std::string_view kInstructions = "instructions";
inline constexpr std::string_view kRubric = "rubric";
inline constexpr std::string_view kContext = "context";
inline constexpr std::string_view kWindows = "windows";
inline constexpr std::string_view kTimeline = "timeline";
inline constexpr std::string_view kDimension = "dimension";
inline constexpr std::string_view kIndicators = "indicators";
inline constexpr std::string_view kLevels = "levels";
inline constexpr std::string_view kHotspot = "hotspot";
inline constexpr std::string_view kPolarity = "polarity";
inline constexpr std::string_view kExcerpt = "excerpt";
inline constexpr std::string_view kGuidelines = "guidelines";
inline constexpr std::string_view kEvidence = "evidence";
inline constexpr std::string_view kContent = "content";
inline constexpr std::string_view kObserved = "observed_behaviors";
inline constexpr std::string_view kAdvice = "actionable_advice";
inline constexpr std::string_view kTaxonomy = "taxonomy";
inline constexpr std::string_view kSentences = "sentences";
inline constexpr std::string_view kCaptions = "captions";
inline constexpr std::string_view kQuestion = "question";
inline constexpr std::string_view kQuery = "query";
inline constexpr std::string_view kCandidates = "candidates";
inline constexpr std::string_view kFeedback = "feedback";
inline constexpr std::string_view kLessonId = "lesson_id";
inline constexpr std::string_view kInterval = "interval";
inline constexpr std::string_view kHint = "hint";
inline constexpr std::string_view kText = "text";

std::string stamp(const TimeInterval& interval);
std::string line(const TimeInterval& interval, std::string_view source, std::string_view text);

struct ParsedLine {
  TimeInterval interval;
  std::string source;
  std::string text;
};

std::optional<TimeInterval> parse_stamp(std::string_view s);
std::optional<ParsedLine> parse_line(std::string_view line);
std::vector<ParsedLine> parse_lines(std::string_view block);
std::vector<std::string> split_lines(std::string_view block);
std::vector<std::string> split_fields(std::string_view record);  // on " | "

std::string caption_source(std::size_t window_index);  // "CAPTION#3"
std::optional<std::size_t> caption_source_index(std::string_view source);

}  // namespace classmind::prompts
