#include "classmind/ingestion.hpp"

#include <algorithm>
#include <cmath>

#include "classmind/error.hpp"
#include "classmind/json_io.hpp"
#include "classmind/parallel.hpp"
#include "classmind/text.hpp"

namespace classmind::ingestion {

using Json = nlohmann::json;

std::int64_t WindowingPolicy::window_ms() const { return std::llround(window_seconds * 1000.0); }
std::int64_t WindowingPolicy::min_tail_ms() const { return std::llround(min_tail_seconds * 1000.0); }

void WindowingPolicy::validate() const {
  if (!std::isfinite(window_seconds) || window_ms() <= 0) {
    fail(ErrorCode::kRange, "window_seconds must be positive");
  }
  if (!std::isfinite(min_tail_seconds) || min_tail_ms() <= 0) {
    fail(ErrorCode::kRange, "min_tail_seconds must be positive");
  }
  if (min_tail_ms() >= window_ms()) fail(ErrorCode::kRange, "min_tail_seconds must be < window_seconds");
}

std::vector<TimeInterval> plan_windows(MediaTime duration, const WindowingPolicy& policy) {
  policy.validate();
  if (duration.ms() <= 0) fail(ErrorCode::kRange, "duration must be > 0");
  const auto d = duration.ms();
  const auto w = policy.window_ms();
  std::vector<TimeInterval> out;
  std::int64_t start = 0;
  while (d - start > w) {
    const auto rest = d - start - w;
    if (rest < policy.min_tail_ms()) break;  // fold the short tail into this window
    out.push_back(TimeInterval::from_ms(start, start + w));
    start += w;
  }
  out.push_back(TimeInterval::from_ms(start, d));
  return out;
}

namespace {

std::string speech_digest(const std::vector<TranscriptTurn>& turns, const TimeInterval& window,
                          std::size_t max_bytes) {
  std::vector<std::string> parts;
  for (const auto& t : turns) {
    if (t.interval.overlaps(window)) parts.push_back(std::string(to_string(t.speaker)) + ": " + t.text);
  }
  return text::abbreviate(text::join(parts, " "), max_bytes);
}

}  // namespace

std::vector<CaptionSegment> caption_all(const std::string& lesson_id,
                                        const std::vector<TimeInterval>& windows,
                                        ModelGateway& gateway,
                                        const std::vector<TranscriptTurn>& turns,
                                        const CaptionOptions& options) {
  std::vector<CaptionSegment> out(windows.size(), CaptionSegment{TimeInterval::from_ms(0, 1), {}, 0});
  parallel_for(windows.size(), gateway.config().max_in_flight, [&](std::size_t i) {
    std::optional<std::string> hint;
    if (options.context_carry && i > 0) {
      auto digest = speech_digest(turns, windows[i - 1], options.hint_max_bytes);
      if (!digest.empty()) hint = "Previous segment speech: " + digest;
    }
    out[i] = CaptionSegment{windows[i], gateway.caption(lesson_id, windows[i], hint), i};
  });
  return out;
}

SpeakerMap SpeakerMap::defaults() {
  SpeakerMap m;
  for (const char* t : {"teacher", "instructor", "t", "tutor"}) m.set(t, SpeakerRole::kTeacher);
  for (const char* s : {"student", "students", "class", "learner"}) m.set(s, SpeakerRole::kStudent);
  m.set("unknown", SpeakerRole::kUnknown);
  return m;
}

void SpeakerMap::set(std::string_view label, SpeakerRole role) { map_[text::to_lower(label)] = role; }

SpeakerRole SpeakerMap::normalize(std::string_view label) const {
  const auto it = map_.find(text::to_lower(text::trim(label)));
  return it == map_.end() ? SpeakerRole::kUnknown : it->second;
}

std::vector<TranscriptTurn> parse_transcript(std::string_view jsonl, const SpeakerMap& speakers,
                                             const std::string& source_name) {
  std::vector<TranscriptTurn> turns;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    auto nl = jsonl.find('\n', pos);
    if (nl == std::string_view::npos) nl = jsonl.size();
    const auto raw = jsonl.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (text::trim(raw).empty()) continue;
    const auto where = source_name + ":" + std::to_string(line_no);
    const auto j = Json::parse(raw, nullptr, false);
    if (j.is_discarded() || !j.is_object()) fail(ErrorCode::kParse, where + ": not a JSON object");
    try {
      const auto start = json_io::get_int(j, "start_ms", where);
      const auto end = json_io::get_int(j, "end_ms", where);
      if (start < 0 || end <= start) {
        fail(ErrorCode::kParse, where + ": requires 0 <= start_ms < end_ms, got " + std::to_string(start) +
                                    ".." + std::to_string(end));
      }
      TranscriptTurn turn{TimeInterval::from_ms(start, end),
                          speakers.normalize(json_io::get_string(j, "speaker", where)),
                          json_io::get_string(j, "text", where),
                          {}};
      if (text::trim(turn.text).empty()) fail(ErrorCode::kParse, where + ".text: must be non-empty");
      if (j.contains("words")) {
        const auto& words = j["words"];
        if (!words.is_array()) fail(ErrorCode::kParse, where + ".words: expected an array");
        for (std::size_t k = 0; k < words.size(); ++k) {
          const auto wp = where + ".words[" + std::to_string(k) + "]";
          const auto t = json_io::get_int(words[k], "time_ms", wp);
          if (t < 0) fail(ErrorCode::kParse, wp + ".time_ms: must be >= 0");
          turn.words.push_back({json_io::get_string(words[k], "token", wp), MediaTime::from_ms(t)});
        }
      }
      try {
        validate_turn(turn);
      } catch (const Error& e) {
        fail(ErrorCode::kParse, where + ": " + e.what());
      }
      turns.push_back(std::move(turn));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kParse) throw;
      fail(ErrorCode::kParse, where + ": " + e.what());
    }
  }
  std::stable_sort(turns.begin(), turns.end(), [](const TranscriptTurn& a, const TranscriptTurn& b) {
    return a.interval.start() < b.interval.start();
  });
  return turns;
}

std::vector<TranscriptTurn> load_transcript(const std::filesystem::path& path, const SpeakerMap& speakers) {
  return parse_transcript(json_io::read_text_file(path), speakers, path.filename().string());
}

ContextDocument load_context_document(const std::filesystem::path& path) {
  const auto name = text::to_lower(path.filename().string());
  ContextKind kind = ContextKind::kOther;
  if (name.find("plan") != std::string::npos) {
    kind = ContextKind::kLessonPlan;
  } else if (name.find("slide") != std::string::npos) {
    kind = ContextKind::kSlides;
  } else if (name.find("note") != std::string::npos) {
    kind = ContextKind::kNotes;
  }
  auto body = json_io::read_text_file(path);
  if (text::trim(body).empty()) fail(ErrorCode::kParse, path.string() + ": context document is empty");
  return {kind, path.filename().string(), std::move(body)};
}

LessonTimeline ingest(const std::string& lesson_id, MediaTime duration,
                      std::vector<TranscriptTurn> turns, std::vector<ContextDocument> context_docs,
                      const WindowingPolicy& policy, ModelGateway& gateway,
                      const CaptionOptions& options) {
  const auto windows = plan_windows(duration, policy);
  auto captions = caption_all(lesson_id, windows, gateway, turns, options);
  return fuse_timeline(lesson_id, std::move(turns), std::move(captions), duration, std::move(context_docs));
}

}  // namespace classmind::ingestion
