#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "classmind/gateway.hpp"
#include "classmind/model.hpp"

namespace classmind::ingestion {

struct WindowingPolicy {
  double window_seconds = 120.0;
  double min_tail_seconds = 30.0;

  std::int64_t window_ms() const;
  std::int64_t min_tail_ms() const;
  void validate() const;
};

// Tiles [0, duration) with fixed windows. A tail shorter than min_tail is
// folded into the previous window.
std::vector<TimeInterval> plan_windows(MediaTime duration, const WindowingPolicy& policy = {});

struct CaptionOptions {
  // Pass a digest of the previous window's speech as the caption hint.
  bool context_carry = true;
  std::size_t hint_max_bytes = 300;
};

// One caption per window, in window order. Fails as a whole if any window
// fails after the gateway's retries.
std::vector<CaptionSegment> caption_all(const std::string& lesson_id,
                                        const std::vector<TimeInterval>& windows,
                                        ModelGateway& gateway,
                                        const std::vector<TranscriptTurn>& turns = {},
                                        const CaptionOptions& options = {});

// Maps diarizer labels to roles. Lookups are case-insensitive; unmapped
// labels become UNKNOWN.
class SpeakerMap {
 public:
  static SpeakerMap defaults();
  void set(std::string_view label, SpeakerRole role);
  SpeakerRole normalize(std::string_view label) const;

 private:
  std::map<std::string, SpeakerRole> map_;
};

// JSON Lines, one turn per line: {start_ms, end_ms, speaker, text, words?}
// where words is [{token, time_ms}]. Blank lines are skipped.
std::vector<TranscriptTurn> parse_transcript(std::string_view jsonl, const SpeakerMap& speakers,
                                             const std::string& source_name = "transcript");
std::vector<TranscriptTurn> load_transcript(const std::filesystem::path& path,
                                            const SpeakerMap& speakers = SpeakerMap::defaults());

// Kind is inferred from the file name (plan, slide, note).
ContextDocument load_context_document(const std::filesystem::path& path);

LessonTimeline ingest(const std::string& lesson_id, MediaTime duration,
                      std::vector<TranscriptTurn> turns, std::vector<ContextDocument> context_docs,
                      const WindowingPolicy& policy, ModelGateway& gateway,
                      const CaptionOptions& options = {});

}  // namespace classmind::ingestion
