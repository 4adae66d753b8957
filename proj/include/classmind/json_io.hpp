#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "classmind/model.hpp"

namespace classmind::json_io {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// Media times are emitted as JSON numbers with exactly three decimals
// ("start": 240.000). nlohmann cannot format numbers that way, so time values
// travel through the tree as tagged strings and dump_artifact rewrites them.
Json time_value(MediaTime t);
MediaTime read_time(const Json& value, const std::string& path);

void put_interval(Json& obj, const TimeInterval& interval);
TimeInterval read_interval(const Json& obj, const std::string& path);

// Deterministic rendering: sorted keys, two-space indent, trailing newline.
std::string dump_artifact(const Json& doc);
// Same as dump_artifact but single-line (for JSONL and HTTP bodies).
std::string dump_compact(const Json& doc);

Json parse(std::string_view text, const std::string& what);
Json read_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);

// Field accessors that throw kParse with the offending path.
const Json& field(const Json& obj, const std::string& key, const std::string& path);
std::string get_string(const Json& obj, const std::string& key, const std::string& path);
std::string get_string_or(const Json& obj, const std::string& key, std::string fallback);
std::int64_t get_int(const Json& obj, const std::string& key, const std::string& path);
std::vector<std::string> get_string_list(const Json& obj, const std::string& key,
                                         const std::string& path);
void check_schema_version(const Json& doc, const std::string& what);

Json to_json(const TranscriptTurn& turn);
TranscriptTurn turn_from_json(const Json& j, const std::string& path);
Json to_json(const CaptionSegment& caption);
CaptionSegment caption_from_json(const Json& j, const std::string& path);
Json to_json(const ContextDocument& doc);
ContextDocument context_from_json(const Json& j, const std::string& path);

Json timeline_to_json(const LessonTimeline& timeline);
LessonTimeline timeline_from_json(const Json& doc);

Json rubric_to_json(const Rubric& rubric);
Rubric rubric_from_json(const Json& doc);
Rubric load_rubric(const std::filesystem::path& path);

}  // namespace classmind::json_io
