#include "classmind/json_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "classmind/error.hpp"

namespace classmind::json_io {

namespace {

constexpr std::string_view kTimeTag = "\x01t:";
// How the tag appears after nlohmann escapes the control character.
constexpr std::string_view kEscapedTimeTag = "\"\\u0001t:";

std::string render_times(std::string dumped) {
  std::string out;
  out.reserve(dumped.size());
  std::size_t pos = 0;
  while (true) {
    const auto hit = dumped.find(kEscapedTimeTag, pos);
    if (hit == std::string::npos) break;
    const auto value_start = hit + kEscapedTimeTag.size();
    const auto close = dumped.find('"', value_start);
    out.append(dumped, pos, hit - pos);
    out.append(dumped, value_start, close - value_start);
    pos = close + 1;
  }
  out.append(dumped, pos, std::string::npos);
  return out;
}

}  // namespace

Json time_value(MediaTime t) { return std::string(kTimeTag) + t.to_string(); }

MediaTime read_time(const Json& value, const std::string& path) {
  if (value.is_number()) {
    const double s = value.get<double>();
    if (!std::isfinite(s) || s < 0) fail(ErrorCode::kParse, path + ": time must be a finite number >= 0");
    return MediaTime::from_seconds(s);
  }
  if (value.is_string()) {
    auto s = value.get<std::string>();
    if (s.rfind(kTimeTag, 0) == 0) s = s.substr(kTimeTag.size());
    return MediaTime::parse(s);
  }
  fail(ErrorCode::kParse, path + ": expected a time value in seconds");
}

void put_interval(Json& obj, const TimeInterval& interval) {
  obj["start"] = time_value(interval.start());
  obj["end"] = time_value(interval.end());
}

TimeInterval read_interval(const Json& obj, const std::string& path) {
  const auto start = read_time(field(obj, "start", path), path + ".start");
  const auto end = read_time(field(obj, "end", path), path + ".end");
  if (!(start < end)) fail(ErrorCode::kParse, path + ": interval requires start < end");
  return TimeInterval(start, end);
}

std::string dump_artifact(const Json& doc) { return render_times(doc.dump(2)) + "\n"; }

std::string dump_compact(const Json& doc) { return render_times(doc.dump()); }

Json parse(std::string_view text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    fail(ErrorCode::kParse, what + ": " + e.what());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kNotFound, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json read_file(const std::filesystem::path& path) { return parse(read_text_file(path), path.string()); }

const Json& field(const Json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) fail(ErrorCode::kParse, path + ": expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) fail(ErrorCode::kParse, path + ": missing field '" + key + "'");
  return *it;
}

std::string get_string(const Json& obj, const std::string& key, const std::string& path) {
  const auto& v = field(obj, key, path);
  if (!v.is_string()) fail(ErrorCode::kParse, path + "." + key + ": expected a string");
  return v.get<std::string>();
}

std::string get_string_or(const Json& obj, const std::string& key, std::string fallback) {
  if (!obj.is_object()) return fallback;
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) return fallback;
  return it->get<std::string>();
}

std::int64_t get_int(const Json& obj, const std::string& key, const std::string& path) {
  const auto& v = field(obj, key, path);
  if (!v.is_number_integer()) fail(ErrorCode::kParse, path + "." + key + ": expected an integer");
  return v.get<std::int64_t>();
}

std::vector<std::string> get_string_list(const Json& obj, const std::string& key,
                                         const std::string& path) {
  std::vector<std::string> out;
  if (!obj.contains(key)) return out;
  const auto& v = obj.at(key);
  if (!v.is_array()) fail(ErrorCode::kParse, path + "." + key + ": expected an array");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_string()) {
      fail(ErrorCode::kParse, path + "." + key + "[" + std::to_string(i) + "]: expected a string");
    }
    out.push_back(v[i].get<std::string>());
  }
  return out;
}

void check_schema_version(const Json& doc, const std::string& what) {
  if (!doc.is_object() || !doc.contains("schema_version") ||
      doc["schema_version"] != kSchemaVersion) {
    fail(ErrorCode::kParse, what + ": unsupported or missing schema_version");
  }
}

Json to_json(const TranscriptTurn& turn) {
  Json j;
  put_interval(j, turn.interval);
  j["speaker"] = std::string(to_string(turn.speaker));
  j["text"] = turn.text;
  if (!turn.words.empty()) {
    Json words = Json::array();
    for (const auto& w : turn.words) words.push_back({{"token", w.token}, {"time", time_value(w.time)}});
    j["words"] = std::move(words);
  }
  return j;
}

TranscriptTurn turn_from_json(const Json& j, const std::string& path) {
  TranscriptTurn turn{read_interval(j, path), SpeakerRole::kUnknown, {}, {}};
  turn.speaker = parse_speaker_role(get_string(j, "speaker", path));
  turn.text = get_string(j, "text", path);
  if (j.contains("words")) {
    const auto& words = j["words"];
    if (!words.is_array()) fail(ErrorCode::kParse, path + ".words: expected an array");
    for (std::size_t i = 0; i < words.size(); ++i) {
      const auto wp = path + ".words[" + std::to_string(i) + "]";
      turn.words.push_back({get_string(words[i], "token", wp), read_time(field(words[i], "time", wp), wp)});
    }
  }
  return turn;
}

Json to_json(const CaptionSegment& caption) {
  Json j;
  put_interval(j, caption.interval);
  j["segment_index"] = caption.segment_index;
  j["caption"] = caption.caption;
  return j;
}

CaptionSegment caption_from_json(const Json& j, const std::string& path) {
  const auto index = get_int(j, "segment_index", path);
  if (index < 0) fail(ErrorCode::kParse, path + ".segment_index: must be >= 0");
  return {read_interval(j, path), get_string(j, "caption", path), static_cast<std::size_t>(index)};
}

Json to_json(const ContextDocument& doc) {
  return {{"kind", std::string(to_string(doc.kind))}, {"title", doc.title}, {"text", doc.text}};
}

ContextDocument context_from_json(const Json& j, const std::string& path) {
  return {parse_context_kind(get_string(j, "kind", path)), get_string(j, "title", path),
          get_string(j, "text", path)};
}

Json timeline_to_json(const LessonTimeline& timeline) {
  Json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["lesson_id"] = timeline.lesson_id();
  doc["duration"] = time_value(timeline.duration());
  doc["turns"] = Json::array();
  for (const auto& t : timeline.turns()) doc["turns"].push_back(to_json(t));
  doc["captions"] = Json::array();
  for (const auto& c : timeline.captions()) doc["captions"].push_back(to_json(c));
  doc["context_docs"] = Json::array();
  for (const auto& d : timeline.context_docs()) doc["context_docs"].push_back(to_json(d));
  return doc;
}

LessonTimeline timeline_from_json(const Json& doc) {
  check_schema_version(doc, "timeline");
  std::vector<TranscriptTurn> turns;
  std::vector<CaptionSegment> captions;
  std::vector<ContextDocument> docs;
  const auto& jt = field(doc, "turns", "timeline");
  for (std::size_t i = 0; i < jt.size(); ++i) turns.push_back(turn_from_json(jt[i], "turns[" + std::to_string(i) + "]"));
  const auto& jc = field(doc, "captions", "timeline");
  for (std::size_t i = 0; i < jc.size(); ++i) {
    captions.push_back(caption_from_json(jc[i], "captions[" + std::to_string(i) + "]"));
  }
  if (doc.contains("context_docs")) {
    const auto& jd = doc["context_docs"];
    for (std::size_t i = 0; i < jd.size(); ++i) {
      docs.push_back(context_from_json(jd[i], "context_docs[" + std::to_string(i) + "]"));
    }
  }
  return fuse_timeline(get_string(doc, "lesson_id", "timeline"), std::move(turns), std::move(captions),
                       read_time(field(doc, "duration", "timeline"), "timeline.duration"),
                       std::move(docs));
}

Json rubric_to_json(const Rubric& rubric) {
  Json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["rubric_id"] = rubric.rubric_id;
  doc["name"] = rubric.name;
  doc["dimensions"] = Json::array();
  for (const auto& d : rubric.dimensions) {
    Json levels = Json::array();
    for (const auto& l : d.levels) {
      levels.push_back({{"label", l.label}, {"criteria", l.criteria}, {"examples", l.examples}});
    }
    doc["dimensions"].push_back({{"dimension_id", d.dimension_id},
                                 {"title", d.title},
                                 {"elements", d.elements},
                                 {"indicators", d.indicators},
                                 {"levels", std::move(levels)}});
  }
  return doc;
}

Rubric rubric_from_json(const Json& doc) {
  check_schema_version(doc, "rubric");
  Rubric rubric;
  rubric.rubric_id = get_string(doc, "rubric_id", "rubric");
  rubric.name = get_string(doc, "name", "rubric");
  const auto& dims = field(doc, "dimensions", "rubric");
  if (!dims.is_array()) fail(ErrorCode::kParse, "rubric.dimensions: expected an array");
  for (std::size_t i = 0; i < dims.size(); ++i) {
    const auto path = "rubric.dimensions[" + std::to_string(i) + "]";
    RubricDimension d;
    d.dimension_id = get_string(dims[i], "dimension_id", path);
    d.title = get_string(dims[i], "title", path);
    d.elements = get_string_list(dims[i], "elements", path);
    d.indicators = get_string_list(dims[i], "indicators", path);
    const auto& levels = field(dims[i], "levels", path);
    if (!levels.is_array()) fail(ErrorCode::kParse, path + ".levels: expected an array");
    for (std::size_t k = 0; k < levels.size(); ++k) {
      const auto lp = path + ".levels[" + std::to_string(k) + "]";
      d.levels.push_back({get_string(levels[k], "label", lp), get_string(levels[k], "criteria", lp),
                          get_string_list(levels[k], "examples", lp)});
    }
    rubric.dimensions.push_back(std::move(d));
  }
  validate_rubric(rubric);
  return rubric;
}

Rubric load_rubric(const std::filesystem::path& path) { return rubric_from_json(read_file(path)); }

}  // namespace classmind::json_io
