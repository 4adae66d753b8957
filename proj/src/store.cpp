#include "classmind/store.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>

#include "classmind/error.hpp"
#include "classmind/fsutil.hpp"
#include "classmind/hashing.hpp"
#include "classmind/json_io.hpp"

namespace classmind {

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

constexpr const char* kRecordFile = "lesson.json";

bool valid_id(const std::string& id) {
  if (id.empty() || id.size() > 128 || id == "." || id == "..") return false;
  for (char c : id) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    if (!ok) return false;
  }
  return true;
}

}  // namespace

std::string utc_now_iso8601() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ArtifactStore::ArtifactStore(fs::path root) : root_(std::move(root)) { fs::create_directories(root_ / "lessons"); }

fs::path ArtifactStore::lesson_dir(const std::string& lesson_id) const {
  if (!valid_id(lesson_id)) fail(ErrorCode::kPrecondition, "invalid lesson id '" + lesson_id + "'");
  return root_ / "lessons" / lesson_id;
}

void ArtifactStore::check_name(const std::string& name) {
  if (!valid_id(name) || name == kRecordFile || fsutil::is_temp_name(name)) {
    fail(ErrorCode::kPrecondition, "invalid artifact name '" + name + "'");
  }
}

void ArtifactStore::write_record(const LessonRecord& r) const {
  Json doc{{"schema_version", json_io::kSchemaVersion},
           {"lesson_id", r.lesson_id},
           {"title", r.title},
           {"duration_ms", r.duration.ms()},
           {"created_at", r.created_at},
           {"manifest", Json::object()}};
  if (r.media_url) doc["media_url"] = *r.media_url;
  for (const auto& [name, e] : r.manifest) doc["manifest"][name] = {{"path", e.path}, {"sha256", e.sha256}};
  fsutil::write_atomic(lesson_dir(r.lesson_id) / kRecordFile, json_io::dump_artifact(doc));
}

LessonRecord ArtifactStore::read_record(const std::string& lesson_id) const {
  const auto path = lesson_dir(lesson_id) / kRecordFile;
  if (!fs::exists(path)) fail(ErrorCode::kLessonNotFound, "lesson '" + lesson_id + "' not found");
  const auto doc = json_io::read_file(path);
  LessonRecord r;
  r.lesson_id = json_io::get_string(doc, "lesson_id", kRecordFile);
  r.title = json_io::get_string_or(doc, "title", "");
  r.duration = MediaTime::from_ms(json_io::get_int(doc, "duration_ms", kRecordFile));
  r.created_at = json_io::get_string_or(doc, "created_at", "");
  if (doc.contains("media_url")) r.media_url = doc["media_url"].get<std::string>();
  for (const auto& [name, e] : json_io::field(doc, "manifest", kRecordFile).items()) {
    r.manifest[name] = {e.at("path").get<std::string>(), e.at("sha256").get<std::string>()};
  }
  return r;
}

LessonRecord ArtifactStore::create_lesson(std::string lesson_id, const std::string& title, MediaTime duration,
                                          std::optional<std::string> media_url) {
  if (duration.ms() <= 0) fail(ErrorCode::kRange, "lesson duration must be > 0");
  std::lock_guard lock(mu_);
  if (lesson_id.empty()) {
    static std::atomic<std::uint64_t> counter{0};
    const auto seed = title + "|" + std::to_string(std::chrono::system_clock::now().time_since_epoch().count()) + "|" +
                      std::to_string(counter++);
    lesson_id = "lesson-" + sha256_hex(seed).substr(0, 12);
  }
  const auto dir = lesson_dir(lesson_id);
  if (fs::exists(dir / kRecordFile)) fail(ErrorCode::kPrecondition, "lesson '" + lesson_id + "' already exists");
  fs::create_directories(dir);
  LessonRecord r{lesson_id, title.empty() ? lesson_id : title, duration, utc_now_iso8601(), std::move(media_url), {}};
  write_record(r);
  return r;
}

LessonRecord ArtifactStore::ensure_lesson(const std::string& lesson_id, MediaTime duration, const std::string& title) {
  if (has_lesson(lesson_id)) {
    auto r = lesson(lesson_id);
    if (r.duration != duration) {
      fail(ErrorCode::kPrecondition, "lesson '" + lesson_id + "' has duration " + r.duration.to_string() +
                                         ", not " + duration.to_string());
    }
    return r;
  }
  return create_lesson(lesson_id, title, duration);
}

bool ArtifactStore::has_lesson(const std::string& lesson_id) const {
  return valid_id(lesson_id) && fs::exists(lesson_dir(lesson_id) / kRecordFile);
}

LessonRecord ArtifactStore::lesson(const std::string& lesson_id) const {
  if (!valid_id(lesson_id)) fail(ErrorCode::kLessonNotFound, "lesson '" + lesson_id + "' not found");
  std::lock_guard lock(mu_);
  return read_record(lesson_id);
}

std::vector<LessonRecord> ArtifactStore::lessons() const {
  std::vector<std::string> ids;
  for (const auto& e : fs::directory_iterator(root_ / "lessons")) {
    if (e.is_directory() && fs::exists(e.path() / kRecordFile)) ids.push_back(e.path().filename().string());
  }
  std::sort(ids.begin(), ids.end());
  std::vector<LessonRecord> out;
  for (const auto& id : ids) out.push_back(lesson(id));
  return out;
}

fs::path ArtifactStore::artifact_path(const std::string& lesson_id, const std::string& name) const {
  check_name(name);
  return lesson_dir(lesson_id) / name;
}

void ArtifactStore::put_artifact(const std::string& lesson_id, const std::string& name, std::string_view bytes) {
  check_name(name);
  std::lock_guard lock(mu_);
  auto r = read_record(lesson_id);
  fsutil::write_atomic(lesson_dir(lesson_id) / name, bytes);
  r.manifest[name] = {name, sha256_hex(bytes)};
  write_record(r);
}

std::string ArtifactStore::get_artifact(const std::string& lesson_id, const std::string& name) const {
  check_name(name);
  ManifestEntry entry;
  {
    std::lock_guard lock(mu_);
    const auto r = read_record(lesson_id);
    const auto it = r.manifest.find(name);
    if (it == r.manifest.end()) fail(ErrorCode::kNotFound, "lesson '" + lesson_id + "' has no artifact " + name);
    entry = it->second;
  }
  const auto path = lesson_dir(lesson_id) / entry.path;
  if (!fs::exists(path)) fail(ErrorCode::kNotFound, "artifact file missing: " + path.string());
  auto bytes = json_io::read_text_file(path);
  if (sha256_hex(bytes) != entry.sha256) {
    fail(ErrorCode::kHashMismatch, "artifact " + name + " of lesson '" + lesson_id + "' does not match its manifest hash");
  }
  return bytes;
}

bool ArtifactStore::has_artifact(const std::string& lesson_id, const std::string& name) const {
  if (!has_lesson(lesson_id)) return false;
  std::lock_guard lock(mu_);
  return read_record(lesson_id).manifest.count(name) > 0;
}

Json lesson_to_api_json(const LessonRecord& r) {
  Json j{{"lesson_id", r.lesson_id},
         {"title", r.title},
         {"duration", json_io::time_value(r.duration)},
         {"created_at", r.created_at},
         {"artifacts", Json::object()}};
  if (r.media_url) j["media_url"] = *r.media_url;
  for (const auto& [name, e] : r.manifest) j["artifacts"][name] = {{"sha256", e.sha256}};
  return j;
}

}  // namespace classmind
