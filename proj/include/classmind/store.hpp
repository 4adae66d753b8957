#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "classmind/time.hpp"

namespace classmind {

struct ManifestEntry {
  std::string path;  // relative to the lesson directory
  std::string sha256;
};

struct LessonRecord {
  std::string lesson_id;
  std::string title;
  MediaTime duration;
  std::string created_at;
  std::optional<std::string> media_url;
  std::map<std::string, ManifestEntry> manifest;
};

// Directory per lesson:
//   <root>/lessons/<id>/lesson.json   record + manifest
//   <root>/lessons/<id>/<artifact>     artifact bytes
// Artifact files and lesson.json are replaced by atomic rename. Reads verify
// the manifest hash.
class ArtifactStore {
 public:
  explicit ArtifactStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path lesson_dir(const std::string& lesson_id) const;

  // lesson_id is generated when empty. An existing id is an error.
  LessonRecord create_lesson(std::string lesson_id, const std::string& title, MediaTime duration,
                             std::optional<std::string> media_url = std::nullopt);
  // Returns the existing record, or creates one. A differing duration on an
  // existing lesson is a precondition error.
  LessonRecord ensure_lesson(const std::string& lesson_id, MediaTime duration, const std::string& title = "");

  bool has_lesson(const std::string& lesson_id) const;
  LessonRecord lesson(const std::string& lesson_id) const;  // LessonNotFound
  std::vector<LessonRecord> lessons() const;

  void put_artifact(const std::string& lesson_id, const std::string& name, std::string_view bytes);
  std::string get_artifact(const std::string& lesson_id, const std::string& name) const;  // NotFound, HashMismatch
  bool has_artifact(const std::string& lesson_id, const std::string& name) const;
  std::filesystem::path artifact_path(const std::string& lesson_id, const std::string& name) const;

 private:
  void write_record(const LessonRecord& record) const;
  LessonRecord read_record(const std::string& lesson_id) const;
  static void check_name(const std::string& name);

  std::filesystem::path root_;
  mutable std::mutex mu_;  // serializes manifest read-modify-write
};

nlohmann::json lesson_to_api_json(const LessonRecord& record);
std::string utc_now_iso8601();

}  // namespace classmind
