#include "helpers.hpp"

#include <fstream>

#include "classmind/hashing.hpp"
#include "classmind/json_io.hpp"
#include "classmind/store.hpp"

using namespace classmind;

TEST_SUITE("store") {

TEST_CASE("create, list and read lessons") {
  testing::TempDir dir;
  ArtifactStore store(dir.path());
  const auto a = store.create_lesson("b-lesson", "Leaves", MediaTime::from_ms(60'000), "https://example.org/v.mp4");
  CHECK(a.title == "Leaves");
  const auto b = store.create_lesson("", "Roots", MediaTime::from_ms(1000));
  CHECK(b.lesson_id.rfind("lesson-", 0) == 0);
  CHECK(store.has_lesson("b-lesson"));
  CHECK_FALSE(store.has_lesson("nope"));
  CHECK_FALSE(store.has_lesson("../x"));

  const auto all = store.lessons();
  REQUIRE(all.size() == 2);
  CHECK(all[0].lesson_id < all[1].lesson_id);

  const auto back = store.lesson("b-lesson");
  CHECK(back.duration == MediaTime::from_ms(60'000));
  CHECK(*back.media_url == "https://example.org/v.mp4");

  CHECK_CODE(store.create_lesson("b-lesson", "x", MediaTime::from_ms(1)), ErrorCode::kPrecondition);
  CHECK_CODE(store.create_lesson("z", "x", MediaTime::from_ms(0)), ErrorCode::kRange);
  CHECK_CODE(store.lesson("missing"), ErrorCode::kLessonNotFound);
  CHECK_CODE(store.lesson("a/b"), ErrorCode::kLessonNotFound);
  CHECK_CODE(store.create_lesson("a/b", "x", MediaTime::from_ms(1)), ErrorCode::kPrecondition);
}

TEST_CASE("ensure_lesson keeps the record and checks the duration") {
  testing::TempDir dir;
  ArtifactStore store(dir.path());
  store.ensure_lesson("l1", MediaTime::from_ms(5000), "T");
  CHECK(store.ensure_lesson("l1", MediaTime::from_ms(5000)).title == "T");
  CHECK_CODE(store.ensure_lesson("l1", MediaTime::from_ms(6000)), ErrorCode::kPrecondition);
}

TEST_CASE("artifacts are recorded in the manifest and verified on read") {
  testing::TempDir dir;
  ArtifactStore store(dir.path());
  store.create_lesson("l1", "T", MediaTime::from_ms(5000));
  CHECK_FALSE(store.has_artifact("l1", "timeline.json"));
  CHECK_CODE(store.get_artifact("l1", "timeline.json"), ErrorCode::kNotFound);

  store.put_artifact("l1", "timeline.json", "{\"a\": 1}\n");
  CHECK(store.has_artifact("l1", "timeline.json"));
  CHECK(store.get_artifact("l1", "timeline.json") == "{\"a\": 1}\n");
  const auto rec = store.lesson("l1");
  CHECK(rec.manifest.at("timeline.json").sha256 == sha256_hex("{\"a\": 1}\n"));
  CHECK(lesson_to_api_json(rec)["artifacts"]["timeline.json"]["sha256"] == rec.manifest.at("timeline.json").sha256);

  // overwrite replaces bytes and hash
  store.put_artifact("l1", "timeline.json", "{}\n");
  CHECK(store.get_artifact("l1", "timeline.json") == "{}\n");

  {
    std::ofstream out(store.artifact_path("l1", "timeline.json"), std::ios::binary | std::ios::trunc);
    out << "{\"tampered\": true}\n";
  }
  CHECK_CODE(store.get_artifact("l1", "timeline.json"), ErrorCode::kHashMismatch);

  std::filesystem::remove(store.artifact_path("l1", "timeline.json"));
  CHECK_CODE(store.get_artifact("l1", "timeline.json"), ErrorCode::kNotFound);

  CHECK_CODE(store.put_artifact("l1", "lesson.json", "{}"), ErrorCode::kPrecondition);
  CHECK_CODE(store.put_artifact("l1", "../escape", "{}"), ErrorCode::kPrecondition);
  CHECK_CODE(store.put_artifact("ghost", "timeline.json", "{}"), ErrorCode::kLessonNotFound);
}

TEST_CASE("a second store instance sees the same data") {
  testing::TempDir dir;
  {
    ArtifactStore store(dir.path());
    store.create_lesson("l1", "T", MediaTime::from_ms(5000));
    store.put_artifact("l1", "notes.json", "[]");
  }
  ArtifactStore again(dir.path());
  CHECK(again.get_artifact("l1", "notes.json") == "[]");
  const auto doc = json_io::read_file(again.lesson_dir("l1") / "lesson.json");
  CHECK(doc["duration_ms"] == 5000);
}

}
