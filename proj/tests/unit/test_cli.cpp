#include "helpers.hpp"

#include <sys/wait.h>

#include <cstdio>
#include <fstream>

#include "classmind/json_io.hpp"

using Json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

std::string quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

// Runs the CLI with a shell-quoted argument list; stderr is discarded.
Run cli(const std::vector<std::string>& args, const std::string& env = "") {
  std::string cmd = env + " " + quote(CLASSMIND_CLI);
  for (const auto& a : args) cmd += " " + quote(a);
  cmd += " 2>/dev/null";
  Run r;
  FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof(buf), p)) > 0) r.out.append(buf, n);
  const int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::vector<std::string> base(const testing::TempDir& dir) {
  return {"--store", (dir / "store").string(), "--fixtures", testing::fixture_dir().string(), "--json"};
}

std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("end-to-end commands and exit codes") {
  testing::TempDir dir;
  const auto fx = testing::fixture_dir();
  const auto b = base(dir);

  auto r = cli(with(b, {"analyze", "--lesson-id", "lesson30", "--rubric", testing::rubric_path().string()}));
  CHECK(r.code == 1);

  r = cli(with(b, {"ingest", "--lesson-id", "lesson30", "--duration-ms", "1800000", "--transcript",
                   (fx / "transcript.jsonl").string(), "--context", (fx / "lesson_plan.txt").string(), "--title",
                   "How plants lose water"}),
          "SOURCE_DATE_EPOCH=0");
  REQUIRE(r.code == 0);
  auto j = Json::parse(r.out);
  CHECK(j["turns"] == 67);
  CHECK(j["windows"] == 15);
  CHECK(j["gateway"]["network_calls"] == 0);

  r = cli(with(b, {"analyze", "--lesson-id", "lesson30", "--rubric", testing::rubric_path().string()}),
          "SOURCE_DATE_EPOCH=0");
  REQUIRE(r.code == 0);
  j = Json::parse(r.out);
  CHECK(j["validated"] == 10);
  CHECK(j["rejected"] == 1);

  r = cli(with(b, {"annotate", "--lesson-id", "lesson30", "--taxonomy", testing::taxonomy_path().string()}),
          "SOURCE_DATE_EPOCH=0");
  REQUIRE(r.code == 0);
  CHECK(Json::parse(r.out)["questions"] == 7);

  r = cli(with(b, {"evaluate", "--lesson-id", "lesson30", "--gold-questions", (fx / "gold_questions.json").string()}),
          "SOURCE_DATE_EPOCH=0");
  REQUIRE(r.code == 0);
  CHECK(Json::parse(r.out)["evaluation"]["grounding_rate"] == 1.0);

  const auto store = dir / "store";
  for (const char* name : {"timeline.json", "hotspots.json", "feedback.json", "annotations.json"}) {
    CHECK_MESSAGE(classmind::json_io::read_text_file(store / "lessons/lesson30" / name) ==
                      classmind::json_io::read_text_file(fx / "golden" / name),
                  name);
  }

  // human-readable table
  r = cli({"--store", store.string(), "--fixtures", fx.string(), "evaluate", "--lesson-id", "lesson30"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("Temporal Coverage (Entropy)") != std::string::npos);

  const auto index = dir / "index";
  r = cli(with(b, {"index-build", "--clips", (fx / "clips.csv").string(), "--out", index.string()}));
  REQUIRE(r.code == 0);
  CHECK(Json::parse(r.out)["clips"] == 12);
  r = cli(with(b, {"recommend", "--lesson-id", "lesson30", "--index", index.string()}));
  REQUIRE(r.code == 0);
  CHECK(Json::parse(r.out)["items"] == 10);

  const auto html = dir / "report.html";
  r = cli(with(b, {"export-report", "--lesson-id", "lesson30", "--out", html.string()}));
  REQUIRE(r.code == 0);
  const auto page = classmind::json_io::read_text_file(html);
  CHECK(page.rfind("<!DOCTYPE html>", 0) == 0);
  CHECK(page.find("How plants lose water") != std::string::npos);
  CHECK(page.find("<script") == std::string::npos);

  // a lesson that does not exist
  r = cli(with(b, {"export-report", "--lesson-id", "ghost", "--out", html.string()}));
  CHECK(r.code == 1);
}

TEST_CASE("usage errors exit 1, backend failures exit 2") {
  testing::TempDir dir;
  CHECK(cli({"--store", dir.path().string()}).code == 1);
  CHECK(cli({"ingest", "--lesson-id", "x"}).code == 1);
  CHECK(cli({"--help"}).code == 0);

  const auto fx = testing::fixture_dir();
  // nothing listens on port 9 of localhost
  const auto r = cli({"--store", (dir / "s").string(), "--backend", "remote", "ingest", "--lesson-id", "lesson30",
                      "--duration-ms", "1800000", "--transcript", (fx / "transcript.jsonl").string()},
                     "CLASSMIND_REMOTE_URL=http://127.0.0.1:9");
  CHECK(r.code == 2);
  CHECK(cli({"--store", (dir / "s").string(), "--backend", "remote", "index-build", "--clips",
             (fx / "clips.csv").string(), "--out", (dir / "i").string()})
            .code == 1);
}

}
