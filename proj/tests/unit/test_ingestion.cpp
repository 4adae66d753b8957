#include "helpers.hpp"

#include "classmind/ingestion.hpp"
#include "classmind/json_io.hpp"

using namespace classmind;
using namespace classmind::ingestion;

namespace {

// Independent oracle: n full windows, then a remainder that either stands on
// its own or is folded into the last window.
std::vector<std::pair<std::int64_t, std::int64_t>> oracle_windows(std::int64_t d, std::int64_t w, std::int64_t tail) {
  std::vector<std::pair<std::int64_t, std::int64_t>> out;
  const auto n = d / w;
  const auto r = d % w;
  for (std::int64_t i = 0; i < n; ++i) out.emplace_back(i * w, (i + 1) * w);
  if (r == 0) return out;
  if (n == 0 || r >= tail) {
    out.emplace_back(n * w, d);
  } else {
    out.back().second = d;
  }
  return out;
}

}  // namespace

TEST_SUITE("ingestion") {

TEST_CASE("windowing examples") {
  const auto w1800 = plan_windows(MediaTime::from_ms(1'800'000));
  REQUIRE(w1800.size() == 15);
  for (std::size_t i = 0; i < w1800.size(); ++i) {
    CHECK(w1800[i] == TimeInterval::from_ms(static_cast<std::int64_t>(i) * 120'000,
                                            static_cast<std::int64_t>(i + 1) * 120'000));
  }
  CHECK(plan_windows(MediaTime::from_ms(120'000)) == std::vector{TimeInterval::from_ms(0, 120'000)});
  CHECK(plan_windows(MediaTime::from_ms(250'000)) ==
        std::vector{TimeInterval::from_ms(0, 120'000), TimeInterval::from_ms(120'000, 250'000)});
  CHECK(plan_windows(MediaTime::from_ms(270'000)).size() == 3);
  CHECK(plan_windows(MediaTime::from_ms(269'999)).size() == 2);
  CHECK(plan_windows(MediaTime::from_ms(10'000)) == std::vector{TimeInterval::from_ms(0, 10'000)});
  CHECK_CODE(plan_windows(MediaTime::from_ms(0)), ErrorCode::kRange);
  CHECK_CODE(plan_windows(MediaTime::from_ms(10), WindowingPolicy{30, 30}), ErrorCode::kRange);
  CHECK_CODE(plan_windows(MediaTime::from_ms(10), WindowingPolicy{0, 0}), ErrorCode::kRange);
}

TEST_CASE("windowing property: tiles the lesson and matches the oracle") {
  std::mt19937_64 rng(1234);
  std::uniform_int_distribution<std::int64_t> dur(1, 7'200'000);
  for (int i = 0; i < 2000; ++i) {
    const auto d = i < 10 ? static_cast<std::int64_t>(i + 1) * 120'000 : dur(rng);
    const auto win = plan_windows(MediaTime::from_ms(d));
    std::int64_t total = 0, cursor = 0;
    for (const auto& w : win) {
      CHECK(w.start_ms() == cursor);
      cursor = w.end_ms();
      total += w.duration_ms();
    }
    CHECK(total == d);
    const auto ceil_n = static_cast<std::size_t>((d + 119'999) / 120'000);
    CHECK((win.size() == ceil_n || win.size() + 1 == ceil_n));
    const auto expected = oracle_windows(d, 120'000, 30'000);
    REQUIRE(win.size() == expected.size());
    for (std::size_t k = 0; k < win.size(); ++k) {
      CHECK(win[k].start_ms() == expected[k].first);
      CHECK(win[k].end_ms() == expected[k].second);
    }
  }
}

TEST_CASE("transcript parsing") {
  const std::string jsonl =
      "{\"start_ms\": 5000, \"end_ms\": 9000, \"speaker\": \"Student\", \"text\": \"Yes.\"}\n"
      "\n"
      "{\"start_ms\": 0, \"end_ms\": 6000, \"speaker\": \"Teacher\", \"text\": \"Hello class.\","
      " \"words\": [{\"token\": \"Hello\", \"time_ms\": 0}, {\"token\": \"class.\", \"time_ms\": 500}]}\n"
      "{\"start_ms\": 1000, \"end_ms\": 2000, \"speaker\": \"S1\", \"text\": \"hm\"}\n";
  const auto turns = parse_transcript(jsonl, SpeakerMap::defaults());
  REQUIRE(turns.size() == 3);
  CHECK(turns[0].speaker == SpeakerRole::kTeacher);
  CHECK(turns[0].words.size() == 2);
  CHECK(turns[1].speaker == SpeakerRole::kUnknown);
  CHECK(turns[2].speaker == SpeakerRole::kStudent);

  SpeakerMap custom = SpeakerMap::defaults();
  custom.set("S1", SpeakerRole::kStudent);
  CHECK(parse_transcript(jsonl, custom)[1].speaker == SpeakerRole::kStudent);
}

TEST_CASE("transcript errors name the line") {
  auto msg = [](const std::string& body) -> std::string {
    try {
      parse_transcript(body, SpeakerMap::defaults(), "t.jsonl");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kParse);
      return e.what();
    }
    return "";
  };
  const std::string good = "{\"start_ms\":0,\"end_ms\":1,\"speaker\":\"t\",\"text\":\"a\"}\n";
  CHECK(msg(good + "nope\n").find("t.jsonl:2") != std::string::npos);
  CHECK(msg("{\"start_ms\":5,\"end_ms\":5,\"speaker\":\"t\",\"text\":\"a\"}").find("t.jsonl:1") != std::string::npos);
  CHECK(msg("{\"start_ms\":0,\"end_ms\":5,\"speaker\":\"t\",\"text\":\"  \"}") != "");
  CHECK(msg("{\"start_ms\":0,\"end_ms\":5,\"text\":\"a\"}").find("speaker") != std::string::npos);
  CHECK(msg("{\"start_ms\":0,\"end_ms\":5,\"speaker\":\"t\",\"text\":\"a\",\"words\":[{\"token\":\"a\",\"time_ms\":9}]}") != "");
}

TEST_CASE("captions follow window order and come from the fixture table") {
  ModelGateway gw(testing::fixture_backend(), testing::fast_config());
  const auto windows = plan_windows(MediaTime::from_ms(360'000));
  const auto caps = caption_all("lesson30", windows, gw);
  REQUIRE(caps.size() == 3);
  for (std::size_t i = 0; i < caps.size(); ++i) {
    CHECK(caps[i].segment_index == i);
    CHECK(caps[i].interval == windows[i]);
  }
  CHECK(caps[1].caption.find("pairs") != std::string::npos);
  CHECK(caption_all("lesson30", {}, gw).empty());
  const auto unknown = caption_all("other", windows, gw);
  CHECK(unknown[0].caption.find("no further visual detail") != std::string::npos);
}

TEST_CASE("a failing window fails the whole captioning step") {
  struct Flaky : Backend {
    std::string fingerprint() const override { return "flaky"; }
    nlohmann::json complete(BackendKind, const StructuredRequest& r) override {
      if (r.section("interval").rfind("[120.000", 0) == 0) throw TransportError("down");
      return {{"caption", "fine"}};
    }
  };
  ModelGateway gw(std::make_shared<Flaky>(), testing::fast_config());
  CHECK_CODE(caption_all("x", plan_windows(MediaTime::from_ms(360'000)), gw), ErrorCode::kBackendUnavailable);
}

TEST_CASE("timeline fusion checks tiling and bounds") {
  const auto d = MediaTime::from_ms(200'000);
  std::vector<CaptionSegment> caps{{TimeInterval::from_ms(0, 120'000), "a", 0},
                                   {TimeInterval::from_ms(120'000, 200'000), "b", 1}};
  std::vector<TranscriptTurn> turns{testing::turn(130'000, 140'000, SpeakerRole::kTeacher, "later"),
                                    testing::turn(0, 10'000, SpeakerRole::kStudent, "first"),
                                    testing::turn(5'000, 12'000, SpeakerRole::kStudent, "overlap ok")};
  const auto tl = fuse_timeline("l", turns, caps, d);
  CHECK(tl.turns().front().text == "first");
  CHECK(tl.window_index_at(MediaTime::from_ms(119'999)) == 0);
  CHECK(tl.window_index_at(MediaTime::from_ms(120'000)) == 1);
  CHECK(tl.window_index_at(d) == 1);
  const auto merged = tl.merged_view();
  CHECK(merged.size() == 5);
  CHECK(merged[0].kind == TimelineEntry::Kind::kCaption);

  auto gap = caps;
  gap[1] = {TimeInterval::from_ms(121'000, 200'000), "b", 1};
  CHECK_CODE(fuse_timeline("l", turns, gap, d), ErrorCode::kOverlap);
  auto beyond = turns;
  beyond.push_back(testing::turn(190'000, 210'000, SpeakerRole::kTeacher, "x"));
  CHECK_CODE(fuse_timeline("l", beyond, caps, d), ErrorCode::kRange);
}

TEST_CASE("ingest is a function of its inputs") {
  auto run = [] {
    ModelGateway gw(testing::fixture_backend(), testing::fast_config());
    auto turns = load_transcript(testing::fixture_dir() / "transcript.jsonl");
    return json_io::dump_artifact(json_io::timeline_to_json(
        ingest("lesson30", MediaTime::from_ms(1'800'000), std::move(turns),
               {load_context_document(testing::fixture_dir() / "lesson_plan.txt")}, {}, gw)));
  };
  const auto a = run();
  CHECK(a == run());
  CHECK(a == json_io::read_text_file(testing::fixture_dir() / "golden/timeline.json"));
  CHECK(load_context_document(testing::fixture_dir() / "lesson_plan.txt").kind == ContextKind::kLessonPlan);
}

}
