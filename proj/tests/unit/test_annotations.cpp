#include "helpers.hpp"

#include <set>

#include "classmind/annotations.hpp"
#include "classmind/json_io.hpp"

using namespace classmind;
using namespace classmind::annotations;
using testing::turn;

namespace {

LessonTimeline make_timeline(std::int64_t duration_ms, const std::vector<std::string>& captions,
                             std::vector<TranscriptTurn> turns) {
  std::vector<CaptionSegment> caps;
  const auto n = static_cast<std::int64_t>(captions.size());
  for (std::int64_t i = 0; i < n; ++i) {
    caps.push_back({TimeInterval::from_ms(i * duration_ms / n, (i + 1) * duration_ms / n),
                    captions[static_cast<std::size_t>(i)], static_cast<std::size_t>(i)});
  }
  return fuse_timeline("t", std::move(turns), std::move(caps), MediaTime::from_ms(duration_ms));
}

std::set<std::string> labels_at(const std::vector<ActivitySpan>& spans, Actor actor, std::int64_t t) {
  std::set<std::string> out;
  for (const auto& s : spans) {
    if (s.actor == actor && s.interval.contains(MediaTime::from_ms(t))) out.insert(s.labels.begin(), s.labels.end());
  }
  return out;
}

}  // namespace

TEST_SUITE("annotations") {

TEST_CASE("taxonomy validation and loading") {
  const auto t = load_taxonomy(testing::taxonomy_path());
  CHECK(t.codes.size() == 8);
  CHECK(t.find("TEACHER_QA")->actor == Actor::kTeacher);
  Taxonomy dup{"d", {{"TEACHER_QA", Actor::kTeacher, ""}, {"TEACHER_QA", Actor::kTeacher, ""}}};
  CHECK_THROWS_AS(validate_taxonomy(dup), Error);
  Taxonomy wrong_actor{"w", {{"STUDENT_QA", Actor::kTeacher, ""}}};
  CHECK_THROWS_AS(validate_taxonomy(wrong_actor), Error);
  CHECK_THROWS_AS(validate_taxonomy(Taxonomy{"e", {}}), Error);
}

TEST_CASE("teacher monologue gives one lecturing span with concurrent listening") {
  const auto tl = make_timeline(300'000, {"The teacher speaks at the front."},
                                {turn(0, 300'000, SpeakerRole::kTeacher, "Today we study cells. Cells have walls.")});
  ModelGateway gw(std::make_shared<MockBackend>(), testing::fast_config());
  const auto spans = annotate_activities(tl, default_taxonomy(), gw);
  REQUIRE(spans.size() == 2);
  CHECK(spans[0].actor == Actor::kTeacher);
  CHECK(spans[0].labels == std::set<std::string>{"TEACHER_LECTURING"});
  CHECK(spans[0].interval == TimeInterval::from_ms(0, 300'000));
  CHECK(spans[1].labels == std::set<std::string>{"STUDENT_LISTENING"});
  CHECK(spans[1].interval == TimeInterval::from_ms(0, 300'000));
}

TEST_CASE("co-occurring codes share one span; unknown codes fail") {
  const auto tl = make_timeline(60'000, {"Quiet room."},
                                {turn(0, 10'000, SpeakerRole::kTeacher, "What is on the board?")});
  ModelGateway gw(std::make_shared<MockBackend>(), testing::fast_config());
  const auto spans = annotate_activities(tl, default_taxonomy(), gw);
  REQUIRE(spans.size() == 1);
  CHECK(spans[0].labels == std::set<std::string>{"TEACHER_QA", "TEACHER_WRITING"});

  CHECK_CODE(merge_activity_records({{TimeInterval::from_ms(0, 5), "TEACHER_DANCING"}}, default_taxonomy()),
             ErrorCode::kUnknownCode);
  Taxonomy small{"small", {{"TEACHER_LECTURING", Actor::kTeacher, "x"}, {"STUDENT_LISTENING", Actor::kStudent, "y"}}};
  CHECK_CODE(annotate_activities(tl, small, gw), ErrorCode::kUnknownCode);
}

TEST_CASE("merge property: same-actor spans never overlap and preserve per-instant labels") {
  const auto tax = default_taxonomy();
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> pos(0, 200), len(1, 40), code(0, 7), count(0, 25);
  for (int round = 0; round < 200; ++round) {
    std::vector<LabelRecord> records;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
      const int s = pos(rng);
      records.push_back({TimeInterval::from_ms(s, s + len(rng)), tax.codes[static_cast<std::size_t>(code(rng))].code});
    }
    const auto spans = merge_activity_records(records, tax);
    for (std::size_t i = 0; i < spans.size(); ++i) {
      CHECK_FALSE(spans[i].labels.empty());
      if (i > 0) CHECK(spans[i - 1].interval.start() <= spans[i].interval.start());
      for (std::size_t j = i + 1; j < spans.size(); ++j) {
        if (spans[i].actor == spans[j].actor) CHECK_FALSE(spans[i].interval.overlaps(spans[j].interval));
      }
    }
    for (std::int64_t t = 0; t < 245; ++t) {
      for (auto actor : {Actor::kTeacher, Actor::kStudent}) {
        std::set<std::string> expected;
        for (const auto& r : records) {
          if (tax.find(r.code)->actor == actor && r.interval.contains(MediaTime::from_ms(t))) expected.insert(r.code);
        }
        CHECK(labels_at(spans, actor, t) == expected);
      }
    }
  }
}

TEST_CASE("question extraction") {
  const auto tl = make_timeline(60'000, {"c"},
                                {turn(0, 10'000, SpeakerRole::kTeacher, "Great. What is 2+2?"),
                                 turn(10'000, 12'000, SpeakerRole::kStudent, "Why?"),
                                 turn(12'000, 20'000, SpeakerRole::kTeacher, "Open your books now."),
                                 turn(20'000, 30'000, SpeakerRole::kTeacher, "how would you start")});
  const auto qs = extract_questions(tl);
  REQUIRE(qs.size() == 2);
  CHECK(qs[0].text == "What is 2+2?");
  CHECK(qs[1].text == "how would you start");
}

TEST_CASE("word timestamps narrow sentence intervals") {
  TranscriptTurn t = turn(0, 10'000, SpeakerRole::kTeacher, "Good. Why now?");
  t.words = {{"Good.", MediaTime::from_ms(1000)}, {"Why", MediaTime::from_ms(4000)}, {"now?", MediaTime::from_ms(5000)}};
  const auto s = sentence_spans(t);
  REQUIRE(s.size() == 2);
  CHECK(s[0].interval == TimeInterval::from_ms(1000, 4000));
  CHECK(s[1].interval == TimeInterval::from_ms(4000, 10'000));
  t.words.pop_back();  // misaligned: fall back to the turn interval
  CHECK(sentence_spans(t)[1].interval == t.interval);
}

TEST_CASE("bloom verb mapping") {
  ModelGateway gw(std::make_shared<MockBackend>(), testing::fast_config());
  CHECK(classify_bloom("Design an experiment to test osmosis?", gw).level == BloomLevel::kCreate);
  CHECK(classify_bloom("What is the capital of France?", gw).level == BloomLevel::kRemember);
  CHECK(classify_bloom("Compare these two graphs?", gw).level == BloomLevel::kAnalyze);
  const auto tie = classify_bloom("Can you explain and then judge the result?", gw);
  CHECK(tie.level == BloomLevel::kEvaluate);
  CHECK(tie.justification.find("explain") != std::string::npos);
  CHECK(tie.justification.find("judge") != std::string::npos);
  CHECK(classify_bloom("Who calculated it?", gw).level == BloomLevel::kApply);
  CHECK_CODE(classify_bloom("  ", gw), ErrorCode::kPrecondition);
}

TEST_CASE("histogram counts") {
  CHECK(question_distribution({}) == BloomHistogram{});
  const auto q = [](BloomLevel l) { return QuestionRecord{"q", TimeInterval::from_ms(0, 1), l, ""}; };
  CHECK(question_distribution({q(BloomLevel::kCreate)}) == BloomHistogram{0, 0, 0, 0, 0, 1});
  CHECK(question_distribution({q(BloomLevel::kRemember), q(BloomLevel::kRemember), q(BloomLevel::kApply)}) ==
        BloomHistogram{2, 0, 1, 0, 0, 0});
}

TEST_CASE("outline follows shift markers and tiles the lesson") {
  ModelGateway gw(std::make_shared<MockBackend>(), testing::fast_config());
  const auto tl = make_timeline(480'000, {"Intro.", "Still intro.", "We are moving on to labs.", "Labs."}, {});
  const auto out = generate_outline(tl, gw);
  REQUIRE(out.size() == 2);
  CHECK(out[0].interval == TimeInterval::from_ms(0, 240'000));
  CHECK(out[1].interval == TimeInterval::from_ms(240'000, 480'000));
  CHECK(generate_outline(tl, gw) == out);

  const auto one = make_timeline(90'000, {"Only."}, {});
  const auto single = generate_outline(one, gw);
  REQUIRE(single.size() == 1);
  CHECK(single[0].interval == TimeInterval::from_ms(0, 90'000));
}

TEST_CASE("outline gaps are schema violations") {
  struct Gappy : Backend {
    std::string fingerprint() const override { return "g"; }
    nlohmann::json complete(BackendKind, const StructuredRequest&) override {
      return {{"sections", {{{"start_ms", 0}, {"end_ms", 10}, {"heading", "h"}, {"summary", "s"}},
                            {{"start_ms", 20}, {"end_ms", 60'000}, {"heading", "h"}, {"summary", "s"}}}}};
    }
  };
  ModelGateway gw(std::make_shared<Gappy>(), testing::fast_config());
  CHECK_THROWS_AS(generate_outline(make_timeline(60'000, {"c"}, {}), gw), SchemaViolation);
}

TEST_CASE("fixture annotations: histogram sums and artifact round trip") {
  const auto tl = json_io::timeline_from_json(json_io::read_file(testing::fixture_dir() / "golden/timeline.json"));
  ModelGateway gw(testing::fixture_backend(), testing::fast_config());
  const auto set = annotate(tl, load_taxonomy(testing::taxonomy_path()), gw);
  std::size_t total = 0;
  for (auto c : set.histogram) total += c;
  CHECK(total == set.questions.size());
  CHECK(set.questions.size() == extract_questions(tl).size());
  CHECK(set.outline.size() == 3);
  for (const auto& s : set.activities) CHECK(s.interval.end() <= tl.duration());
  const auto raw = json_io::read_text_file(testing::fixture_dir() / "golden/annotations.json");
  CHECK(json_io::dump_artifact(annotations_to_json(set)) == raw);
  CHECK(json_io::dump_artifact(annotations_to_json(annotations_from_json(json_io::parse(raw, "a")))) == raw);
}

}
