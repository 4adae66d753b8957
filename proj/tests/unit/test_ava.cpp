#include "helpers.hpp"

#include <map>
#include <set>

#include "classmind/ava_align.hpp"
#include "classmind/json_io.hpp"
#include "classmind/text.hpp"

using namespace classmind;
using namespace classmind::ava;
using Json = nlohmann::json;

namespace {

LessonTimeline golden_timeline() {
  return json_io::timeline_from_json(json_io::read_file(testing::fixture_dir() / "golden/timeline.json"));
}

struct MemorySink : CheckpointSink {
  std::map<std::string, Json> docs;
  std::optional<Json> load(const std::string& name) override {
    auto it = docs.find(name);
    if (it == docs.end()) return std::nullopt;
    return it->second;
  }
  void save(const std::string& name, const Json& doc) override { docs[name] = doc; }
};

// Wraps the mock and replaces the hotspot answer with a fixed payload.
struct HotspotOverride : Backend {
  std::shared_ptr<Backend> inner = testing::fixture_backend();
  Json hotspots;
  std::string fingerprint() const override { return "override"; }
  Json complete(BackendKind kind, const StructuredRequest& r) override {
    if (r.task_tag == "hotspots") return {{"hotspots", hotspots}};
    return inner->complete(kind, r);
  }
};

Json raw_hotspot(std::int64_t s, std::int64_t e, const std::string& dim, const std::string& excerpt,
                 const std::string& pol = "STRENGTH") {
  return {{"start_ms", s}, {"end_ms", e}, {"dimension_id", dim}, {"polarity", pol},
          {"context_summary", "ctx"}, {"trigger_excerpt", excerpt}};
}

}  // namespace

TEST_SUITE("ava") {

TEST_CASE("fixture pipeline validates grounded items and rejects the planted fabrication") {
  const auto tl = golden_timeline();
  const auto rubric = json_io::load_rubric(testing::rubric_path());
  ModelGateway gw(testing::fixture_backend(), testing::fast_config());
  const auto report = run_pipeline({tl, rubric, "fp", "1970-01-01T00:00:00Z"}, gw);
  CHECK(report.items.size() == 10);
  REQUIRE(report.rejected.size() == 1);
  CHECK(report.rejected[0].dimension_id == "3c");
  CHECK(report.rejected[0].status == FeedbackStatus::kRejected);
  CHECK_FALSE(is_grounded(report.rejected[0], tl));
  for (const auto& item : report.items) {
    CHECK(item.status == FeedbackStatus::kValidated);
    CHECK(is_grounded(item, tl));
    CHECK(item.content.find(item.dimension_title) != std::string::npos);
    CHECK_FALSE(item.guidelines.empty());
  }
  // strengths first, then by start time
  bool seen_weak = false;
  for (std::size_t i = 0; i < report.items.size(); ++i) {
    const bool weak = report.items[i].polarity == Polarity::kWeakness;
    CHECK_FALSE((seen_weak && !weak));
    seen_weak = seen_weak || weak;
    if (i > 0 && report.items[i - 1].polarity == report.items[i].polarity) {
      CHECK(report.items[i - 1].interval.start() <= report.items[i].interval.start());
    }
  }
  CHECK(json_io::dump_artifact(report_to_json(report_from_json(report_to_json(report)))) ==
        json_io::dump_artifact(report_to_json(report)));
}

TEST_CASE("per-dimension cap") {
  const auto tl = golden_timeline();
  const auto rubric = json_io::load_rubric(testing::rubric_path());
  ModelGateway gw(testing::fixture_backend(), testing::fast_config());
  PipelinePolicy p;
  p.max_per_dimension = 1;
  const auto hs = generate_hotspots(tl, rubric, gw, p);
  std::set<std::string> dims;
  for (const auto& h : hs) CHECK(dims.insert(h.dimension_id).second);
  CHECK(hs.size() == 6);
  p.max_total = 2;
  CHECK(generate_hotspots(tl, rubric, gw, p).size() == 2);
}

TEST_CASE("hotspot property: dedup, unknown dimensions, bounds and caps") {
  const auto tl = golden_timeline();
  const auto rubric = json_io::load_rubric(testing::rubric_path());
  const std::vector<std::string> dims = {"2c", "2e", "3a", "3b", "3c", "3d", "9z"};
  std::mt19937 rng(99);
  for (int round = 0; round < 50; ++round) {
    auto backend = std::make_shared<HotspotOverride>();
    backend->hotspots = Json::array();
    std::uniform_int_distribution<int> n(0, 40), win(0, 15), dim(0, 6), len(1, 60);
    const int count = n(rng);
    for (int i = 0; i < count; ++i) {
      const std::int64_t s = win(rng) * 120'000;
      backend->hotspots.push_back(raw_hotspot(s, s + 120'000, dims[dim(rng)], std::string(len(rng), 'x'),
                                              i % 2 ? "STRENGTH" : "WEAKNESS"));
    }
    ModelGateway gw(backend, testing::fast_config());
    PipelinePolicy p;
    p.max_total = 8;
    const auto hs = generate_hotspots(tl, rubric, gw, p);
    CHECK(hs.size() <= 8);
    std::map<std::string, int> per;
    std::set<std::pair<std::size_t, std::string>> keys;
    for (std::size_t i = 0; i < hs.size(); ++i) {
      CHECK(rubric.find(hs[i].dimension_id) != nullptr);
      CHECK(hs[i].interval.end() <= tl.duration());
      CHECK(++per[hs[i].dimension_id] <= 3);
      CHECK(keys.insert({hs[i].window_index, hs[i].dimension_id}).second);
      if (i > 0) CHECK(hs[i - 1].interval.start() <= hs[i].interval.start());
    }
  }
}

TEST_CASE("dedup keeps the longer excerpt") {
  auto backend = std::make_shared<HotspotOverride>();
  backend->hotspots = Json::array({raw_hotspot(0, 120'000, "2c", "short"),
                                   raw_hotspot(0, 120'000, "2c", "the longer one"),
                                   raw_hotspot(0, 120'000, "2c", "mid len")});
  ModelGateway gw(backend, testing::fast_config());
  const auto hs = generate_hotspots(golden_timeline(), json_io::load_rubric(testing::rubric_path()), gw);
  REQUIRE(hs.size() == 1);
  CHECK(hs[0].trigger_excerpt == "the longer one");
}

TEST_CASE("checkpoints resume only when the fingerprint matches") {
  const auto tl = golden_timeline();
  const auto rubric = json_io::load_rubric(testing::rubric_path());
  MemorySink sink;
  ModelGateway first(testing::fixture_backend(), testing::fast_config());
  const auto a = run_pipeline({tl, rubric, "fp-1", "t"}, first, {}, &sink);
  CHECK(sink.docs.count(kHotspotsArtifact) == 1);
  CHECK(sink.docs.count(kDraftArtifact) == 1);

  ModelGateway second(testing::fixture_backend(), testing::fast_config());
  const auto b = run_pipeline({tl, rubric, "fp-1", "t"}, second, {}, &sink);
  CHECK(report_to_json(a) == report_to_json(b));
  // only the validator runs on resume
  CHECK(second.stats().requests == a.items.size() + a.rejected.size());

  ModelGateway third(testing::fixture_backend(), testing::fast_config());
  run_pipeline({tl, rubric, "fp-2", "t"}, third, {}, &sink);
  CHECK(third.stats().requests > second.stats().requests);
}

TEST_CASE("draft preconditions and quote requirement") {
  const auto tl = golden_timeline();
  const auto rubric = json_io::load_rubric(testing::rubric_path());
  ModelGateway gw(testing::fixture_backend(), testing::fast_config());
  Hotspot h;
  h.interval = TimeInterval::from_ms(0, 120'000);
  h.dimension_id = "2c";
  h.trigger_excerpt = "Let us make a quick transition to the warm-up at your tables.";
  const auto& dim = *rubric.find("2c");
  CHECK_CODE(draft_feedback(h, 0, {}, EvidenceBundle{}, dim, gw), ErrorCode::kPrecondition);
  CHECK_CODE(draft_feedback(h, 0, {}, evidence_for(tl, h.interval), *rubric.find("3a"), gw), ErrorCode::kPrecondition);
  CHECK_CODE(generate_guidelines(h, 0, *rubric.find("3a"), gw), ErrorCode::kPrecondition);
  const auto item = draft_feedback(h, 0, {}, evidence_for(tl, h.interval), dim, gw);
  CHECK(item.feedback_id == "fb-000-2c");
  CHECK_FALSE(text::quoted_spans(item.observed_behaviors).empty());

  struct NoQuotes : Backend {
    std::string fingerprint() const override { return "nq"; }
    Json complete(BackendKind, const StructuredRequest&) override {
      return {{"content", "c"}, {"observed_behaviors", "nothing quoted"}, {"actionable_advice", "a"}};
    }
  };
  ModelGateway bare(std::make_shared<NoQuotes>(), testing::fast_config());
  CHECK_THROWS_AS(draft_feedback(h, 0, {}, evidence_for(tl, h.interval), dim, bare), SchemaViolation);
}

TEST_CASE("assemble refuses unvalidated items") {
  FeedbackReport r;
  FeedbackItem i;
  i.feedback_id = "x";
  CHECK_CODE(assemble(r, {i}), ErrorCode::kPrecondition);
  CHECK_CODE(parse_polarity("MAYBE"), ErrorCode::kParse);
}

TEST_CASE("grounding needs a quote that occurs in the window") {
  const auto tl = golden_timeline();
  FeedbackItem item;
  item.interval = TimeInterval::from_ms(0, 120'000);
  item.observed_behaviors = "no quote";
  CHECK_FALSE(is_grounded(item, tl));
  item.observed_behaviors = text::quote("quick transition to the warm-up");
  CHECK(is_grounded(item, tl));
  item.interval = TimeInterval::from_ms(600'000, 720'000);
  CHECK_FALSE(is_grounded(item, tl));
}

}
