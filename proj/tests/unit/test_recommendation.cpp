#include "helpers.hpp"

#include <cmath>
#include <fstream>

#include "classmind/json_io.hpp"
#include "classmind/recommendation.hpp"
#include "classmind/schema.hpp"

using namespace classmind;
using namespace classmind::recommendation;
using Json = nlohmann::json;

namespace {

ClipIndex fixture_index(ModelGateway& gw) {
  return build_index(parse_clips_csv(json_io::read_text_file(testing::fixture_dir() / "clips.csv")), gw);
}

// Returns a fixed rerank answer, otherwise defers to the mock.
struct RerankOverride : Backend {
  std::shared_ptr<Backend> inner = std::make_shared<MockBackend>();
  Json results = Json::array();
  std::string fingerprint() const override { return "rr"; }
  Json complete(BackendKind kind, const StructuredRequest& r) override {
    if (r.task_tag == "rerank") return {{"results", results}};
    return inner->complete(kind, r);
  }
};

}  // namespace

TEST_SUITE("recommendation") {

TEST_CASE("csv parsing handles quotes, escaped quotes and CRLF") {
  const auto rows = parse_csv("a,\"b,c\",\"say \"\"hi\"\"\"\r\nd,,\"multi\nline\"\n");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == std::vector<std::string>{"a", "b,c", "say \"hi\""});
  CHECK(rows[1] == std::vector<std::string>{"d", "", "multi\nline"});
  CHECK_CODE(parse_csv("\"open"), ErrorCode::kParse);
}

TEST_CASE("clip csv validation") {
  const std::string header = "clip_id,title,description,tags,uri\n";
  const auto clips = parse_clips_csv(header + "c1,T,Desc,a;b;,u\n");
  REQUIRE(clips.size() == 1);
  CHECK(clips[0].tags == std::vector<std::string>{"a", "b"});
  CHECK_CODE(parse_clips_csv("id,title\n"), ErrorCode::kParse);
  CHECK_CODE(parse_clips_csv(header + "c1,T,,a,u\n"), ErrorCode::kParse);
  CHECK_CODE(parse_clips_csv(header + "c1,T,D\n"), ErrorCode::kParse);
  CHECK_CODE(parse_clips_csv(""), ErrorCode::kParse);
}

TEST_CASE("top-k matches a brute-force cosine ranking") {
  ModelGateway gw(std::make_shared<MockBackend>(), testing::fast_config());
  const auto index = fixture_index(gw);
  CHECK(index.clips.size() == 12);
  CHECK(index.dim() == MockBackend::kEmbeddingDim);
  std::mt19937 rng(3);
  std::normal_distribution<double> nd;
  for (int round = 0; round < 100; ++round) {
    std::vector<double> q(index.dim());
    for (auto& x : q) x = nd(rng);
    const auto got = rank_by_vector(q, index, 5);
    // oracle: score every clip, sort by (score desc, id asc)
    std::vector<std::pair<double, std::string>> all;
    for (const auto& [id, v] : index.vectors) {
      double dot = 0, a = 0, b = 0;
      for (std::size_t i = 0; i < v.size(); ++i) {
        dot += q[i] * v[i];
        a += q[i] * q[i];
        b += v[i] * v[i];
      }
      all.emplace_back(dot / std::sqrt(a * b), id);
    }
    std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
      return x.first != y.first ? x.first > y.first : x.second < y.second;
    });
    REQUIRE(got.size() == 5);
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].clip_id == all[i].second);
      CHECK(got[i].score == doctest::Approx(all[i].first).epsilon(1e-12));
    }
  }
  CHECK(rank_by_vector(std::vector<double>(index.dim(), 0.0), index, 3)[0].clip_id == "clip-001");
  CHECK_CODE(rank_by_vector(std::vector<double>(index.dim(), 1.0), index, 0), ErrorCode::kPrecondition);
  CHECK_CODE(cosine({1, 2}, {1}), ErrorCode::kPrecondition);
}

TEST_CASE("index persists and detects tampering") {
  testing::TempDir dir;
  ModelGateway gw(std::make_shared<MockBackend>(), testing::fast_config());
  const auto index = fixture_index(gw);
  save_index(index, dir.path());
  const auto back = load_index(dir.path());
  CHECK(back.clips == index.clips);
  CHECK(back.vectors == index.vectors);
  CHECK(back.fingerprint == index.fingerprint);

  auto doc = json_io::read_file(dir / kIndexFile);
  doc["clips"][0]["title"] = "changed";
  std::ofstream(dir / kIndexFile) << doc.dump();
  CHECK_CODE(load_index(dir.path()), ErrorCode::kHashMismatch);
  CHECK_CODE(build_index({}, gw), ErrorCode::kPrecondition);
}

TEST_CASE("rerank keeps to the candidate set, caps and pads") {
  auto backend = std::make_shared<RerankOverride>();
  backend->results = Json::array({{{"clip_id", "clip-999"}, {"explanation", "invented"}},
                                  {{"clip_id", "clip-002"}, {"explanation", "good"}},
                                  {{"clip_id", "clip-002"}, {"explanation", "dup"}},
                                  {{"clip_id", "clip-003"}, {"explanation", "fine"}}});
  ModelGateway gw(backend, testing::fast_config());
  const auto index = fixture_index(gw);
  const std::vector<Candidate> cands = {{"clip-001", 0.9}, {"clip-002", 0.8}, {"clip-003", 0.7}};
  auto out = rerank_filter("q", cands, index, gw, 0, 3);
  REQUIRE(out.size() == 2);
  CHECK(out[0].clip_id == "clip-002");
  CHECK(out[1].clip_id == "clip-003");
  CHECK(rerank_filter("q", cands, index, gw, 0, 1).size() == 1);
  out = rerank_filter("q", cands, index, gw, 3, 3);
  REQUIRE(out.size() == 3);
  CHECK(out[2].clip_id == "clip-001");
  CHECK(out[2].explanation.rfind("Closest match", 0) == 0);
  CHECK(rerank_filter("q", {}, index, gw, 0, 3).empty());
  CHECK_CODE(rerank_filter("q", cands, index, gw, 4, 3), ErrorCode::kPrecondition);
  CHECK_CODE(rerank_filter("q", {{"nope", 1.0}}, index, gw, 0, 3), ErrorCode::kPrecondition);
}

TEST_CASE("recommendations only for validated items") {
  ModelGateway gw(testing::fixture_backend(), testing::fast_config());
  const auto index = fixture_index(gw);
  const auto report = ava::report_from_json(json_io::read_file(testing::fixture_dir() / "golden/feedback.json"));
  CHECK_CODE(build_query(report.rejected.at(0), gw), ErrorCode::kPrecondition);
  const auto recs = recommend(report, index, gw);
  CHECK(recs.size() == report.items.size());
  for (const auto& r : recs) {
    CHECK(r.results.size() <= 3);
    CHECK_FALSE(r.query.empty());
  }
  const auto doc = recommendations_to_json("lesson30", index, recs);
  CHECK(SchemaRegistry::builtin().validate("artifact.recommendations.v1", doc).empty());
  CHECK(recommend(report, index, gw).size() == recs.size());
}

}
