#include "classmind/recommendation.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "classmind/fsutil.hpp"
#include "classmind/hashing.hpp"
#include "classmind/json_io.hpp"
#include "classmind/parallel.hpp"
#include "classmind/prompts.hpp"
#include "classmind/text.hpp"

namespace classmind::recommendation {

using Json = nlohmann::json;

const ExemplarClip* ClipIndex::find(std::string_view clip_id) const {
  const auto it = std::lower_bound(clips.begin(), clips.end(), clip_id,
                                   [](const ExemplarClip& c, std::string_view id) { return c.clip_id < id; });
  return it != clips.end() && it->clip_id == clip_id ? &*it : nullptr;
}

std::size_t ClipIndex::dim() const { return vectors.empty() ? 0 : vectors.begin()->second.size(); }

void validate_index(const ClipIndex& index) {
  std::set<std::string> seen;
  const auto d = index.dim();
  for (const auto& c : index.clips) {
    if (!seen.insert(c.clip_id).second) fail(ErrorCode::kParse, "duplicate clip_id " + c.clip_id);
    if (text::trim(c.description).empty()) fail(ErrorCode::kParse, "clip " + c.clip_id + " has no description");
    const auto it = index.vectors.find(c.clip_id);
    if (it == index.vectors.end() || it->second.size() != d || d == 0) {
      fail(ErrorCode::kParse, "clip " + c.clip_id + " has no vector of dim " + std::to_string(d));
    }
  }
  if (index.vectors.size() != index.clips.size()) fail(ErrorCode::kParse, "index has vectors for unknown clips");
}

std::vector<std::vector<std::string>> parse_csv(std::string_view csv) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string cell;
  bool quoted = false;
  bool row_has_data = false;
  for (std::size_t i = 0; i < csv.size(); ++i) {
    const char c = csv[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < csv.size() && csv[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      row_has_data = true;
    } else if (c == ',') {
      row.push_back(std::move(cell));
      cell.clear();
      row_has_data = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < csv.size() && csv[i + 1] == '\n') ++i;
      if (row_has_data || !cell.empty()) {
        row.push_back(std::move(cell));
        rows.push_back(std::move(row));
      }
      row.clear();
      cell.clear();
      row_has_data = false;
    } else {
      cell += c;
      row_has_data = true;
    }
  }
  if (quoted) fail(ErrorCode::kParse, "csv: unterminated quoted field");
  if (row_has_data || !cell.empty()) {
    row.push_back(std::move(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ExemplarClip> parse_clips_csv(std::string_view csv, const std::string& source) {
  const auto rows = parse_csv(csv);
  if (rows.empty()) fail(ErrorCode::kParse, source + ": empty file");
  const std::vector<std::string> header{"clip_id", "title", "description", "tags", "uri"};
  std::vector<std::string> got;
  for (const auto& h : rows[0]) got.push_back(text::trim(h));
  if (got != header) fail(ErrorCode::kParse, source + ":1: expected header clip_id,title,description,tags,uri");
  std::vector<ExemplarClip> clips;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto where = source + ":" + std::to_string(r + 1);
    if (rows[r].size() != header.size()) {
      fail(ErrorCode::kParse, where + ": expected 5 fields, got " + std::to_string(rows[r].size()));
    }
    ExemplarClip c{text::trim(rows[r][0]), text::trim(rows[r][1]), text::trim(rows[r][2]), {}, text::trim(rows[r][4])};
    if (c.clip_id.empty()) fail(ErrorCode::kParse, where + ": clip_id is empty");
    if (c.description.empty()) fail(ErrorCode::kParse, where + ": description is empty");
    std::string_view tags = rows[r][3];
    std::size_t pos = 0;
    while (pos <= tags.size()) {
      auto semi = tags.find(';', pos);
      if (semi == std::string_view::npos) semi = tags.size();
      auto tag = text::trim(tags.substr(pos, semi - pos));
      if (!tag.empty()) c.tags.push_back(std::move(tag));
      pos = semi + 1;
    }
    clips.push_back(std::move(c));
  }
  return clips;
}

namespace {

Json clip_to_json(const ExemplarClip& c) {
  return {{"clip_id", c.clip_id}, {"title", c.title}, {"description", c.description}, {"tags", c.tags}, {"uri", c.uri}};
}

std::string index_fingerprint(const std::vector<ExemplarClip>& clips, const std::string& embedder) {
  Json j{{"embedder", embedder}, {"clips", Json::array()}};
  for (const auto& c : clips) j["clips"].push_back(clip_to_json(c));
  return sha256_hex(j.dump());
}

std::string clip_text(const ExemplarClip& c) {
  return c.title + ". " + c.description + (c.tags.empty() ? "" : " Tags: " + text::join(c.tags, ", ") + ".");
}

}  // namespace

ClipIndex build_index(std::vector<ExemplarClip> clips, ModelGateway& gateway, int parallelism) {
  std::sort(clips.begin(), clips.end(), [](const auto& a, const auto& b) { return a.clip_id < b.clip_id; });
  for (std::size_t i = 1; i < clips.size(); ++i) {
    if (clips[i].clip_id == clips[i - 1].clip_id) fail(ErrorCode::kParse, "duplicate clip_id " + clips[i].clip_id);
  }
  if (clips.empty()) fail(ErrorCode::kPrecondition, "cannot build an empty clip index");
  std::vector<std::vector<double>> vecs(clips.size());
  parallel_for(clips.size(), parallelism, [&](std::size_t i) { vecs[i] = gateway.embed(clip_text(clips[i])).values; });
  ClipIndex index;
  index.embedder = gateway.backend_fingerprint();
  for (std::size_t i = 0; i < clips.size(); ++i) index.vectors[clips[i].clip_id] = std::move(vecs[i]);
  index.fingerprint = index_fingerprint(clips, index.embedder);
  index.clips = std::move(clips);
  validate_index(index);
  return index;
}

void save_index(const ClipIndex& index, const std::filesystem::path& dir) {
  validate_index(index);
  std::filesystem::create_directories(dir);
  Json doc{{"schema_version", json_io::kSchemaVersion},
           {"embedder", index.embedder},
           {"fingerprint", index.fingerprint},
           {"dim", index.dim()},
           {"clips", Json::array()}};
  for (const auto& c : index.clips) doc["clips"].push_back(clip_to_json(c));
  Json vectors = Json::object();
  for (const auto& [id, v] : index.vectors) vectors[id] = v;
  // Vectors first: a reader keys on index.json, which must never point at
  // a missing or stale sidecar.
  fsutil::write_atomic(dir / kVectorsFile, json_io::dump_compact(vectors) + "\n");
  fsutil::write_atomic(dir / kIndexFile, json_io::dump_artifact(doc));
}

ClipIndex load_index(const std::filesystem::path& dir) {
  const auto doc = json_io::read_file(dir / kIndexFile);
  json_io::check_schema_version(doc, "index");
  ClipIndex index;
  index.embedder = json_io::get_string(doc, "embedder", "index");
  index.fingerprint = json_io::get_string(doc, "fingerprint", "index");
  const auto& clips = json_io::field(doc, "clips", "index");
  for (std::size_t i = 0; i < clips.size(); ++i) {
    const auto path = "index.clips[" + std::to_string(i) + "]";
    index.clips.push_back({json_io::get_string(clips[i], "clip_id", path), json_io::get_string(clips[i], "title", path),
                           json_io::get_string(clips[i], "description", path),
                           json_io::get_string_list(clips[i], "tags", path), json_io::get_string(clips[i], "uri", path)});
  }
  std::sort(index.clips.begin(), index.clips.end(), [](const auto& a, const auto& b) { return a.clip_id < b.clip_id; });
  const auto vectors = json_io::read_file(dir / kVectorsFile);
  for (const auto& [id, v] : vectors.items()) index.vectors[id] = v.get<std::vector<double>>();
  if (index_fingerprint(index.clips, index.embedder) != index.fingerprint) {
    fail(ErrorCode::kHashMismatch, "index fingerprint does not match its clips");
  }
  validate_index(index);
  return index;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  require(a.size() == b.size(), "cosine of vectors with different dims");
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::string build_query(const ava::FeedbackItem& item, ModelGateway& gateway) {
  require(item.status == ava::FeedbackStatus::kValidated,
          "build_query requires a VALIDATED item; " + item.feedback_id + " is " + std::string(to_string(item.status)));
  const StructuredRequest req{
      "search_query",
      {{std::string(prompts::kInstructions),
        "Write a short search query for exemplar classroom videos that model the advice below."},
       {std::string(prompts::kDimension), item.dimension_id + " | " + item.dimension_title},
       {std::string(prompts::kContent), item.content},
       {std::string(prompts::kAdvice), item.actionable_advice}},
      schema_ids::kSearchQuery,
      0};
  auto q = text::trim(gateway.generate(req).payload["query"].get<std::string>());
  if (q.empty()) throw SchemaViolation("search query is empty", 1);
  return q;
}

std::vector<Candidate> rank_by_vector(const std::vector<double>& query, const ClipIndex& index, std::size_t k) {
  require(!index.clips.empty(), "retrieval needs a non-empty index");
  require(k >= 1, "k must be >= 1");
  std::vector<Candidate> all;
  all.reserve(index.clips.size());
  for (const auto& c : index.clips) all.push_back({c.clip_id, cosine(query, index.vectors.at(c.clip_id))});
  std::sort(all.begin(), all.end(), [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.clip_id < b.clip_id;
  });
  if (all.size() > k) all.resize(k);
  return all;
}

std::vector<Candidate> retrieve_top_k(const std::string& query, const ClipIndex& index, ModelGateway& gateway,
                                      std::size_t k) {
  return rank_by_vector(gateway.embed(query).values, index, k);
}

namespace {

std::string score_text(double s) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", s);
  return buf;
}

}  // namespace

std::vector<RecommendationResult> rerank_filter(const std::string& query, const std::vector<Candidate>& candidates,
                                                const ClipIndex& index, ModelGateway& gateway,
                                                std::size_t min_results, std::size_t max_results) {
  require(min_results <= max_results, "min_results must be <= max_results");
  if (candidates.empty() || max_results == 0) return {};
  std::vector<std::string> lines;
  for (const auto& c : candidates) {
    const auto* clip = index.find(c.clip_id);
    require(clip != nullptr, "candidate " + c.clip_id + " is not in the index");
    lines.push_back(c.clip_id + " | " + score_text(c.score) + " | " + clip->title + " | " +
                    text::collapse_whitespace(clip->description));
  }
  const StructuredRequest req{
      "rerank",
      {{std::string(prompts::kInstructions),
        "Keep only candidates that illustrate the query, best first, each with one sentence on its "
        "pedagogical significance."},
       {std::string(prompts::kQuery), query},
       {std::string(prompts::kCandidates), text::join(lines, "\n")}},
      schema_ids::kRerank,
      0};
  const auto response = gateway.generate(req);
  std::vector<RecommendationResult> out;
  std::set<std::string> used;
  for (const auto& r : response.payload["results"]) {
    if (out.size() >= max_results) break;
    const auto id = r["clip_id"].get<std::string>();
    const auto it = std::find_if(candidates.begin(), candidates.end(), [&](const Candidate& c) { return c.clip_id == id; });
    // The reranker may only choose among the candidates it was shown.
    if (it == candidates.end() || !used.insert(id).second) continue;
    out.push_back({id, it->score, r["explanation"].get<std::string>()});
  }
  for (const auto& c : candidates) {
    if (out.size() >= min_results) break;
    if (!used.insert(c.clip_id).second) continue;
    out.push_back({c.clip_id, c.score, "Closest match by description similarity (" + score_text(c.score) + ")."});
  }
  return out;
}

std::vector<Recommendation> recommend(const ava::FeedbackReport& report, const ClipIndex& index,
                                      ModelGateway& gateway, const RecommendOptions& options) {
  validate_index(index);
  std::vector<Recommendation> out(report.items.size());
  parallel_for(report.items.size(), options.parallelism, [&](std::size_t i) {
    const auto& item = report.items[i];
    auto query = build_query(item, gateway);
    const auto candidates = retrieve_top_k(query, index, gateway, options.k);
    auto results = rerank_filter(query, candidates, index, gateway, options.min_results, options.max_results);
    out[i] = {item.feedback_id, item.dimension_id, std::move(query), std::move(results)};
  });
  return out;
}

Json recommendations_to_json(const std::string& lesson_id, const ClipIndex& index,
                             const std::vector<Recommendation>& recs) {
  Json doc{{"schema_version", json_io::kSchemaVersion},
           {"lesson_id", lesson_id},
           {"index_fingerprint", index.fingerprint},
           {"recommendations", Json::array()}};
  for (const auto& r : recs) {
    Json results = Json::array();
    for (const auto& res : r.results) {
      const auto* clip = index.find(res.clip_id);
      // Scores are rounded so the artifact does not depend on libm's last bit.
      results.push_back({{"clip_id", res.clip_id},
                         {"title", clip->title},
                         {"uri", clip->uri},
                         {"score", std::round(res.score * 1e6) / 1e6},
                         {"explanation", res.explanation}});
    }
    doc["recommendations"].push_back(
        {{"feedback_id", r.feedback_id}, {"dimension_id", r.dimension_id}, {"query", r.query}, {"results", results}});
  }
  return doc;
}

}  // namespace classmind::recommendation
