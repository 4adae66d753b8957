#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "classmind/ava_align.hpp"
#include "classmind/gateway.hpp"

namespace classmind::recommendation {

struct ExemplarClip {
  std::string clip_id;
  std::string title;
  std::string description;
  std::vector<std::string> tags;
  std::string uri;

  friend bool operator==(const ExemplarClip&, const ExemplarClip&) = default;
};

struct ClipIndex {
  std::vector<ExemplarClip> clips;  // sorted by clip_id
  std::map<std::string, std::vector<double>> vectors;
  std::string embedder;  // backend fingerprint used for the vectors
  std::string fingerprint;

  const ExemplarClip* find(std::string_view clip_id) const;
  std::size_t dim() const;
};

// Every clip has a non-empty description, ids are unique and each has a
// vector of the common dimension.
void validate_index(const ClipIndex& index);

// CSV with header clip_id,title,description,tags,uri. Tags are ';'-separated.
// Quoted fields follow RFC 4180.
std::vector<ExemplarClip> parse_clips_csv(std::string_view csv, const std::string& source = "clips.csv");
std::vector<std::vector<std::string>> parse_csv(std::string_view csv);

ClipIndex build_index(std::vector<ExemplarClip> clips, ModelGateway& gateway, int parallelism = 4);

inline constexpr const char* kIndexFile = "index.json";
inline constexpr const char* kVectorsFile = "vectors.json";

// Writes index.json and vectors.json atomically.
void save_index(const ClipIndex& index, const std::filesystem::path& dir);
ClipIndex load_index(const std::filesystem::path& dir);

struct Candidate {
  std::string clip_id;
  double score = 0.0;
};

struct RecommendationResult {
  std::string clip_id;
  double score = 0.0;
  std::string explanation;
};

double cosine(const std::vector<double>& a, const std::vector<double>& b);

std::string build_query(const ava::FeedbackItem& item, ModelGateway& gateway);

// Exact brute force; ties by ascending clip_id.
std::vector<Candidate> rank_by_vector(const std::vector<double>& query, const ClipIndex& index, std::size_t k);
std::vector<Candidate> retrieve_top_k(const std::string& query, const ClipIndex& index, ModelGateway& gateway,
                                      std::size_t k = 10);

// Keeps at most max_results candidates chosen by the reranker. When fewer
// than min_results survive, the best remaining candidates by cosine are
// appended with a generic explanation.
std::vector<RecommendationResult> rerank_filter(const std::string& query, const std::vector<Candidate>& candidates,
                                                const ClipIndex& index, ModelGateway& gateway,
                                                std::size_t min_results = 0, std::size_t max_results = 3);

struct Recommendation {
  std::string feedback_id;
  std::string dimension_id;
  std::string query;
  std::vector<RecommendationResult> results;
};

struct RecommendOptions {
  std::size_t k = 10;
  std::size_t min_results = 0;
  std::size_t max_results = 3;
  int parallelism = 4;
};

std::vector<Recommendation> recommend(const ava::FeedbackReport& report, const ClipIndex& index,
                                      ModelGateway& gateway, const RecommendOptions& options = {});

nlohmann::json recommendations_to_json(const std::string& lesson_id, const ClipIndex& index,
                                       const std::vector<Recommendation>& recs);

inline constexpr const char* kRecommendationsArtifact = "recommendations.json";

}  // namespace classmind::recommendation
