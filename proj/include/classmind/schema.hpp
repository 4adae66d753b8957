#pragma once

#include <map>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

namespace classmind {

// Validator for the JSON Schema subset used by response and artifact schemas:
// type, properties, required, additionalProperties (bool), items, enum,
// minLength, minItems, maxItems, minimum, maximum.
std::vector<std::string> validate_against(const nlohmann::json& schema,
                                          const nlohmann::json& value);

class SchemaRegistry {
 public:
  // Registry preloaded with every schema the engine publishes.
  static SchemaRegistry& builtin();

  void add(const std::string& id, nlohmann::json schema);
  bool contains(const std::string& id) const;
  const nlohmann::json& get(const std::string& id) const;  // throws kSchemaViolation if unknown
  std::vector<std::string> validate(const std::string& id, const nlohmann::json& value) const;
  std::vector<std::string> ids() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, nlohmann::json> schemas_;
};

namespace schema_ids {
inline constexpr const char* kCaption = "caption.v1";
inline constexpr const char* kHotspots = "hotspots.v1";
inline constexpr const char* kGuidelines = "guidelines.v1";
inline constexpr const char* kFeedbackDraft = "feedback_draft.v1";
inline constexpr const char* kVerdict = "verdict.v1";
inline constexpr const char* kEmbedding = "embedding.v1";
inline constexpr const char* kActivities = "activities.v1";
inline constexpr const char* kBloom = "bloom.v1";
inline constexpr const char* kOutline = "outline.v1";
inline constexpr const char* kSearchQuery = "search_query.v1";
inline constexpr const char* kRerank = "rerank.v1";
}  // namespace schema_ids

}  // namespace classmind
