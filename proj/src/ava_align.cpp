#include "classmind/ava_align.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include <spdlog/spdlog.h>

#include "classmind/failpoint.hpp"
#include "classmind/json_io.hpp"
#include "classmind/parallel.hpp"
#include "classmind/prompts.hpp"
#include "classmind/text.hpp"

namespace classmind::ava {

using Json = nlohmann::json;

std::string_view to_string(Polarity p) { return p == Polarity::kStrength ? "STRENGTH" : "WEAKNESS"; }

Polarity parse_polarity(std::string_view s) {
  if (s == "STRENGTH") return Polarity::kStrength;
  if (s == "WEAKNESS") return Polarity::kWeakness;
  fail(ErrorCode::kParse, "unknown polarity '" + std::string(s) + "'");
}

std::string_view to_string(FeedbackStatus s) {
  switch (s) {
    case FeedbackStatus::kValidated: return "VALIDATED";
    case FeedbackStatus::kRejected: return "REJECTED";
    case FeedbackStatus::kUnset: return "UNSET";
  }
  return "UNSET";
}

std::string FeedbackItem::full_text() const {
  return content + "\n" + observed_behaviors + "\n" + actionable_advice;
}

namespace {

std::string rubric_lines(const Rubric& rubric) {
  std::vector<std::string> lines;
  for (const auto& d : rubric.dimensions) {
    lines.push_back(d.dimension_id + " | " + d.title + " | " + text::join(d.indicators, "; "));
  }
  return text::join(lines, "\n");
}

std::string level_lines(const RubricDimension& d) {
  std::vector<std::string> lines;
  for (const auto& l : d.levels) lines.push_back(l.label + " | " + l.criteria);
  return text::join(lines, "\n");
}

std::string evidence_lines(const EvidenceBundle& evidence, const LessonTimeline* timeline,
                           const TimeInterval& interval) {
  std::vector<std::string> lines;
  if (timeline) {
    for (const auto& c : timeline->captions()) {
      if (c.interval.overlaps(interval)) {
        lines.push_back(prompts::line(c.interval, prompts::caption_source(c.segment_index), c.caption));
      }
    }
  } else {
    for (const auto& c : evidence.captions) lines.push_back(prompts::line(interval, "CAPTION", c));
  }
  for (const auto& t : evidence.turns) lines.push_back(prompts::line(t.interval, to_string(t.speaker), t.text));
  return text::join(lines, "\n");
}

std::string context_lines(const LessonTimeline& timeline) {
  std::vector<std::string> parts;
  for (const auto& d : timeline.context_docs()) {
    parts.push_back(std::string(to_string(d.kind)) + " | " + d.title + " | " +
                    text::abbreviate(text::collapse_whitespace(d.text), 600));
  }
  return parts.empty() ? std::string("(none provided)") : text::join(parts, "\n");
}

const RubricDimension& dimension_of(const Rubric& rubric, const std::string& id) {
  const auto* d = rubric.find(id);
  if (!d) fail(ErrorCode::kPrecondition, "dimension '" + id + "' is not in rubric " + rubric.rubric_id);
  return *d;
}

std::string feedback_id_for(const Hotspot& h) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%03zu", h.window_index);
  return "fb-" + std::string(buf) + "-" + h.dimension_id;
}

}  // namespace

EvidenceBundle evidence_for(const LessonTimeline& timeline, const TimeInterval& interval) {
  EvidenceBundle e;
  for (const auto& c : timeline.captions()) {
    if (c.interval.overlaps(interval)) e.captions.push_back(c.caption);
  }
  for (const auto& t : timeline.turns()) {
    if (t.interval.overlaps(interval)) e.turns.push_back(t);
  }
  return e;
}

std::vector<Hotspot> generate_hotspots(const LessonTimeline& timeline, const Rubric& rubric,
                                       ModelGateway& gateway, const PipelinePolicy& policy) {
  validate_rubric(rubric);
  std::vector<std::string> timeline_lines;
  for (const auto& e : timeline.merged_view()) {
    const auto source = e.kind == TimelineEntry::Kind::kCaption ? prompts::caption_source(e.source_index)
                                                               : std::string(to_string(*e.speaker));
    timeline_lines.push_back(prompts::line(e.interval, source, e.text));
  }
  const StructuredRequest req{
      "hotspots",
      {{std::string(prompts::kInstructions),
        "Read the merged, timestamped captions and transcript of the whole lesson. Identify segments "
        "where a strength or weakness may emerge for one of the rubric dimensions. For each, give the "
        "window interval, the dimension id, the polarity, a short summary of the surrounding context and "
        "the triggering excerpt."},
       {std::string(prompts::kRubric), rubric_lines(rubric)},
       {std::string(prompts::kContext), context_lines(timeline)},
       {std::string(prompts::kTimeline), text::join(timeline_lines, "\n")}},
      schema_ids::kHotspots,
      0};
  const auto response = gateway.generate(req);

  // Dedup on (window, dimension), keeping the longer excerpt.
  std::map<std::pair<std::size_t, std::string>, Hotspot> merged;
  const MediaTime zero;
  for (const auto& j : response.payload["hotspots"]) {
    const auto start = j["start_ms"].get<std::int64_t>();
    const auto end = j["end_ms"].get<std::int64_t>();
    const auto dim = j["dimension_id"].get<std::string>();
    if (!rubric.find(dim)) {
      spdlog::warn("dropping hotspot for unknown dimension '{}'", dim);
      continue;
    }
    if (end <= start || end > timeline.duration().ms()) {
      spdlog::warn("dropping hotspot with invalid interval {}..{} ms", start, end);
      continue;
    }
    const auto interval = TimeInterval::from_ms(start, end);
    if (!interval.within(zero, timeline.duration())) continue;
    Hotspot h{interval,
              timeline.window_index_at(interval.start()),
              dim,
              parse_polarity(j["polarity"].get<std::string>()),
              j["context_summary"].get<std::string>(),
              j["trigger_excerpt"].get<std::string>()};
    const auto key = std::make_pair(h.window_index, h.dimension_id);
    auto it = merged.find(key);
    if (it == merged.end()) {
      merged.emplace(key, std::move(h));
    } else if (h.trigger_excerpt.size() > it->second.trigger_excerpt.size()) {
      it->second = std::move(h);
    }
  }

  std::vector<Hotspot> all;
  for (auto& [_, h] : merged) all.push_back(std::move(h));
  std::stable_sort(all.begin(), all.end(), [](const Hotspot& a, const Hotspot& b) {
    if (a.interval.start() != b.interval.start()) return a.interval.start() < b.interval.start();
    return a.dimension_id < b.dimension_id;
  });
  std::map<std::string, std::size_t> per_dim;
  std::vector<Hotspot> out;
  for (auto& h : all) {
    if (out.size() >= policy.max_total) break;
    if (per_dim[h.dimension_id] >= policy.max_per_dimension) continue;
    ++per_dim[h.dimension_id];
    out.push_back(std::move(h));
  }
  return out;
}

std::vector<Guideline> generate_guidelines(const Hotspot& hotspot, std::size_t hotspot_index,
                                           const RubricDimension& dimension, ModelGateway& gateway) {
  require(hotspot.dimension_id == dimension.dimension_id,
          "hotspot dimension '" + hotspot.dimension_id + "' does not match '" + dimension.dimension_id + "'");
  const StructuredRequest req{
      "guidelines",
      {{std::string(prompts::kInstructions),
        "For this one segment and this one rubric dimension, write 1 to 5 short imperative guidelines "
        "naming observable behaviours a reviewer should check."},
       {std::string(prompts::kDimension), dimension.dimension_id + " | " + dimension.title},
       {std::string(prompts::kIndicators), text::join(dimension.indicators, "\n")},
       {std::string(prompts::kHotspot), prompts::stamp(hotspot.interval)},
       {std::string(prompts::kPolarity), std::string(to_string(hotspot.polarity))},
       {std::string(prompts::kContext), hotspot.context_summary},
       {std::string(prompts::kExcerpt), hotspot.trigger_excerpt}},
      schema_ids::kGuidelines,
      0};
  const auto response = gateway.generate(req);
  std::vector<Guideline> out;
  for (const auto& g : response.payload["guidelines"]) out.push_back({g.get<std::string>(), hotspot_index});
  return out;
}

FeedbackItem draft_feedback(const Hotspot& hotspot, std::size_t hotspot_index,
                            const std::vector<Guideline>& guidelines, const EvidenceBundle& evidence,
                            const RubricDimension& dimension, ModelGateway& gateway) {
  require(!evidence.empty(), "draft_feedback requires a non-empty evidence window");
  require(hotspot.dimension_id == dimension.dimension_id, "hotspot and rubric dimension differ");
  std::vector<std::string> guideline_text;
  for (const auto& g : guidelines) guideline_text.push_back(g.text);
  const StructuredRequest req{
      "feedback_draft",
      {{std::string(prompts::kInstructions),
        "Write rubric-aligned feedback for this segment: (1) content and rationale naming the rubric "
        "dimension and level, (2) observed behaviours quoting the evidence verbatim between \xC2\xAB and "
        "\xC2\xBB, (3) actionable advice."},
       {std::string(prompts::kDimension), dimension.dimension_id + " | " + dimension.title},
       {std::string(prompts::kLevels), level_lines(dimension)},
       {std::string(prompts::kPolarity), std::string(to_string(hotspot.polarity))},
       {std::string(prompts::kHotspot), prompts::stamp(hotspot.interval)},
       {std::string(prompts::kContext), hotspot.context_summary},
       {std::string(prompts::kExcerpt), hotspot.trigger_excerpt},
       {std::string(prompts::kGuidelines), text::join(guideline_text, "\n")},
       {std::string(prompts::kEvidence), evidence_lines(evidence, nullptr, hotspot.interval)}},
      schema_ids::kFeedbackDraft,
      0};
  const auto response = gateway.generate(req);
  FeedbackItem item;
  item.feedback_id = feedback_id_for(hotspot);
  item.hotspot_index = hotspot_index;
  item.dimension_id = dimension.dimension_id;
  item.dimension_title = dimension.title;
  item.interval = hotspot.interval;
  item.polarity = hotspot.polarity;
  item.guidelines = guideline_text;
  item.content = response.payload["content"].get<std::string>();
  item.observed_behaviors = response.payload["observed_behaviors"].get<std::string>();
  item.actionable_advice = response.payload["actionable_advice"].get<std::string>();
  if (text::quoted_spans(item.observed_behaviors).empty()) {
    throw SchemaViolation("draft for " + item.feedback_id + " quotes no evidence span", 1);
  }
  if (item.content.find(dimension.title) == std::string::npos) {
    item.content = dimension.title + ": " + item.content;
  }
  return item;
}

FeedbackItem refine_feedback(FeedbackItem item, const RubricDimension& dimension, ModelGateway& gateway) {
  const StructuredRequest req{
      "refine_feedback",
      {{std::string(prompts::kInstructions),
        "Refine this feedback item: keep it specific to the segment, consistent with the rubric "
        "dimension, and end with actionable advice. Do not alter quoted evidence."},
       {std::string(prompts::kDimension), dimension.dimension_id + " | " + dimension.title},
       {std::string(prompts::kContent), item.content},
       {std::string(prompts::kObserved), item.observed_behaviors},
       {std::string(prompts::kAdvice), item.actionable_advice}},
      schema_ids::kFeedbackDraft,
      0};
  const auto response = gateway.generate(req);
  item.content = response.payload["content"].get<std::string>();
  item.observed_behaviors = response.payload["observed_behaviors"].get<std::string>();
  item.actionable_advice = response.payload["actionable_advice"].get<std::string>();
  if (item.content.find(dimension.title) == std::string::npos) {
    item.content = dimension.title + ": " + item.content;
  }
  return item;
}

FeedbackItem validate_feedback(FeedbackItem item, const EvidenceBundle& evidence, ModelGateway& gateway) {
  auto verdict = gateway.validate(item.full_text(), evidence);
  item.status = verdict.consistent ? FeedbackStatus::kValidated : FeedbackStatus::kRejected;
  item.validation = std::move(verdict);
  return item;
}

void assemble(FeedbackReport& report, std::vector<FeedbackItem> items) {
  auto order = [](const FeedbackItem& a, const FeedbackItem& b) {
    if (a.polarity != b.polarity) return a.polarity == Polarity::kStrength;
    if (a.interval.start() != b.interval.start()) return a.interval.start() < b.interval.start();
    return a.feedback_id < b.feedback_id;
  };
  std::sort(items.begin(), items.end(), order);
  report.items.clear();
  report.rejected.clear();
  for (auto& item : items) {
    if (item.status == FeedbackStatus::kValidated) {
      report.items.push_back(std::move(item));
    } else if (item.status == FeedbackStatus::kRejected) {
      report.rejected.push_back(std::move(item));
    } else {
      fail(ErrorCode::kPrecondition, "item " + item.feedback_id + " was never validated");
    }
  }
}

namespace {

bool fingerprint_matches(const std::optional<Json>& doc, const std::string& fingerprint) {
  return doc && doc->is_object() && doc->value("inputs_fingerprint", "") == fingerprint;
}

}  // namespace

FeedbackReport run_pipeline(const PipelineInputs& in, ModelGateway& gateway, const PipelinePolicy& policy,
                            CheckpointSink* checkpoints, int parallelism) {
  const auto& timeline = in.timeline;
  const auto& rubric = in.rubric;
  validate_rubric(rubric);

  std::vector<Hotspot> hotspots;
  std::optional<Json> saved = checkpoints ? checkpoints->load(kHotspotsArtifact) : std::nullopt;
  if (fingerprint_matches(saved, in.inputs_fingerprint)) {
    const auto& arr = (*saved)["hotspots"];
    for (std::size_t i = 0; i < arr.size(); ++i) {
      hotspots.push_back(hotspot_from_json(arr[i], "hotspots[" + std::to_string(i) + "]"));
    }
    spdlog::info("resuming from checkpoint {} ({} hotspots)", kHotspotsArtifact, hotspots.size());
  } else {
    hotspots = generate_hotspots(timeline, rubric, gateway, policy);
    if (checkpoints) {
      checkpoints->save(kHotspotsArtifact,
                        hotspots_document(timeline.lesson_id(), rubric.rubric_id, in.inputs_fingerprint, hotspots));
    }
  }
  failpoint::hit("analyze:after_hotspots");

  std::vector<FeedbackItem> drafts(hotspots.size());
  saved = checkpoints ? checkpoints->load(kDraftArtifact) : std::nullopt;
  if (fingerprint_matches(saved, in.inputs_fingerprint) && (*saved)["items"].size() == hotspots.size()) {
    const auto& arr = (*saved)["items"];
    for (std::size_t i = 0; i < arr.size(); ++i) {
      drafts[i] = feedback_item_from_json(arr[i], "items[" + std::to_string(i) + "]");
    }
    spdlog::info("resuming from checkpoint {} ({} drafts)", kDraftArtifact, drafts.size());
  } else {
    // One segment and one dimension per call.
    parallel_for(hotspots.size(), parallelism, [&](std::size_t i) {
      const auto& h = hotspots[i];
      const auto& dim = dimension_of(rubric, h.dimension_id);
      const auto evidence = evidence_for(timeline, h.interval);
      const auto guidelines = generate_guidelines(h, i, dim, gateway);
      auto item = draft_feedback(h, i, guidelines, evidence, dim, gateway);
      if (policy.refine) item = refine_feedback(std::move(item), dim, gateway);
      drafts[i] = std::move(item);
    });
    if (checkpoints) {
      checkpoints->save(kDraftArtifact,
                        drafts_document(timeline.lesson_id(), rubric.rubric_id, in.inputs_fingerprint, drafts));
    }
  }
  failpoint::hit("analyze:after_drafts");

  std::vector<FeedbackItem> checked(drafts.size());
  parallel_for(drafts.size(), parallelism, [&](std::size_t i) {
    checked[i] = validate_feedback(drafts[i], evidence_for(timeline, drafts[i].interval), gateway);
  });

  FeedbackReport report{timeline.lesson_id(), rubric.rubric_id, in.inputs_fingerprint, in.generated_at, {}, {}};
  assemble(report, std::move(checked));
  return report;
}

bool is_grounded(const FeedbackItem& item, const LessonTimeline& timeline) {
  const auto spans = text::quoted_spans(item.observed_behaviors);
  if (spans.empty()) return false;
  const auto evidence = evidence_for(timeline, item.interval);
  for (const auto& span : spans) {
    bool found = std::any_of(evidence.captions.begin(), evidence.captions.end(),
                             [&](const std::string& c) { return c.find(span) != std::string::npos; });
    found = found || std::any_of(evidence.turns.begin(), evidence.turns.end(), [&](const TranscriptTurn& t) {
              return t.text.find(span) != std::string::npos;
            });
    if (!found) return false;
  }
  return true;
}

Json to_json(const Hotspot& h) {
  Json j;
  json_io::put_interval(j, h.interval);
  j["window_index"] = h.window_index;
  j["dimension_id"] = h.dimension_id;
  j["polarity"] = std::string(to_string(h.polarity));
  j["context_summary"] = h.context_summary;
  j["trigger_excerpt"] = h.trigger_excerpt;
  return j;
}

Hotspot hotspot_from_json(const Json& j, const std::string& path) {
  return {json_io::read_interval(j, path),
          static_cast<std::size_t>(json_io::get_int(j, "window_index", path)),
          json_io::get_string(j, "dimension_id", path),
          parse_polarity(json_io::get_string(j, "polarity", path)),
          json_io::get_string(j, "context_summary", path),
          json_io::get_string(j, "trigger_excerpt", path)};
}

Json to_json(const FeedbackItem& item) {
  Json j;
  json_io::put_interval(j, item.interval);
  j["feedback_id"] = item.feedback_id;
  j["hotspot_index"] = item.hotspot_index;
  j["dimension_id"] = item.dimension_id;
  j["dimension_title"] = item.dimension_title;
  j["polarity"] = std::string(to_string(item.polarity));
  j["guidelines"] = item.guidelines;
  j["content"] = item.content;
  j["observed_behaviors"] = item.observed_behaviors;
  j["actionable_advice"] = item.actionable_advice;
  if (item.validation) {
    j["validation"] = {{"consistent", item.validation->consistent}, {"rationale", item.validation->rationale}};
  }
  if (item.status != FeedbackStatus::kUnset) j["status"] = std::string(to_string(item.status));
  return j;
}

FeedbackItem feedback_item_from_json(const Json& j, const std::string& path) {
  FeedbackItem item;
  item.interval = json_io::read_interval(j, path);
  item.feedback_id = json_io::get_string(j, "feedback_id", path);
  item.hotspot_index = static_cast<std::size_t>(json_io::get_int(j, "hotspot_index", path));
  item.dimension_id = json_io::get_string(j, "dimension_id", path);
  item.dimension_title = json_io::get_string(j, "dimension_title", path);
  item.polarity = parse_polarity(json_io::get_string(j, "polarity", path));
  item.guidelines = json_io::get_string_list(j, "guidelines", path);
  item.content = json_io::get_string(j, "content", path);
  item.observed_behaviors = json_io::get_string(j, "observed_behaviors", path);
  item.actionable_advice = json_io::get_string(j, "actionable_advice", path);
  if (j.contains("validation")) {
    const auto& v = j["validation"];
    item.validation = ValidationVerdict{v.at("consistent").get<bool>(), v.at("rationale").get<std::string>()};
  }
  const auto status = json_io::get_string_or(j, "status", "UNSET");
  if (status == "VALIDATED") {
    item.status = FeedbackStatus::kValidated;
  } else if (status == "REJECTED") {
    item.status = FeedbackStatus::kRejected;
  }
  return item;
}

Json hotspots_document(const std::string& lesson_id, const std::string& rubric_id,
                       const std::string& fingerprint, const std::vector<Hotspot>& hotspots) {
  Json doc{{"schema_version", json_io::kSchemaVersion},
           {"lesson_id", lesson_id},
           {"rubric_id", rubric_id},
           {"inputs_fingerprint", fingerprint},
           {"hotspots", Json::array()}};
  for (const auto& h : hotspots) doc["hotspots"].push_back(to_json(h));
  return doc;
}

Json drafts_document(const std::string& lesson_id, const std::string& rubric_id,
                     const std::string& fingerprint, const std::vector<FeedbackItem>& drafts) {
  Json doc{{"schema_version", json_io::kSchemaVersion},
           {"lesson_id", lesson_id},
           {"rubric_id", rubric_id},
           {"inputs_fingerprint", fingerprint},
           {"items", Json::array()}};
  for (const auto& d : drafts) doc["items"].push_back(to_json(d));
  return doc;
}

Json report_to_json(const FeedbackReport& report) {
  Json doc{{"schema_version", json_io::kSchemaVersion},
           {"lesson_id", report.lesson_id},
           {"rubric_id", report.rubric_id},
           {"inputs_fingerprint", report.inputs_fingerprint},
           {"generated_at", report.generated_at},
           {"items", Json::array()},
           {"rejected", Json::array()}};
  for (const auto& i : report.items) doc["items"].push_back(to_json(i));
  for (const auto& i : report.rejected) doc["rejected"].push_back(to_json(i));
  return doc;
}

FeedbackReport report_from_json(const Json& doc) {
  json_io::check_schema_version(doc, "feedback");
  FeedbackReport r;
  r.lesson_id = json_io::get_string(doc, "lesson_id", "feedback");
  r.rubric_id = json_io::get_string(doc, "rubric_id", "feedback");
  r.inputs_fingerprint = json_io::get_string_or(doc, "inputs_fingerprint", "");
  r.generated_at = json_io::get_string(doc, "generated_at", "feedback");
  const auto& items = json_io::field(doc, "items", "feedback");
  for (std::size_t i = 0; i < items.size(); ++i) {
    r.items.push_back(feedback_item_from_json(items[i], "feedback.items[" + std::to_string(i) + "]"));
  }
  const auto& rejected = json_io::field(doc, "rejected", "feedback");
  for (std::size_t i = 0; i < rejected.size(); ++i) {
    r.rejected.push_back(feedback_item_from_json(rejected[i], "feedback.rejected[" + std::to_string(i) + "]"));
  }
  return r;
}

}  // namespace classmind::ava
