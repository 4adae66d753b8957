#include "classmind/annotations.hpp"

#include <algorithm>
#include <map>

#include "classmind/json_io.hpp"
#include "classmind/parallel.hpp"
#include "classmind/prompts.hpp"
#include "classmind/text.hpp"

namespace classmind::annotations {

using Json = nlohmann::json;

std::string_view to_string(Actor a) { return a == Actor::kTeacher ? "TEACHER" : "STUDENT"; }

Actor parse_actor(std::string_view s) {
  if (s == "TEACHER") return Actor::kTeacher;
  if (s == "STUDENT") return Actor::kStudent;
  fail(ErrorCode::kParse, "unknown actor '" + std::string(s) + "'");
}

const TaxonomyCode* Taxonomy::find(std::string_view code) const {
  for (const auto& c : codes) {
    if (c.code == code) return &c;
  }
  return nullptr;
}

void validate_taxonomy(const Taxonomy& taxonomy) {
  if (taxonomy.codes.empty()) fail(ErrorCode::kPrecondition, "taxonomy has no codes");
  std::set<std::string> seen;
  for (const auto& c : taxonomy.codes) {
    if (!seen.insert(c.code).second) fail(ErrorCode::kParse, "duplicate taxonomy code " + c.code);
    const auto prefix = std::string(to_string(c.actor)) + "_";
    if (c.code.rfind(prefix, 0) != 0) {
      fail(ErrorCode::kParse, "code " + c.code + " does not match actor " + std::string(to_string(c.actor)));
    }
  }
}

Taxonomy default_taxonomy() {
  return {"copus-default",
          {{"TEACHER_LECTURING", Actor::kTeacher, "Lecturing or presenting content"},
           {"TEACHER_WRITING", Actor::kTeacher, "Real-time writing on the board or projector"},
           {"TEACHER_QA", Actor::kTeacher, "Posing or answering questions"},
           {"TEACHER_ONE_ON_ONE", Actor::kTeacher, "Extended discussion with one student or group"},
           {"STUDENT_LISTENING", Actor::kStudent, "Listening to the teacher or taking notes"},
           {"STUDENT_GROUP_WORK", Actor::kStudent, "Working in groups on an assigned task"},
           {"STUDENT_QA", Actor::kStudent, "Asking or answering a question"},
           {"STUDENT_PRESENTING", Actor::kStudent, "Presenting to the class"}}};
}

Taxonomy taxonomy_from_json(const Json& doc) {
  Taxonomy t;
  t.taxonomy_id = json_io::get_string(doc, "taxonomy_id", "taxonomy");
  const auto& codes = json_io::field(doc, "codes", "taxonomy");
  if (!codes.is_array()) fail(ErrorCode::kParse, "taxonomy.codes: expected an array");
  for (std::size_t i = 0; i < codes.size(); ++i) {
    const auto path = "taxonomy.codes[" + std::to_string(i) + "]";
    t.codes.push_back({json_io::get_string(codes[i], "code", path),
                       parse_actor(json_io::get_string(codes[i], "actor", path)),
                       json_io::get_string_or(codes[i], "description", "")});
  }
  validate_taxonomy(t);
  return t;
}

Taxonomy load_taxonomy(const std::filesystem::path& path) { return taxonomy_from_json(json_io::read_file(path)); }

namespace {

std::vector<std::string> whitespace_tokens(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const auto b = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > b) out.emplace_back(s.substr(b, i - b));
  }
  return out;
}

}  // namespace

std::vector<SentenceSpan> sentence_spans(const TranscriptTurn& turn) {
  const auto sentences = text::split_sentences(turn.text);
  std::vector<SentenceSpan> out;
  const bool aligned = !turn.words.empty() && turn.words.size() == whitespace_tokens(turn.text).size();
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    auto interval = turn.interval;
    if (aligned) {
      const auto first = whitespace_tokens(std::string_view(turn.text).substr(0, sentences[s].begin)).size();
      const auto next = s + 1 < sentences.size()
                            ? whitespace_tokens(std::string_view(turn.text).substr(0, sentences[s + 1].begin)).size()
                            : turn.words.size();
      if (first < turn.words.size()) {
        const auto start = turn.words[first].time;
        const auto end = next < turn.words.size() ? turn.words[next].time : turn.interval.end();
        if (start < end) interval = TimeInterval(start, end);
      }
    }
    out.push_back({sentences[s].text, interval});
  }
  return out;
}

std::vector<ActivitySpan> merge_activity_records(const std::vector<LabelRecord>& records,
                                                 const Taxonomy& taxonomy) {
  std::vector<ActivitySpan> out;
  for (const auto actor : {Actor::kTeacher, Actor::kStudent}) {
    std::vector<const LabelRecord*> mine;
    std::vector<std::int64_t> cuts;
    for (const auto& r : records) {
      const auto* c = taxonomy.find(r.code);
      if (!c) fail(ErrorCode::kUnknownCode, "activity code '" + r.code + "' is not in " + taxonomy.taxonomy_id);
      if (c->actor != actor) continue;
      mine.push_back(&r);
      cuts.push_back(r.interval.start_ms());
      cuts.push_back(r.interval.end_ms());
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      std::set<std::string> labels;
      for (const auto* r : mine) {
        if (r->interval.start_ms() <= cuts[i] && cuts[i + 1] <= r->interval.end_ms()) labels.insert(r->code);
      }
      if (labels.empty()) continue;
      const auto seg = TimeInterval::from_ms(cuts[i], cuts[i + 1]);
      if (!out.empty() && out.back().actor == actor && out.back().labels == labels &&
          out.back().interval.end() == seg.start()) {
        out.back().interval = TimeInterval(out.back().interval.start(), seg.end());
      } else {
        out.push_back({seg, actor, std::move(labels)});
      }
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const ActivitySpan& a, const ActivitySpan& b) {
    if (a.interval.start() != b.interval.start()) return a.interval.start() < b.interval.start();
    return a.actor < b.actor;
  });
  return out;
}

std::vector<ActivitySpan> annotate_activities(const LessonTimeline& timeline, const Taxonomy& taxonomy,
                                              ModelGateway& gateway) {
  validate_taxonomy(taxonomy);
  std::vector<std::string> code_lines;
  for (const auto& c : taxonomy.codes) {
    code_lines.push_back(c.code + " | " + std::string(to_string(c.actor)) + " | " + c.description);
  }
  std::vector<std::string> sentence_lines;
  for (const auto& turn : timeline.turns()) {
    for (const auto& s : sentence_spans(turn)) {
      sentence_lines.push_back(prompts::line(s.interval, to_string(turn.speaker), s.text));
    }
  }
  std::vector<std::string> caption_lines;
  for (const auto& c : timeline.captions()) {
    caption_lines.push_back(prompts::line(c.interval, prompts::caption_source(c.segment_index), c.caption));
  }
  const StructuredRequest req{
      "activities",
      {{std::string(prompts::kInstructions),
        "Code each transcript sentence and each caption window with the activity codes from the taxonomy "
        "that apply to it. Several codes may co-occur. Use only listed codes."},
       {std::string(prompts::kTaxonomy), text::join(code_lines, "\n")},
       {std::string(prompts::kSentences), text::join(sentence_lines, "\n")},
       {std::string(prompts::kCaptions), text::join(caption_lines, "\n")}},
      schema_ids::kActivities,
      0};
  const auto response = gateway.generate(req);
  std::vector<LabelRecord> records;
  const auto duration = timeline.duration().ms();
  for (const auto& span : response.payload["spans"]) {
    const auto start = std::max<std::int64_t>(0, span["start_ms"].get<std::int64_t>());
    const auto end = std::min(duration, span["end_ms"].get<std::int64_t>());
    for (const auto& code : span["codes"]) {
      const auto c = code.get<std::string>();
      if (!taxonomy.find(c)) fail(ErrorCode::kUnknownCode, "backend emitted activity code '" + c + "'");
      if (start < end) records.push_back({TimeInterval::from_ms(start, end), c});
    }
  }
  return merge_activity_records(records, taxonomy);
}

std::vector<QuestionCandidate> extract_questions(const LessonTimeline& timeline) {
  std::vector<QuestionCandidate> out;
  for (const auto& turn : timeline.turns()) {
    if (turn.speaker != SpeakerRole::kTeacher) continue;
    for (auto& s : sentence_spans(turn)) {
      if (text::is_question(s.text)) out.push_back({std::move(s.text), s.interval});
    }
  }
  return out;
}

BloomResult classify_bloom(const std::string& question, ModelGateway& gateway) {
  require(!text::trim(question).empty(), "classify_bloom requires a non-empty question");
  const StructuredRequest req{
      "bloom",
      {{std::string(prompts::kInstructions),
        "Classify the question into one Bloom level (1 Remember, 2 Understand, 3 Apply, 4 Analyze, "
        "5 Evaluate, 6 Create) and justify the choice with the verbs it uses."},
       {std::string(prompts::kQuestion), question}},
      schema_ids::kBloom,
      0};
  const auto response = gateway.generate(req);
  return {bloom_from_ordinal(response.payload["level"].get<int>()),
          response.payload["justification"].get<std::string>()};
}

std::vector<QuestionRecord> classify_questions(const std::vector<QuestionCandidate>& questions,
                                               ModelGateway& gateway, int parallelism) {
  std::vector<QuestionRecord> out(questions.size(), QuestionRecord{{}, TimeInterval::from_ms(0, 1), {}, {}});
  parallel_for(questions.size(), parallelism, [&](std::size_t i) {
    auto r = classify_bloom(questions[i].text, gateway);
    out[i] = {questions[i].text, questions[i].interval, r.level, std::move(r.justification)};
  });
  return out;
}

BloomHistogram question_distribution(const std::vector<QuestionRecord>& records) {
  BloomHistogram h{};
  for (const auto& r : records) ++h[static_cast<std::size_t>(ordinal(r.bloom) - 1)];
  return h;
}

std::vector<OutlineSection> generate_outline(const LessonTimeline& timeline, ModelGateway& gateway) {
  std::vector<std::string> caption_lines;
  for (const auto& c : timeline.captions()) {
    caption_lines.push_back(prompts::line(c.interval, prompts::caption_source(c.segment_index), c.caption));
  }
  std::vector<std::string> turn_lines;
  for (const auto& t : timeline.turns()) turn_lines.push_back(prompts::line(t.interval, to_string(t.speaker), t.text));
  const StructuredRequest req{
      "outline",
      {{std::string(prompts::kInstructions),
        "Merge the captions and transcript into an outline of consecutive sections covering the whole lesson. "
        "Start a new section at each topical shift. Give each a heading and a short summary."},
       {std::string(prompts::kCaptions), text::join(caption_lines, "\n")},
       {std::string(prompts::kSentences), text::join(turn_lines, "\n")}},
      schema_ids::kOutline,
      0};
  const auto response = gateway.generate(req);
  std::vector<OutlineSection> out;
  std::int64_t cursor = 0;
  for (const auto& s : response.payload["sections"]) {
    const auto start = s["start_ms"].get<std::int64_t>();
    const auto end = s["end_ms"].get<std::int64_t>();
    if (start != cursor || end <= start) {
      throw SchemaViolation("outline sections must tile the lesson; gap or overlap at " +
                                MediaTime::from_ms(std::max<std::int64_t>(0, start)).to_string(),
                            1);
    }
    out.push_back({TimeInterval::from_ms(start, end), s["heading"].get<std::string>(),
                   s["summary"].get<std::string>()});
    cursor = end;
  }
  if (cursor != timeline.duration().ms()) {
    throw SchemaViolation("outline ends at " + MediaTime::from_ms(cursor).to_string() + ", lesson at " +
                              timeline.duration().to_string(),
                          1);
  }
  return out;
}

AnnotationSet annotate(const LessonTimeline& timeline, const Taxonomy& taxonomy, ModelGateway& gateway,
                       int parallelism) {
  AnnotationSet set;
  set.lesson_id = timeline.lesson_id();
  set.taxonomy_id = taxonomy.taxonomy_id;
  set.activities = annotate_activities(timeline, taxonomy, gateway);
  set.questions = classify_questions(extract_questions(timeline), gateway, parallelism);
  set.histogram = question_distribution(set.questions);
  set.outline = generate_outline(timeline, gateway);
  return set;
}

Json annotations_to_json(const AnnotationSet& set) {
  Json doc{{"schema_version", json_io::kSchemaVersion},
           {"lesson_id", set.lesson_id},
           {"taxonomy_id", set.taxonomy_id},
           {"activities", Json::array()},
           {"questions", Json::array()},
           {"bloom_histogram", Json::array()},
           {"outline", Json::array()}};
  for (const auto& a : set.activities) {
    Json j{{"actor", std::string(to_string(a.actor))}, {"labels", a.labels}};
    json_io::put_interval(j, a.interval);
    doc["activities"].push_back(std::move(j));
  }
  for (const auto& q : set.questions) {
    Json j{{"text", q.text},
           {"bloom_level", ordinal(q.bloom)},
           {"bloom_name", std::string(to_string(q.bloom))},
           {"justification", q.justification}};
    json_io::put_interval(j, q.interval);
    doc["questions"].push_back(std::move(j));
  }
  for (int level = 1; level <= 6; ++level) {
    doc["bloom_histogram"].push_back({{"level", level},
                                      {"name", std::string(to_string(bloom_from_ordinal(level)))},
                                      {"count", set.histogram[static_cast<std::size_t>(level - 1)]}});
  }
  for (const auto& s : set.outline) {
    Json j{{"heading", s.heading}, {"summary", s.summary}};
    json_io::put_interval(j, s.interval);
    doc["outline"].push_back(std::move(j));
  }
  return doc;
}

AnnotationSet annotations_from_json(const Json& doc) {
  json_io::check_schema_version(doc, "annotations");
  AnnotationSet set;
  set.lesson_id = json_io::get_string(doc, "lesson_id", "annotations");
  set.taxonomy_id = json_io::get_string(doc, "taxonomy_id", "annotations");
  const auto& acts = json_io::field(doc, "activities", "annotations");
  for (std::size_t i = 0; i < acts.size(); ++i) {
    const auto path = "annotations.activities[" + std::to_string(i) + "]";
    const auto labels = json_io::get_string_list(acts[i], "labels", path);
    set.activities.push_back({json_io::read_interval(acts[i], path),
                              parse_actor(json_io::get_string(acts[i], "actor", path)),
                              {labels.begin(), labels.end()}});
  }
  const auto& qs = json_io::field(doc, "questions", "annotations");
  for (std::size_t i = 0; i < qs.size(); ++i) {
    const auto path = "annotations.questions[" + std::to_string(i) + "]";
    set.questions.push_back({json_io::get_string(qs[i], "text", path), json_io::read_interval(qs[i], path),
                             bloom_from_ordinal(static_cast<int>(json_io::get_int(qs[i], "bloom_level", path))),
                             json_io::get_string(qs[i], "justification", path)});
  }
  set.histogram = question_distribution(set.questions);
  const auto& outline = json_io::field(doc, "outline", "annotations");
  for (std::size_t i = 0; i < outline.size(); ++i) {
    const auto path = "annotations.outline[" + std::to_string(i) + "]";
    set.outline.push_back({json_io::read_interval(outline[i], path), json_io::get_string(outline[i], "heading", path),
                           json_io::get_string(outline[i], "summary", path)});
  }
  return set;
}

}  // namespace classmind::annotations
