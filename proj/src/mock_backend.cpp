#include <algorithm>
#include <cmath>
#include <set>

#include "classmind/gateway.hpp"
#include "classmind/hashing.hpp"
#include "classmind/json_io.hpp"
#include "classmind/prompts.hpp"
#include "classmind/text.hpp"

namespace classmind {

using Json = nlohmann::json;

MockRules default_mock_rules() {
  MockRules r;
  r.hotspot_rules = {
      {"offtask", "2c", "WEAKNESS", std::nullopt},
      {"transition", "2c", "STRENGTH", std::nullopt},
      {"rearranged", "2e", "STRENGTH", std::nullopt},
      {"blocked", "2e", "WEAKNESS", std::nullopt},
      {"rushed", "3a", "WEAKNESS", std::nullopt},
      {"discuss", "3b", "STRENGTH", std::nullopt},
      {"unanswered", "3b", "WEAKNESS", std::nullopt},
      {"eagerly", "3c", "STRENGTH", std::nullopt},
      {"disengaged", "3c", "WEAKNESS", std::nullopt},
      {"misconception", "3d", "STRENGTH", std::nullopt},
  };
  r.guidelines = {
      {"3c", {"check whether students respond actively to the teacher's prompts",
              "check whether most students are intellectually involved in the task"}},
  };
  r.activity_rules = {
      {"board", {"TEACHER_WRITING"}, "any"},
      {"groups", {"STUDENT_GROUP_WORK"}, "caption"},
      {"presents", {"STUDENT_PRESENTING"}, "caption"},
      {"one-on-one", {"TEACHER_ONE_ON_ONE"}, "caption"},
  };
  r.outline_shift_keywords = {"next topic", "moving on"};
  r.bloom_verbs = {
      {1, {"reiterate", "memorize", "duplicate", "repeat", "identify"}},
      {2, {"explain", "paraphrase", "report", "describe", "summarize"}},
      {3, {"practice", "calculate", "implement", "operate", "use", "illustrate"}},
      {4, {"compare", "contrast", "categorize", "organize", "distinguish"}},
      {5, {"assess", "judge", "defend", "prioritize", "critique", "recommend"}},
      {6, {"invent", "develop", "design", "compose", "generate", "construct"}},
  };
  return r;
}

namespace {

void load_rules(const Json& doc, MockRules& rules) {
  if (doc.contains("hotspot_rules")) {
    rules.hotspot_rules.clear();
    const auto& arr = doc["hotspot_rules"];
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto path = "rules.hotspot_rules[" + std::to_string(i) + "]";
      HotspotRule h{json_io::get_string(arr[i], "keyword", path),
                    json_io::get_string(arr[i], "dimension_id", path),
                    json_io::get_string(arr[i], "polarity", path), std::nullopt};
      if (h.polarity != "STRENGTH" && h.polarity != "WEAKNESS") {
        fail(ErrorCode::kParse, path + ".polarity must be STRENGTH or WEAKNESS");
      }
      if (arr[i].contains("quote_override")) h.quote_override = json_io::get_string(arr[i], "quote_override", path);
      rules.hotspot_rules.push_back(std::move(h));
    }
  }
  if (doc.contains("guidelines")) {
    for (const auto& [dim, list] : doc["guidelines"].items()) {
      rules.guidelines[dim] = list.get<std::vector<std::string>>();
    }
  }
  if (doc.contains("advice")) {
    for (const auto& [dim, advice] : doc["advice"].items()) rules.advice[dim] = advice.get<std::string>();
  }
  if (doc.contains("activity_rules")) {
    rules.activity_rules.clear();
    const auto& arr = doc["activity_rules"];
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto path = "rules.activity_rules[" + std::to_string(i) + "]";
      rules.activity_rules.push_back({json_io::get_string(arr[i], "keyword", path),
                                      json_io::get_string_list(arr[i], "codes", path),
                                      json_io::get_string_or(arr[i], "source", "any")});
    }
  }
  if (doc.contains("outline_shift_keywords")) {
    rules.outline_shift_keywords = doc["outline_shift_keywords"].get<std::vector<std::string>>();
  }
  if (doc.contains("bloom_verbs")) {
    for (const auto& [level, verbs] : doc["bloom_verbs"].items()) {
      rules.bloom_verbs[std::stoi(level)] = verbs.get<std::vector<std::string>>();
    }
  }
}

std::string clock(MediaTime t) {
  const auto total = t.ms() / 1000;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%02lld:%02lld", static_cast<long long>(total / 60),
                static_cast<long long>(total % 60));
  return buf;
}

std::string lower_first(std::string s) {
  if (!s.empty() && s[0] >= 'A' && s[0] <= 'Z') s[0] = static_cast<char>(s[0] - 'A' + 'a');
  while (!s.empty() && (s.back() == '.' || s.back() == ' ')) s.pop_back();
  return s;
}

bool ends_with_terminal(const std::string& s) {
  if (s.empty()) return false;
  const char c = s.back();
  return c == '.' || c == '!' || c == '?';
}

// Collapses whitespace outside «» spans so quoted evidence stays verbatim.
std::string collapse_outside_quotes(const std::string& out) {
  std::string result;
  std::size_t i = 0;
  bool in_quote = false;
  bool pending = false;
  while (i < out.size()) {
    if (out.compare(i, text::kQuoteOpen.size(), text::kQuoteOpen) == 0) {
      if (pending && !result.empty()) result.push_back(' ');
      pending = false;
      in_quote = true;
      result += text::kQuoteOpen;
      i += text::kQuoteOpen.size();
      continue;
    }
    if (in_quote && out.compare(i, text::kQuoteClose.size(), text::kQuoteClose) == 0) {
      in_quote = false;
      result += text::kQuoteClose;
      i += text::kQuoteClose.size();
      continue;
    }
    const char c = out[i++];
    if (!in_quote && std::isspace(static_cast<unsigned char>(c))) {
      pending = true;
      continue;
    }
    if (pending && !result.empty()) result.push_back(' ');
    pending = false;
    result.push_back(c);
  }
  return result;
}

std::string refine_field(const std::string& s) {
  auto out = collapse_outside_quotes(s);
  if (!out.empty() && !ends_with_terminal(out)) out.push_back('.');
  return out;
}

bool verb_matches(const std::string& token, const std::string& verb) {
  if (token == verb) return true;
  for (const char* suffix : {"s", "es", "d", "ed", "ing"}) {
    if (token == verb + suffix) return true;
  }
  if (verb.size() > 2 && verb.back() == 'e' && token == verb.substr(0, verb.size() - 1) + "ing") return true;
  if (verb.size() > 2 && verb.back() == 'y') {
    const auto stem = verb.substr(0, verb.size() - 1);
    if (token == stem + "ies" || token == stem + "ied") return true;
  }
  return false;
}

constexpr std::array<std::string_view, 6> kBloomGloss = {
    "recall of facts", "explaining meaning", "using knowledge in a new situation",
    "examining relationships between parts", "justifying a judgement", "producing something new"};

struct Window {
  TimeInterval interval;
  std::string caption;
};

std::vector<Window> caption_windows(const std::vector<prompts::ParsedLine>& lines) {
  std::vector<std::pair<std::size_t, Window>> indexed;
  for (const auto& l : lines) {
    if (auto idx = prompts::caption_source_index(l.source)) indexed.push_back({*idx, {l.interval, l.text}});
  }
  std::stable_sort(indexed.begin(), indexed.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Window> out;
  for (auto& [_, w] : indexed) out.push_back(std::move(w));
  return out;
}

std::optional<std::size_t> window_of(const std::vector<Window>& windows, MediaTime t) {
  for (std::size_t i = 0; i < windows.size(); ++i) {
    if (windows[i].interval.contains(t)) return i;
  }
  if (!windows.empty() && t == windows.back().interval.end()) return windows.size() - 1;
  return std::nullopt;
}

std::string sentence_with(const std::string& s, const std::string& keyword) {
  for (const auto& sentence : text::split_sentences(s)) {
    if (text::contains_phrase(sentence.text, keyword)) return sentence.text;
  }
  return text::trim(s);
}

Json ms_interval(const TimeInterval& i, Json obj) {
  obj["start_ms"] = i.start_ms();
  obj["end_ms"] = i.end_ms();
  return obj;
}

std::pair<std::string, std::string> dimension_header(const StructuredRequest& req) {
  const auto fields = prompts::split_fields(req.section(prompts::kDimension));
  return {fields.empty() ? "" : fields[0], fields.size() > 1 ? fields[1] : ""};
}

}  // namespace

MockFixtures MockFixtures::load(const std::filesystem::path& dir) {
  MockFixtures fx;
  std::string hashed;
  const auto rules_path = dir / "rules.json";
  const auto captions_path = dir / "captions.json";
  if (std::filesystem::exists(rules_path)) {
    const auto raw = json_io::read_text_file(rules_path);
    load_rules(json_io::parse(raw, rules_path.string()), fx.rules);
    hashed += "rules.json\n" + raw;
  }
  if (std::filesystem::exists(captions_path)) {
    const auto raw = json_io::read_text_file(captions_path);
    const auto doc = json_io::parse(raw, captions_path.string());
    const auto& arr = json_io::field(doc, "captions", "captions.json");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto path = "captions.json captions[" + std::to_string(i) + "]";
      fx.captions[{json_io::get_string(arr[i], "lesson_id", path), json_io::get_int(arr[i], "start_ms", path),
                   json_io::get_int(arr[i], "end_ms", path)}] = json_io::get_string(arr[i], "caption", path);
    }
    hashed += "captions.json\n" + raw;
  }
  fx.content_hash = sha256_hex(hashed);
  return fx;
}

MockBackend::MockBackend(MockFixtures fixtures) : fixtures_(std::move(fixtures)) {}

std::string MockBackend::fingerprint() const {
  const auto h = fixtures_.content_hash.empty() ? std::string("builtin") : fixtures_.content_hash.substr(0, 16);
  return "mock:" + h;
}

std::vector<double> MockBackend::hash_embedding(std::string_view s) {
  std::vector<double> v(kEmbeddingDim, 0.0);
  const auto tokens = text::words(s);
  for (const auto& w : tokens) {
    const auto h = fnv1a64(w);
    v[h % kEmbeddingDim] += ((h >> 32) & 1U) ? 1.0 : -1.0;
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (norm == 0.0) {
    const auto h = fnv1a64(s);
    v.assign(kEmbeddingDim, 0.0);
    v[h % kEmbeddingDim] = 1.0;
    norm = 1.0;
  }
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

Json MockBackend::complete(BackendKind kind, const StructuredRequest& req) {
  switch (kind) {
    case BackendKind::kCaptioner: {
      const auto lesson = req.section(prompts::kLessonId);
      const auto interval = prompts::parse_stamp(req.section(prompts::kInterval));
      if (!interval) return Json::object();  // schema violation upstream
      const auto it = fixtures_.captions.find({lesson, interval->start_ms(), interval->end_ms()});
      if (it != fixtures_.captions.end()) return {{"caption", it->second}};
      return {{"caption", "Classroom segment " + prompts::stamp(*interval) +
                              ": the teacher leads the class; no further visual detail on file."}};
    }
    case BackendKind::kValidator: {
      const auto spans = text::quoted_spans(req.section(prompts::kFeedback));
      std::vector<std::string> evidence = req.sections(prompts::kCaptions);
      for (const auto& l : req.sections(prompts::kSentences)) {
        if (auto p = prompts::parse_line(l)) evidence.push_back(p->text);
      }
      for (const auto& span : spans) {
        const bool found = std::any_of(evidence.begin(), evidence.end(), [&](const std::string& e) {
          return e.find(span) != std::string::npos;
        });
        if (!found) {
          return {{"consistent", false},
                  {"rationale", "quoted span " + text::quote(span) + " does not occur in the segment evidence"}};
        }
      }
      if (spans.empty()) return {{"consistent", true}, {"rationale", "no quoted spans to check"}};
      return {{"consistent", true},
              {"rationale", "all " + std::to_string(spans.size()) + " quoted span(s) found in the segment evidence"}};
    }
    case BackendKind::kEmbedder: {
      const auto v = hash_embedding(req.section(prompts::kText));
      return {{"values", v}};
    }
    case BackendKind::kReasoner:
      return reason(req);
    case BackendKind::kTranscriberDiarizer:
      throw TransportError("mock backend has no transcriber; supply transcripts as JSONL");
  }
  return Json::object();
}

Json MockBackend::reason(const StructuredRequest& req) const {
  const auto& rules = fixtures_.rules;
  const auto& task = req.task_tag;

  if (task == "hotspots") {
    std::set<std::string> dims;
    for (const auto& l : prompts::split_lines(req.section(prompts::kRubric))) {
      const auto f = prompts::split_fields(l);
      if (!f.empty()) dims.insert(f[0]);
    }
    const auto lines = prompts::parse_lines(req.section(prompts::kTimeline));
    const auto windows = caption_windows(lines);
    Json out = Json::array();
    for (const auto& l : lines) {
      for (const auto& rule : rules.hotspot_rules) {
        if (!dims.count(rule.dimension_id) || !text::contains_phrase(l.text, rule.keyword)) continue;
        const auto w = window_of(windows, l.interval.start());
        if (!w) continue;
        std::vector<std::string> ctx;
        if (*w > 0) ctx.push_back("Before: " + text::abbreviate(windows[*w - 1].caption, 160));
        ctx.push_back("During: " + text::abbreviate(windows[*w].caption, 160));
        if (*w + 1 < windows.size()) ctx.push_back("After: " + text::abbreviate(windows[*w + 1].caption, 160));
        out.push_back(ms_interval(windows[*w].interval,
                                  {{"dimension_id", rule.dimension_id},
                                   {"polarity", rule.polarity},
                                   {"context_summary", text::join(ctx, " | ")},
                                   {"trigger_excerpt", sentence_with(l.text, rule.keyword)}}));
      }
    }
    return {{"hotspots", out}};
  }

  if (task == "guidelines") {
    const auto [dim_id, title] = dimension_header(req);
    const auto it = rules.guidelines.find(dim_id);
    std::vector<std::string> out;
    if (it != rules.guidelines.end()) {
      out = it->second;
    } else {
      for (const auto& ind : prompts::split_lines(req.section(prompts::kIndicators))) {
        if (out.size() == 3) break;
        out.push_back("check whether " + lower_first(ind));
      }
      if (out.empty()) out.push_back("check whether the segment shows evidence of " + text::to_lower(title));
    }
    if (out.size() > 5) out.resize(5);
    return {{"guidelines", out}};
  }

  if (task == "feedback_draft") {
    const auto [dim_id, title] = dimension_header(req);
    const auto polarity = text::trim(req.section(prompts::kPolarity));
    const auto interval = prompts::parse_stamp(req.section(prompts::kHotspot));
    std::vector<std::pair<std::string, std::string>> levels;
    for (const auto& l : prompts::split_lines(req.section(prompts::kLevels))) {
      const auto f = prompts::split_fields(l);
      if (f.size() >= 2) levels.emplace_back(f[0], f[1]);
    }
    auto excerpt = text::trim(req.section(prompts::kExcerpt));
    if (excerpt.empty()) {
      const auto evidence = prompts::parse_lines(req.section(prompts::kEvidence));
      if (!evidence.empty()) {
        const auto sentences = text::split_sentences(evidence.front().text);
        excerpt = sentences.empty() ? evidence.front().text : sentences.front().text;
      }
    }
    std::string quoted = excerpt;
    for (const auto& rule : rules.hotspot_rules) {
      if (rule.dimension_id == dim_id && rule.quote_override && text::contains_phrase(excerpt, rule.keyword)) {
        quoted = *rule.quote_override;
        break;
      }
    }
    const bool strength = polarity == "STRENGTH";
    std::pair<std::string, std::string> level{"", ""};
    if (!levels.empty()) level = strength ? levels.back() : levels[levels.size() >= 3 ? 1 : 0];
    std::string content = title + " (" + dim_id + ") " +
                          (strength ? "is a strength in this segment." : "needs attention in this segment.");
    if (!level.first.empty()) {
      content += std::string(strength ? " The observed practice aligns with the " : " The observed practice resembles the ") +
                 level.first + " level: " + level.second;
    }
    std::string observed = "The recording shows " + text::quote(quoted);
    if (interval) observed = "Between " + clock(interval->start()) + " and " + clock(interval->end()) + " the recording shows " + text::quote(quoted);
    std::string advice;
    if (const auto it = rules.advice.find(dim_id); it != rules.advice.end()) {
      advice = it->second;
    } else {
      advice = "Review the " + (level.first.empty() ? std::string("rubric") : level.first) +
               " descriptors for " + title + " and plan one concrete change for this part of the lesson";
    }
    return {{"content", content}, {"observed_behaviors", observed}, {"actionable_advice", advice}};
  }

  if (task == "refine_feedback") {
    const auto [dim_id, title] = dimension_header(req);
    auto content = refine_field(req.section(prompts::kContent));
    if (!title.empty() && content.find(title) == std::string::npos) content = title + ": " + content;
    return {{"content", content},
            {"observed_behaviors", refine_field(req.section(prompts::kObserved))},
            {"actionable_advice", refine_field(req.section(prompts::kAdvice))}};
  }

  if (task == "activities") {
    std::set<std::string> taxonomy;
    for (const auto& l : prompts::split_lines(req.section(prompts::kTaxonomy))) {
      const auto f = prompts::split_fields(l);
      if (!f.empty()) taxonomy.insert(f[0]);
    }
    auto with_default = [&](std::vector<std::string>& codes, const char* code) {
      if (taxonomy.count(code)) codes.emplace_back(code);
    };
    auto matched = [&](const std::string& s, bool caption) {
      std::vector<std::string> codes;
      for (const auto& rule : rules.activity_rules) {
        const bool source_ok = rule.source == "any" || (caption ? rule.source == "caption" : rule.source == "turn");
        if (source_ok && text::contains_phrase(s, rule.keyword)) {
          codes.insert(codes.end(), rule.codes.begin(), rule.codes.end());
        }
      }
      return codes;
    };
    Json spans = Json::array();
    for (const auto& l : prompts::parse_lines(req.section(prompts::kSentences))) {
      std::vector<std::string> codes = matched(l.text, false);
      if (l.source == "TEACHER") {
        if (text::is_question(l.text)) with_default(codes, "TEACHER_QA");
        if (codes.empty()) {
          with_default(codes, "TEACHER_LECTURING");
          with_default(codes, "STUDENT_LISTENING");
        }
      } else if (l.source == "STUDENT") {
        if (codes.empty()) with_default(codes, "STUDENT_QA");
      } else {
        continue;
      }
      if (!codes.empty()) spans.push_back(ms_interval(l.interval, {{"codes", codes}}));
    }
    for (const auto& l : prompts::parse_lines(req.section(prompts::kCaptions))) {
      auto codes = matched(l.text, true);
      if (!codes.empty()) spans.push_back(ms_interval(l.interval, {{"codes", codes}}));
    }
    return {{"spans", spans}};
  }

  if (task == "bloom") {
    const auto question = req.section(prompts::kQuestion);
    const auto tokens = text::words(question);
    std::vector<std::pair<int, std::string>> hits;
    for (const auto& [level, verbs] : rules.bloom_verbs) {
      for (const auto& verb : verbs) {
        if (std::any_of(tokens.begin(), tokens.end(), [&](const std::string& t) { return verb_matches(t, verb); })) {
          hits.emplace_back(level, verb);
        }
      }
    }
    if (hits.empty()) {
      return {{"level", 1},
              {"justification", "No higher-order verb found; the question asks students to identify a fact "
                                "(Remember: recall of facts)."}};
    }
    int best = 0;
    std::vector<std::string> listed;
    for (const auto& [level, verb] : hits) {
      best = std::max(best, level);
      listed.push_back(verb + " (" + std::string(to_string(bloom_from_ordinal(level))) + ")");
    }
    std::string why = "Matched verb" + std::string(hits.size() > 1 ? "s " : " ") + text::join(listed, ", ") +
                      ". " + std::string(to_string(bloom_from_ordinal(best))) + ": " +
                      std::string(kBloomGloss[best - 1]) + ".";
    if (hits.size() > 1) why += " Highest matched level chosen.";
    return {{"level", best}, {"justification", why}};
  }

  if (task == "outline") {
    const auto captions = prompts::parse_lines(req.section(prompts::kCaptions));
    const auto turns = prompts::parse_lines(req.section(prompts::kSentences));
    const auto windows = caption_windows(captions);
    if (windows.empty()) return {{"sections", Json::array()}};
    std::vector<bool> marker(windows.size(), false);
    auto has_marker = [&](const std::string& s) {
      return std::any_of(rules.outline_shift_keywords.begin(), rules.outline_shift_keywords.end(),
                         [&](const std::string& k) { return text::contains_phrase(s, k); });
    };
    for (std::size_t i = 0; i < windows.size(); ++i) marker[i] = has_marker(windows[i].caption);
    for (const auto& t : turns) {
      if (auto w = window_of(windows, t.interval.start()); w && has_marker(t.text)) marker[*w] = true;
    }
    std::vector<std::size_t> starts{0};
    const bool any_marker = std::any_of(marker.begin() + 1, marker.end(), [](bool b) { return b; });
    for (std::size_t i = 1; i < windows.size(); ++i) {
      if (any_marker ? marker[i] : i % 2 == 0) starts.push_back(i);
    }
    Json sections = Json::array();
    for (std::size_t s = 0; s < starts.size(); ++s) {
      const auto first = starts[s];
      const auto last = s + 1 < starts.size() ? starts[s + 1] - 1 : windows.size() - 1;
      std::vector<std::string> parts;
      for (auto i = first; i <= last; ++i) parts.push_back(windows[i].caption);
      const auto lead = text::split_sentences(windows[first].caption);
      const auto heading = "Part " + std::to_string(s + 1) + ": " +
                           text::abbreviate(lead.empty() ? windows[first].caption : lead.front().text, 60);
      sections.push_back({{"start_ms", windows[first].interval.start_ms()},
                          {"end_ms", windows[last].interval.end_ms()},
                          {"heading", heading},
                          {"summary", text::abbreviate(text::join(parts, " "), 400)}});
    }
    return {{"sections", sections}};
  }

  if (task == "search_query") {
    const auto [dim_id, title] = dimension_header(req);
    const auto title_words = text::words(title);
    std::vector<std::string> picked;
    for (const auto& w : text::content_words(req.section(prompts::kAdvice))) {
      if (picked.size() == 3) break;
      if (std::find(title_words.begin(), title_words.end(), w) == title_words.end()) picked.push_back(w);
    }
    auto query = title;
    if (!picked.empty()) query += " " + text::join(picked, " ");
    return {{"query", query}};
  }

  if (task == "rerank") {
    const auto query_words = text::content_words(req.section(prompts::kQuery));
    Json results = Json::array();
    for (const auto& l : prompts::split_lines(req.section(prompts::kCandidates))) {
      const auto f = prompts::split_fields(l);
      if (f.size() < 4) continue;
      std::vector<std::string> shared;
      for (const auto& w : text::content_words(f[3])) {
        if (std::find(query_words.begin(), query_words.end(), w) != query_words.end()) shared.push_back(w);
      }
      if (shared.empty()) continue;
      results.push_back({{"clip_id", f[0]},
                         {"explanation", "Shows " + text::join(shared, ", ") + " in a real classroom (" +
                                             f[2] + ")."}});
    }
    return {{"results", results}};
  }

  return Json::object();  // unknown task: no schema will accept this
}

}  // namespace classmind
