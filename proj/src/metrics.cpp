#include "classmind/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "classmind/ingestion.hpp"
#include "classmind/json_io.hpp"
#include "classmind/text.hpp"

namespace classmind::metrics {

using Json = nlohmann::json;

std::size_t default_bins(MediaTime duration) {
  const auto ms = duration.ms();
  const auto k = static_cast<std::size_t>((ms + 120000 - 1) / 120000);
  return std::max<std::size_t>(2, k);
}

CoverageReport coverage_from_weights(std::vector<double> weights) {
  CoverageReport r;
  r.k = weights.size();
  require(r.k >= 1, "entropy needs at least one bin");
  double total = 0;
  for (double w : weights) total += w;
  if (total <= 0) fail(ErrorCode::kEmptyTimestamps, "no mass to bin");
  r.p.resize(r.k);
  for (std::size_t i = 0; i < r.k; ++i) {
    r.p[i] = weights[i] / total;
    if (r.p[i] > 0) r.H -= r.p[i] * std::log(r.p[i]);
  }
  r.H_norm = r.k > 1 ? r.H / std::log(static_cast<double>(r.k)) : 0.0;
  r.H_norm = std::clamp(r.H_norm, 0.0, 1.0);
  r.weights = std::move(weights);
  return r;
}

namespace {

std::size_t pick_bins(MediaTime duration, std::optional<std::size_t> k) {
  if (duration.ms() <= 0) fail(ErrorCode::kRange, "duration must be > 0");
  const auto bins = k.value_or(default_bins(duration));
  if (bins < 1) fail(ErrorCode::kRange, "bin count must be >= 1");
  return bins;
}

}  // namespace

CoverageReport temporal_entropy(const std::vector<MediaTime>& timestamps, MediaTime duration,
                                std::optional<std::size_t> k) {
  if (timestamps.empty()) fail(ErrorCode::kEmptyTimestamps, "temporal_entropy needs at least one timestamp");
  const auto bins = pick_bins(duration, k);
  const auto d = duration.ms();
  std::vector<double> w(bins, 0.0);
  for (const auto& t : timestamps) {
    if (t.ms() < 0 || t.ms() > d) {
      fail(ErrorCode::kRange, "timestamp " + t.to_string() + " outside [0, " + duration.to_string() + "]");
    }
    auto idx = static_cast<std::size_t>((static_cast<__int128>(t.ms()) * bins) / d);
    if (idx >= bins) idx = bins - 1;
    w[idx] += 1.0;
  }
  return coverage_from_weights(std::move(w));
}

CoverageReport temporal_entropy_weighted(const std::vector<TimeInterval>& events, MediaTime duration,
                                         std::optional<std::size_t> k) {
  if (events.empty()) fail(ErrorCode::kEmptyTimestamps, "temporal_entropy needs at least one event");
  const auto bins = pick_bins(duration, k);
  const auto d = duration.ms();
  std::vector<double> w(bins, 0.0);
  for (const auto& e : events) {
    if (e.end_ms() > d) fail(ErrorCode::kRange, "event " + e.to_string() + " ends after the lesson");
    for (std::size_t i = 0; i < bins; ++i) {
      const double lo = static_cast<double>(d) * static_cast<double>(i) / static_cast<double>(bins);
      const double hi = static_cast<double>(d) * static_cast<double>(i + 1) / static_cast<double>(bins);
      const double ov = std::min<double>(hi, e.end_ms()) - std::max<double>(lo, e.start_ms());
      if (ov > 0) w[i] += ov;
    }
  }
  return coverage_from_weights(std::move(w));
}

std::map<SpeakerRole, std::vector<TimeInterval>> normalize(const LabeledTimeSet& set) {
  std::map<SpeakerRole, std::vector<TimeInterval>> by_role;
  for (const auto& [role, iv] : set) by_role[role].push_back(iv);
  for (auto& [role, ivs] : by_role) {
    std::sort(ivs.begin(), ivs.end());
    std::vector<TimeInterval> merged;
    for (const auto& iv : ivs) {
      if (!merged.empty() && iv.start() <= merged.back().end()) {
        if (iv.end() > merged.back().end()) merged.back() = TimeInterval(merged.back().start(), iv.end());
      } else {
        merged.push_back(iv);
      }
    }
    ivs = std::move(merged);
  }
  return by_role;
}

namespace {

std::int64_t measure(const std::vector<TimeInterval>& ivs) {
  std::int64_t m = 0;
  for (const auto& iv : ivs) m += iv.duration_ms();
  return m;
}

std::int64_t intersection_measure(const std::vector<TimeInterval>& a, const std::vector<TimeInterval>& b) {
  std::int64_t m = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const auto lo = std::max(a[i].start_ms(), b[j].start_ms());
    const auto hi = std::min(a[i].end_ms(), b[j].end_ms());
    if (hi > lo) m += hi - lo;
    if (a[i].end_ms() < b[j].end_ms()) {
      ++i;
    } else {
      ++j;
    }
  }
  return m;
}

}  // namespace

double jaccard_error_rate(const LabeledTimeSet& pred, const LabeledTimeSet& gold) {
  const auto a = normalize(pred);
  const auto b = normalize(gold);
  std::set<SpeakerRole> roles;
  for (const auto& [r, _] : a) roles.insert(r);
  for (const auto& [r, _] : b) roles.insert(r);
  std::int64_t inter = 0, uni = 0;
  static const std::vector<TimeInterval> kNone;
  for (const auto r : roles) {
    const auto& x = a.count(r) ? a.at(r) : kNone;
    const auto& y = b.count(r) ? b.at(r) : kNone;
    const auto i = intersection_measure(x, y);
    inter += i;
    uni += measure(x) + measure(y) - i;
  }
  if (uni == 0) fail(ErrorCode::kEmptyUnion, "JER is undefined when both sets are empty");
  return 1.0 - static_cast<double>(inter) / static_cast<double>(uni);
}

ClassificationScores prf1(std::int64_t tp, std::int64_t fp, std::int64_t fn) {
  require(tp >= 0 && fp >= 0 && fn >= 0, "counts must be >= 0");
  ClassificationScores s{tp, fp, fn};
  if (tp + fp > 0) {
    s.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  } else {
    s.degenerate = true;
  }
  if (tp + fn > 0) {
    s.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  } else {
    s.degenerate = true;
  }
  if (s.precision + s.recall > 0) {
    s.f1 = 2 * s.precision * s.recall / (s.precision + s.recall);
  } else {
    s.degenerate = true;
  }
  return s;
}

MultiLabelScores micro_f1(const std::map<std::string, Counts>& per_class) {
  require(!per_class.empty(), "micro_f1 needs at least one class");
  Counts sum;
  for (const auto& [_, c] : per_class) {
    sum.tp += c.tp;
    sum.fp += c.fp;
    sum.fn += c.fn;
  }
  const auto s = prf1(sum.tp, sum.fp, sum.fn);
  return {per_class, s.precision, s.recall, s.f1, s.degenerate};
}

std::vector<GoldQuestion> load_gold_questions(const std::filesystem::path& path) {
  const auto doc = json_io::read_file(path);
  const auto what = path.filename().string();
  std::vector<GoldQuestion> out;
  const auto& qs = json_io::field(doc, "questions", what);
  for (std::size_t i = 0; i < qs.size(); ++i) {
    const auto p = what + ".questions[" + std::to_string(i) + "]";
    out.push_back({json_io::get_string(qs[i], "text", p),
                   TimeInterval::from_ms(json_io::get_int(qs[i], "start_ms", p), json_io::get_int(qs[i], "end_ms", p))});
  }
  return out;
}

std::vector<GoldActivity> load_gold_activities(const std::filesystem::path& path) {
  const auto doc = json_io::read_file(path);
  const auto what = path.filename().string();
  std::vector<GoldActivity> out;
  const auto& spans = json_io::field(doc, "spans", what);
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const auto p = what + ".spans[" + std::to_string(i) + "]";
    out.push_back({annotations::parse_actor(json_io::get_string(spans[i], "actor", p)),
                   TimeInterval::from_ms(json_io::get_int(spans[i], "start_ms", p),
                                         json_io::get_int(spans[i], "end_ms", p)),
                   json_io::get_string_list(spans[i], "labels", p)});
  }
  return out;
}

LabeledTimeSet load_gold_diarization(const std::filesystem::path& path) {
  const auto doc = json_io::read_file(path);
  const auto what = path.filename().string();
  const auto speakers = ingestion::SpeakerMap::defaults();
  LabeledTimeSet out;
  const auto& segs = json_io::field(doc, "segments", what);
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const auto p = what + ".segments[" + std::to_string(i) + "]";
    out.emplace_back(speakers.normalize(json_io::get_string(segs[i], "speaker", p)),
                     TimeInterval::from_ms(json_io::get_int(segs[i], "start_ms", p),
                                           json_io::get_int(segs[i], "end_ms", p)));
  }
  return out;
}

namespace {

double token_jaccard(const std::string& a, const std::string& b) {
  const auto wa = text::words(a);
  const auto wb = text::words(b);
  const std::set<std::string> sa(wa.begin(), wa.end());
  const std::set<std::string> sb(wb.begin(), wb.end());
  if (sa.empty() && sb.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& w : sa) inter += sb.count(w);
  return static_cast<double>(inter) / static_cast<double>(sa.size() + sb.size() - inter);
}

}  // namespace

ClassificationScores score_questions(const std::vector<annotations::QuestionRecord>& pred,
                                     const std::vector<GoldQuestion>& gold) {
  std::vector<bool> used(pred.size(), false);
  std::int64_t tp = 0;
  for (const auto& g : gold) {
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (used[i] || !pred[i].interval.overlaps(g.interval)) continue;
      if (token_jaccard(pred[i].text, g.text) >= 0.5) {
        used[i] = true;
        ++tp;
        break;
      }
    }
  }
  return prf1(tp, static_cast<std::int64_t>(pred.size()) - tp, static_cast<std::int64_t>(gold.size()) - tp);
}

ActivityScores score_activities(const std::vector<annotations::ActivitySpan>& pred,
                                const std::vector<GoldActivity>& gold, MediaTime duration) {
  const auto frames = (duration.ms() + 999) / 1000;
  std::set<std::pair<annotations::Actor, std::string>> classes;
  for (const auto& p : pred) {
    for (const auto& l : p.labels) classes.emplace(p.actor, l);
  }
  for (const auto& g : gold) {
    for (const auto& l : g.labels) classes.emplace(g.actor, l);
  }
  std::map<std::string, Counts> teacher, student, overall;
  for (const auto& [actor, code] : classes) {
    Counts c;
    for (std::int64_t f = 0; f < frames; ++f) {
      const auto mid = MediaTime::from_ms(std::min(f * 1000 + 500, duration.ms() - 1));
      const bool in_pred = std::any_of(pred.begin(), pred.end(), [&](const auto& p) {
        return p.actor == actor && p.labels.count(code) && p.interval.contains(mid);
      });
      const bool in_gold = std::any_of(gold.begin(), gold.end(), [&](const auto& g) {
        return g.actor == actor && g.interval.contains(mid) &&
               std::find(g.labels.begin(), g.labels.end(), code) != g.labels.end();
      });
      if (in_pred && in_gold) {
        ++c.tp;
      } else if (in_pred) {
        ++c.fp;
      } else if (in_gold) {
        ++c.fn;
      }
    }
    (actor == annotations::Actor::kTeacher ? teacher : student)[code] = c;
    overall[code] = c;
  }
  ActivityScores s;
  if (!teacher.empty()) s.teacher = micro_f1(teacher);
  if (!student.empty()) s.student = micro_f1(student);
  if (!overall.empty()) s.overall = micro_f1(overall);
  return s;
}

EvaluationReport evaluate_lesson(const ava::FeedbackReport& report, const LessonTimeline& timeline,
                                 const annotations::AnnotationSet* annotations, const EvaluationOptions& options) {
  EvaluationReport r;
  r.lesson_id = report.lesson_id;
  r.item_count = report.items.size();
  r.duration_weighted = options.duration_weighted;
  if (!report.items.empty()) {
    if (options.duration_weighted) {
      std::vector<TimeInterval> events;
      for (const auto& i : report.items) events.push_back(i.interval);
      r.coverage = temporal_entropy_weighted(events, timeline.duration(), options.bins);
    } else {
      std::vector<MediaTime> ts;
      for (const auto& i : report.items) ts.push_back(i.interval.start());
      r.coverage = temporal_entropy(ts, timeline.duration(), options.bins);
    }
    std::size_t grounded = 0;
    for (const auto& i : report.items) grounded += ava::is_grounded(i, timeline) ? 1 : 0;
    r.grounding_rate = static_cast<double>(grounded) / static_cast<double>(report.items.size());
  }
  if (options.gold_questions) {
    require(annotations != nullptr, "question scoring needs annotations.json");
    r.questions = score_questions(annotations->questions, load_gold_questions(*options.gold_questions));
  }
  if (options.gold_activities) {
    require(annotations != nullptr, "activity scoring needs annotations.json");
    r.activities = score_activities(annotations->activities, load_gold_activities(*options.gold_activities),
                                    timeline.duration());
  }
  if (options.gold_diarization) {
    LabeledTimeSet pred;
    for (const auto& t : timeline.turns()) pred.emplace_back(t.speaker, t.interval);
    r.jer = jaccard_error_rate(pred, load_gold_diarization(*options.gold_diarization));
  }
  return r;
}

namespace {

// Fixed precision keeps artifact bytes independent of libm rounding noise.
double r9(double v) { return std::round(v * 1e9) / 1e9; }

Json scores_json(const ClassificationScores& s) {
  return {{"tp", s.tp},           {"fp", s.fp},   {"fn", s.fn},
          {"precision", r9(s.precision)}, {"recall", r9(s.recall)}, {"f1", r9(s.f1)},
          {"degenerate", s.degenerate}};
}

Json multi_json(const MultiLabelScores& m) {
  Json per = Json::object();
  for (const auto& [code, c] : m.per_class) per[code] = {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}};
  return {{"micro_precision", r9(m.micro_precision)},
          {"micro_recall", r9(m.micro_recall)},
          {"micro_f1", r9(m.micro_f1)},
          {"degenerate", m.degenerate},
          {"per_class", per}};
}

}  // namespace

Json evaluation_to_json(const EvaluationReport& r) {
  Json doc{{"schema_version", json_io::kSchemaVersion},
           {"lesson_id", r.lesson_id},
           {"item_count", r.item_count},
           {"coverage", nullptr},
           {"grounding_rate", nullptr},
           {"questions", nullptr},
           {"activities", nullptr},
           {"diarization", nullptr}};
  if (r.coverage) {
    Json p = Json::array();
    for (double v : r.coverage->p) p.push_back(r9(v));
    Json w = Json::array();
    for (double v : r.coverage->weights) w.push_back(r9(v));
    doc["coverage"] = {{"k", r.coverage->k},
                       {"weighting", r.duration_weighted ? "duration" : "count"},
                       {"weights", w},
                       {"p", p},
                       {"H", r9(r.coverage->H)},
                       {"H_norm", r9(r.coverage->H_norm)}};
  }
  if (r.grounding_rate) doc["grounding_rate"] = r9(*r.grounding_rate);
  if (r.questions) doc["questions"] = scores_json(*r.questions);
  if (r.activities) {
    doc["activities"] = {{"teacher", multi_json(r.activities->teacher)},
                         {"student", multi_json(r.activities->student)},
                         {"overall", multi_json(r.activities->overall)}};
  }
  if (r.jer) doc["diarization"] = {{"jer", r9(*r.jer)}};
  return doc;
}

std::string evaluation_table(const EvaluationReport& r) {
  char buf[256];
  std::string out;
  std::snprintf(buf, sizeof(buf), "%-22s | %-12s | %-11s | %-26s | %-27s\n", "Method", "Significance",
                "Feasibility", "Factuality (%, grounding)", "Temporal Coverage (Entropy)");
  out += buf;
  out += std::string(22, '-') + "-+-" + std::string(12, '-') + "-+-" + std::string(11, '-') + "-+-" +
         std::string(26, '-') + "-+-" + std::string(27, '-') + "\n";
  std::string fact = "n/a";
  if (r.grounding_rate) {
    std::snprintf(buf, sizeof(buf), "%.1f", *r.grounding_rate * 100.0);
    fact = buf;
  }
  std::string ent = "n/a";
  if (r.coverage) {
    std::snprintf(buf, sizeof(buf), "%.3f (k=%zu)", r.coverage->H_norm, r.coverage->k);
    ent = buf;
  }
  std::snprintf(buf, sizeof(buf), "%-22s | %-12s | %-11s | %-26s | %-27s\n", r.lesson_id.substr(0, 22).c_str(), "n/a",
                "n/a", fact.c_str(), ent.c_str());
  out += buf;
  std::snprintf(buf, sizeof(buf), "items: %zu\n", r.item_count);
  out += buf;
  if (r.questions) {
    std::snprintf(buf, sizeof(buf), "questions: P=%.3f R=%.3f F1=%.3f\n", r.questions->precision, r.questions->recall,
                  r.questions->f1);
    out += buf;
  }
  if (r.activities) {
    std::snprintf(buf, sizeof(buf), "activities: micro-F1 teacher=%.3f student=%.3f overall=%.3f\n",
                  r.activities->teacher.micro_f1, r.activities->student.micro_f1, r.activities->overall.micro_f1);
    out += buf;
  }
  if (r.jer) {
    std::snprintf(buf, sizeof(buf), "diarization: JER=%.4f\n", *r.jer);
    out += buf;
  }
  return out;
}

}  // namespace classmind::metrics
