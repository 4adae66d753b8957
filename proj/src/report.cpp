#include "classmind/report.hpp"

#include <cstdio>

namespace classmind::report {

std::string html_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out += c;
    }
  }
  return out;
}

namespace {

std::string clock(MediaTime t) {
  const auto s = t.ms() / 1000;
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%02lld:%02lld", static_cast<long long>(s / 60), static_cast<long long>(s % 60));
  return buf;
}

std::string span(const TimeInterval& iv) { return clock(iv.start()) + "&ndash;" + clock(iv.end()); }

void feedback_card(std::string& out, const ava::FeedbackItem& item) {
  const bool strength = item.polarity == ava::Polarity::kStrength;
  out += "<div class=\"card ";
  out += strength ? "strength" : "weakness";
  out += "\">\n<h3>" + html_escape(item.dimension_id + " " + item.dimension_title) + " <span class=\"when\">" +
         span(item.interval) + "</span></h3>\n";
  out += "<p>" + html_escape(item.content) + "</p>\n";
  out += "<p><b>Observed:</b> " + html_escape(item.observed_behaviors) + "</p>\n";
  out += "<p><b>Advice:</b> " + html_escape(item.actionable_advice) + "</p>\n</div>\n";
}

}  // namespace

std::string render_html(const std::string& title, const ava::FeedbackReport& feedback,
                        const std::optional<annotations::AnnotationSet>& annotations) {
  std::string out;
  out += "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>" + html_escape(title) +
         "</title>\n<style>\n"
         "body{font-family:sans-serif;max-width:60em;margin:2em auto;color:#222}\n"
         ".card{border-left:4px solid #888;padding:.2em 1em;margin:1em 0;background:#fafafa}\n"
         ".strength{border-color:#2a8a4a}.weakness{border-color:#c0562b}\n"
         ".when{font-weight:normal;color:#666;font-size:.85em}\n"
         "table{border-collapse:collapse}td,th{border:1px solid #ccc;padding:.2em .6em;text-align:left}\n"
         "</style>\n</head>\n<body>\n";
  out += "<h1>" + html_escape(title) + "</h1>\n";
  out += "<p>Lesson " + html_escape(feedback.lesson_id) + ", rubric " + html_escape(feedback.rubric_id) +
         ", generated " + html_escape(feedback.generated_at) + ".</p>\n";

  out += "<h2>Feedback</h2>\n";
  if (feedback.items.empty()) out += "<p>No validated feedback items.</p>\n";
  for (const auto& item : feedback.items) feedback_card(out, item);

  if (annotations) {
    out += "<h2>Outline</h2>\n<ol>\n";
    for (const auto& s : annotations->outline) {
      out += "<li><b>" + html_escape(s.heading) + "</b> <span class=\"when\">" + span(s.interval) + "</span><br>" +
             html_escape(s.summary) + "</li>\n";
    }
    out += "</ol>\n<h2>Questions</h2>\n<table>\n<tr><th>Level</th><th>Count</th></tr>\n";
    for (int level = 1; level <= 6; ++level) {
      out += "<tr><td>" + std::string(to_string(bloom_from_ordinal(level))) + "</td><td>" +
             std::to_string(annotations->histogram[static_cast<std::size_t>(level - 1)]) + "</td></tr>\n";
    }
    out += "</table>\n<ul>\n";
    for (const auto& q : annotations->questions) {
      out += "<li>" + span(q.interval) + " " + html_escape(q.text) + " <i>(" +
             std::string(to_string(q.bloom)) + ")</i></li>\n";
    }
    out += "</ul>\n<h2>Activities</h2>\n<table>\n<tr><th>When</th><th>Actor</th><th>Codes</th></tr>\n";
    for (const auto& a : annotations->activities) {
      std::string labels;
      for (const auto& l : a.labels) labels += (labels.empty() ? "" : ", ") + l;
      out += "<tr><td>" + span(a.interval) + "</td><td>" + std::string(annotations::to_string(a.actor)) +
             "</td><td>" + html_escape(labels) + "</td></tr>\n";
    }
    out += "</table>\n";
  }
  out += "</body>\n</html>\n";
  return out;
}

}  // namespace classmind::report
