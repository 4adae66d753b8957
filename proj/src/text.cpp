#include "classmind/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>

namespace classmind::text {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool is_word_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) != 0 || c == '\'';
}

constexpr std::array kStopWords = std::to_array<std::string_view>({
    "a",      "about", "above", "after",   "again", "all",    "also",  "am",    "an",
    "and",    "any",   "are",   "as",      "at",    "be",     "been",  "before", "being",
    "below",  "both",  "but",   "by",      "can",   "could",  "did",   "do",    "does",
    "doing",  "down",  "during", "each",   "few",   "for",    "from",  "further", "had",
    "has",    "have",  "having", "her",    "here",  "hers",   "him",   "his",   "how",
    "i",      "if",    "in",    "into",    "is",    "it",     "its",   "just",  "more",
    "most",   "no",    "nor",   "not",     "now",   "of",     "off",   "on",    "once",
    "only",   "or",    "other", "our",     "out",   "over",   "own",   "same",  "she",
    "should", "so",    "some",  "such",    "than",  "that",   "the",   "their", "them",
    "then",   "there", "these", "they",    "this",  "those",  "through", "to",  "too",
    "under",  "until", "up",    "very",    "was",   "we",     "were",  "what",  "when",
    "which",  "while", "with",  "would",   "you",   "your"});

}  // namespace

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    while (!current.empty() && current.front() == '\'') current.erase(current.begin());
    while (!current.empty() && current.back() == '\'') current.pop_back();
    if (!current.empty()) out.push_back(current);
    current.clear();
  };
  for (char c : s) {
    if (is_word_char(c)) {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

bool contains_phrase(std::string_view s, std::string_view phrase) {
  const auto needle = words(phrase);
  if (needle.empty()) return false;
  const auto hay = words(s);
  if (hay.size() < needle.size()) return false;
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

bool is_stop_word(std::string_view word) {
  return std::find(kStopWords.begin(), kStopWords.end(), word) != kStopWords.end();
}

std::vector<std::string> content_words(std::string_view s) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (auto& w : words(s)) {
    if (w.size() < 3 || is_stop_word(w)) continue;
    if (seen.insert(w).second) out.push_back(std::move(w));
  }
  return out;
}

std::vector<Sentence> split_sentences(std::string_view s) {
  std::vector<Sentence> out;
  std::size_t begin = 0;
  auto emit = [&](std::size_t end) {
    auto t = trim(s.substr(begin, end - begin));
    if (!t.empty()) {
      std::size_t b = begin;
      while (b < end && is_space(s[b])) ++b;
      out.push_back({std::move(t), b, end});
    }
    begin = end;
  };
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if ((c == '.' || c == '!' || c == '?') && (i + 1 == s.size() || is_space(s[i + 1]))) {
      emit(i + 1);
    }
  }
  if (begin < s.size()) emit(s.size());
  return out;
}

bool is_question(std::string_view sentence) {
  const auto t = trim(sentence);
  if (t.empty()) return false;
  const char last = t.back();
  if (last == '?') return true;
  if (last == '!') return false;
  static constexpr std::array<std::string_view, 13> kLeads = {
      "what", "why", "how", "who", "when", "where", "which",
      "can",  "could", "would", "do", "does", "did"};
  const auto w = words(t);
  return !w.empty() && std::find(kLeads.begin(), kLeads.end(), w.front()) != kLeads.end();
}

std::vector<std::string> quoted_spans(std::string_view s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto open = s.find(kQuoteOpen, pos);
    if (open == std::string_view::npos) break;
    const auto start = open + kQuoteOpen.size();
    const auto close = s.find(kQuoteClose, start);
    if (close == std::string_view::npos) break;
    out.emplace_back(s.substr(start, close - start));
    pos = close + kQuoteClose.size();
  }
  return out;
}

std::string quote(std::string_view s) {
  std::string out(kQuoteOpen);
  out += s;
  out += kQuoteClose;
  return out;
}

std::string abbreviate(std::string_view s, std::size_t max_bytes) {
  if (s.size() <= max_bytes) return std::string(s);
  std::size_t cut = max_bytes;
  while (cut > 0 && !is_space(s[cut])) --cut;
  if (cut == 0) cut = max_bytes;
  // never split a UTF-8 sequence
  while (cut > 0 && (static_cast<unsigned char>(s[cut]) & 0xC0) == 0x80) --cut;
  return trim(s.substr(0, cut)) + "...";
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace classmind::text
