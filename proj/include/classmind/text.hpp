#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace classmind::text {

inline constexpr std::string_view kQuoteOpen = "\xC2\xAB";   // «
inline constexpr std::string_view kQuoteClose = "\xC2\xBB";  // »

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
std::string collapse_whitespace(std::string_view s);

// Lower-cased word tokens: runs of [a-z0-9'] with edge apostrophes removed.
std::vector<std::string> words(std::string_view s);

// True when the word sequence of `phrase` occurs contiguously in `s`.
bool contains_phrase(std::string_view s, std::string_view phrase);

// Words of length >= 3 that are not stop words, in first-seen order, unique.
std::vector<std::string> content_words(std::string_view s);
bool is_stop_word(std::string_view word);

struct Sentence {
  std::string text;    // trimmed
  std::size_t begin;   // byte offsets into the source
  std::size_t end;
};

// Splits on '.', '!' or '?' followed by whitespace or end of text.
std::vector<Sentence> split_sentences(std::string_view s);

// Question rule: the sentence ends with '?', or it opens with an
// interrogative lead word (what, why, how, who, when, where, which, can,
// could, would, do, does, did) and ends with '.' or has no terminal mark.
bool is_question(std::string_view sentence);

// Text found between « and ». Unterminated quotes are ignored.
std::vector<std::string> quoted_spans(std::string_view s);

std::string quote(std::string_view s);

// Truncates at a word boundary to at most max_bytes, appending "..." when cut.
std::string abbreviate(std::string_view s, std::size_t max_bytes);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace classmind::text
