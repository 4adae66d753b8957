#include "classmind/prompts.hpp"

#include <charconv>

#include "classmind/error.hpp"
#include "classmind/text.hpp"

namespace classmind::prompts {

std::string stamp(const TimeInterval& interval) {
  return "[" + interval.start().to_string() + "-" + interval.end().to_string() + "]";
}

std::string line(const TimeInterval& interval, std::string_view source, std::string_view text) {
  std::string out = stamp(interval);
  out += ' ';
  out += source;
  out += ": ";
  // keep one record per line
  for (char c : text) out.push_back(c == '\n' || c == '\r' ? ' ' : c);
  return out;
}

std::optional<TimeInterval> parse_stamp(std::string_view s) {
  if (s.size() < 5 || s.front() != '[' || s.back() != ']') return std::nullopt;
  const auto dash = s.find('-');
  if (dash == std::string_view::npos) return std::nullopt;
  try {
    const auto a = MediaTime::parse(std::string(s.substr(1, dash - 1)));
    const auto b = MediaTime::parse(std::string(s.substr(dash + 1, s.size() - dash - 2)));
    if (!(a < b)) return std::nullopt;
    return TimeInterval(a, b);
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::optional<ParsedLine> parse_line(std::string_view l) {
  const auto close = l.find(']');
  if (close == std::string_view::npos) return std::nullopt;
  auto interval = parse_stamp(l.substr(0, close + 1));
  if (!interval) return std::nullopt;
  auto rest = l.substr(close + 1);
  if (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
  const auto colon = rest.find(": ");
  if (colon == std::string_view::npos) return std::nullopt;
  return ParsedLine{*interval, std::string(rest.substr(0, colon)), std::string(rest.substr(colon + 2))};
}

std::vector<std::string> split_lines(std::string_view block) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= block.size()) {
    auto nl = block.find('\n', pos);
    if (nl == std::string_view::npos) nl = block.size();
    auto l = block.substr(pos, nl - pos);
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
    if (!l.empty()) out.emplace_back(l);
    pos = nl + 1;
  }
  return out;
}

std::vector<ParsedLine> parse_lines(std::string_view block) {
  std::vector<ParsedLine> out;
  for (const auto& l : split_lines(block)) {
    if (auto p = parse_line(l)) out.push_back(std::move(*p));
  }
  return out;
}

std::vector<std::string> split_fields(std::string_view record) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto sep = record.find(" | ", pos);
    if (sep == std::string_view::npos) {
      out.push_back(text::trim(record.substr(pos)));
      break;
    }
    out.push_back(text::trim(record.substr(pos, sep - pos)));
    pos = sep + 3;
  }
  return out;
}

std::string caption_source(std::size_t window_index) { return "CAPTION#" + std::to_string(window_index); }

std::optional<std::size_t> caption_source_index(std::string_view source) {
  constexpr std::string_view kPrefix = "CAPTION#";
  if (source.substr(0, kPrefix.size()) != kPrefix) return std::nullopt;
  std::size_t value = 0;
  const auto digits = source.substr(kPrefix.size());
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) return std::nullopt;
  return value;
}

}  // namespace classmind::prompts
