#include "classmind/time.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "classmind/error.hpp"

namespace classmind {

MediaTime MediaTime::from_ms(std::int64_t ms) {
  if (ms < 0) fail(ErrorCode::kRange, "media time must be >= 0, got " + std::to_string(ms) + " ms");
  return MediaTime(ms);
}

MediaTime MediaTime::from_seconds(double seconds) {
  if (!std::isfinite(seconds)) fail(ErrorCode::kRange, "media time must be finite");
  return from_ms(std::llround(seconds * 1000.0));
}

MediaTime MediaTime::parse(const std::string& text) {
  const auto dot = text.find('.');
  const std::string whole = text.substr(0, dot);
  const std::string frac = dot == std::string::npos ? "000" : text.substr(dot + 1);
  auto digits = [](const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  if (!digits(whole) || !digits(frac) || frac.size() != 3 || whole.size() > 15) {
    fail(ErrorCode::kParse, "malformed media time '" + text + "'");
  }
  return from_ms(std::stoll(whole) * 1000 + std::stoll(frac));
}

std::string MediaTime::to_string() const {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%lld.%03lld", static_cast<long long>(ms_ / 1000),
                static_cast<long long>(ms_ % 1000));
  return buf;
}

TimeInterval::TimeInterval(MediaTime start, MediaTime end) : start_(start), end_(end) {
  if (!(start_ < end_)) {
    fail(ErrorCode::kRange, "interval requires start < end, got [" + start_.to_string() + ", " +
                                end_.to_string() + ")");
  }
}

TimeInterval TimeInterval::from_ms(std::int64_t start_ms, std::int64_t end_ms) {
  return TimeInterval(MediaTime::from_ms(start_ms), MediaTime::from_ms(end_ms));
}

std::string TimeInterval::to_string() const {
  return "[" + start_.to_string() + ", " + end_.to_string() + ")";
}

MediaTime interval_overlap(const TimeInterval& a, const TimeInterval& b) {
  const auto lo = std::max(a.start_ms(), b.start_ms());
  const auto hi = std::min(a.end_ms(), b.end_ms());
  return MediaTime::from_ms(hi > lo ? hi - lo : 0);
}

}  // namespace classmind
