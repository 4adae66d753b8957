#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace classmind {

// A point on the media timeline. Stored as integer milliseconds so tiling and
// overlap checks are exact; rendered as seconds with three decimals.
class MediaTime {
 public:
  constexpr MediaTime() = default;

  static MediaTime from_ms(std::int64_t ms);
  static MediaTime from_seconds(double seconds);
  // Strict parse of "<digits>.<3 digits>" or plain digits (seconds).
  static MediaTime parse(const std::string& text);

  constexpr std::int64_t ms() const noexcept { return ms_; }
  double seconds() const noexcept { return static_cast<double>(ms_) / 1000.0; }
  std::string to_string() const;

  friend constexpr auto operator<=>(MediaTime, MediaTime) = default;

 private:
  constexpr explicit MediaTime(std::int64_t ms) : ms_(ms) {}
  std::int64_t ms_ = 0;
};

// Half-open interval [start, end) with start < end.
class TimeInterval {
 public:
  TimeInterval(MediaTime start, MediaTime end);
  static TimeInterval from_ms(std::int64_t start_ms, std::int64_t end_ms);

  MediaTime start() const noexcept { return start_; }
  MediaTime end() const noexcept { return end_; }
  std::int64_t start_ms() const noexcept { return start_.ms(); }
  std::int64_t end_ms() const noexcept { return end_.ms(); }
  std::int64_t duration_ms() const noexcept { return end_.ms() - start_.ms(); }

  bool contains(MediaTime t) const noexcept { return start_ <= t && t < end_; }
  bool within(MediaTime lo, MediaTime hi) const noexcept {
    return lo <= start_ && end_ <= hi;
  }
  bool overlaps(const TimeInterval& other) const noexcept {
    return start_ < other.end_ && other.start_ < end_;
  }
  std::string to_string() const;

  friend bool operator==(const TimeInterval&, const TimeInterval&) = default;
  friend auto operator<=>(const TimeInterval&, const TimeInterval&) = default;

 private:
  MediaTime start_;
  MediaTime end_;
};

// Length of a ∩ b. Touching intervals are disjoint.
MediaTime interval_overlap(const TimeInterval& a, const TimeInterval& b);

}  // namespace classmind
