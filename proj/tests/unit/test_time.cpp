#include "helpers.hpp"

#include "classmind/time.hpp"

using namespace classmind;

TEST_SUITE("time") {

TEST_CASE("media time renders three decimals and parses back") {
  CHECK(MediaTime::from_ms(0).to_string() == "0.000");
  CHECK(MediaTime::from_ms(1800000).to_string() == "1800.000");
  CHECK(MediaTime::from_ms(61005).to_string() == "61.005");
  CHECK(MediaTime::parse("61.005").ms() == 61005);
  CHECK(MediaTime::parse("12").ms() == 12000);
  CHECK(MediaTime::from_seconds(1.0005).ms() == 1001);

  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::int64_t> d(0, 10'000'000'000);
  for (int i = 0; i < 500; ++i) {
    const auto t = MediaTime::from_ms(d(rng));
    CHECK(MediaTime::parse(t.to_string()) == t);
  }
}

TEST_CASE("malformed or negative times are rejected") {
  CHECK_CODE(MediaTime::from_ms(-1), ErrorCode::kRange);
  CHECK_CODE(MediaTime::parse("1.5"), ErrorCode::kParse);
  CHECK_CODE(MediaTime::parse("-1.000"), ErrorCode::kParse);
  CHECK_CODE(MediaTime::parse("abc"), ErrorCode::kParse);
  CHECK_CODE(MediaTime::parse(""), ErrorCode::kParse);
}

TEST_CASE("intervals are half-open") {
  const auto a = TimeInterval::from_ms(0, 10);
  const auto b = TimeInterval::from_ms(10, 20);
  CHECK(a.contains(MediaTime::from_ms(0)));
  CHECK_FALSE(a.contains(MediaTime::from_ms(10)));
  CHECK_FALSE(a.overlaps(b));
  CHECK(interval_overlap(a, b).ms() == 0);
  CHECK(interval_overlap(a, TimeInterval::from_ms(5, 15)).ms() == 5);
  CHECK(a.to_string() == "[0.000, 0.010)");
  CHECK_CODE(TimeInterval::from_ms(5, 5), ErrorCode::kRange);
  CHECK_CODE(TimeInterval::from_ms(6, 5), ErrorCode::kRange);
}

TEST_CASE("overlap is symmetric and bounded by both lengths") {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> d(0, 1000);
  for (int i = 0; i < 1000; ++i) {
    int s1 = d(rng), s2 = d(rng);
    const auto a = TimeInterval::from_ms(s1, s1 + 1 + d(rng));
    const auto b = TimeInterval::from_ms(s2, s2 + 1 + d(rng));
    const auto o = interval_overlap(a, b).ms();
    CHECK(o == interval_overlap(b, a).ms());
    CHECK(o <= std::min(a.duration_ms(), b.duration_ms()));
    CHECK((o > 0) == a.overlaps(b));
  }
}

}
