#pragma once

#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <unistd.h>

#include "classmind/error.hpp"
#include "classmind/gateway.hpp"
#include "classmind/model.hpp"

namespace testing {

namespace fs = std::filesystem;

inline fs::path source_dir() { return CLASSMIND_SOURCE_DIR; }
inline fs::path fixture_dir() { return source_dir() / "tests/fixtures/lesson30"; }
inline fs::path rubric_path() { return source_dir() / "data/rubrics/danielson_subset.json"; }
inline fs::path taxonomy_path() { return source_dir() / "data/taxonomy/copus.json"; }

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> n{0};
    path_ = fs::temp_directory_path() /
            ("cm-test-" + std::to_string(::getpid()) + "-" + std::to_string(n++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline std::shared_ptr<classmind::MockBackend> fixture_backend() {
  return std::make_shared<classmind::MockBackend>(classmind::MockFixtures::load(fixture_dir()));
}

inline classmind::GatewayConfig fast_config() {
  classmind::GatewayConfig c;
  c.base_backoff = std::chrono::milliseconds(1);
  return c;
}

inline classmind::TranscriptTurn turn(std::int64_t s, std::int64_t e, classmind::SpeakerRole who,
                                      std::string text) {
  return {classmind::TimeInterval::from_ms(s, e), who, std::move(text), {}};
}

// Expects `expr` to throw classmind::Error with the given code.
#define CHECK_CODE(expr, expected)                                      \
  do {                                                                  \
    bool thrown_ = false;                                               \
    try {                                                               \
      (void)(expr);                                                     \
    } catch (const classmind::Error& e_) {                              \
      thrown_ = true;                                                   \
      CHECK_MESSAGE(e_.code() == (expected), "got " << e_.code_name()); \
    }                                                                   \
    CHECK_MESSAGE(thrown_, "no classmind::Error thrown");               \
  } while (0)

}  // namespace testing
