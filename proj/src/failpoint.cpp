#include "classmind/failpoint.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <thread>

namespace classmind::failpoint {

void hit(const std::string& name) {
  static const char* spec = std::getenv("CLASSMIND_FAILPOINT");
  if (spec == nullptr) return;
  const std::string s(spec);
  if (s == "hang:" + name) {
    std::fprintf(stderr, "failpoint %s: hanging\n", name.c_str());
    std::fflush(stderr);
    while (true) std::this_thread::sleep_for(std::chrono::seconds(1));
  }
  if (s == "exit:" + name) {
    std::fprintf(stderr, "failpoint %s: exiting\n", name.c_str());
    std::fflush(stderr);
    std::_Exit(137);
  }
}

}  // namespace classmind::failpoint
