#pragma once

#include <string>

// Crash-injection hooks for restart tests. CLASSMIND_FAILPOINT names a point;
// when execution reaches it the process either stalls forever ("hang:<name>",
// so a supervisor can SIGKILL it) or exits immediately ("exit:<name>").
namespace classmind::failpoint {

void hit(const std::string& name);

}  // namespace classmind::failpoint
