#pragma once

#include <string>
#include <vector>

namespace ellipstab::cli {

// Runs one CLI invocation. Exit status: 0 success, 1 unparseable input,
// 2 domain errors, 3 hypothesis-violation halts (resonance, refuted
// steepness, threshold failures) with a machine-readable reason on stdout.
int run(const std::vector<std::string>& args);

}  // namespace ellipstab::cli
