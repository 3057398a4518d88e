#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fbc {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Quick invariant suite on example-1 data at levels 1..max_level: mesh
/// nesting, det A = 1, Jacobian and gradient against finite differences,
/// transpose duality, Newton against Picard, and projection properties.
std::vector<CheckResult> run_invariant_suite(std::uint64_t seed = 1, int max_level = 3);

} // namespace fbc
