#pragma once

#include <string>
#include <vector>

namespace fawsr::verify {

struct SuiteResult {
  std::string name;
  bool passed = false;
  double margin = 0.0;  // suite-specific figure of merit (see description)
  std::string description;
};

/// Run one invariant suite by name. Known suites: grad-tx, grad-rx,
/// majorization, delta, tightness, mul. Throws std::invalid_argument for an
/// unknown name.
SuiteResult run_suite(const std::string& name, std::uint64_t seed);

std::vector<std::string> suite_names();

}  // namespace fawsr::verify
