#pragma once

#include <string>
#include <vector>

#include "qrc/harness/experiments.hpp"

namespace qrc::harness {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Fast structural checks on a prepared workbench: simplex features, moment
// symmetry and identity, eigentask orthonormality, Parseval, kappa fixed point,
// ridge normal equations and sampler determinism.
std::vector<CheckResult> run_validation(const Workbench& bench);

}  // namespace qrc::harness
