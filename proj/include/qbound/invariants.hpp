#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qbound/operator_core.hpp"

namespace qbound {

/// Signature of an Omega implementation, injectable for mutation testing.
using OmegaFunction = std::function<HermitianOperator(const HermitianOperator& rho, const HermitianOperator& x)>;

struct InvariantResult {
  std::string group;  // omega, state, observables, classical, quantum, mshot, measurement, montecarlo
  std::string name;
  bool passed = false;
  double measured = 0.0;   // worst observed defect
  double tolerance = 0.0;
};

struct InvariantOptions {
  /// Omega under test; the library implementation when empty.
  OmegaFunction omega;
  std::uint64_t seed = 7;
  /// Runs invariants whose group equals the filter or whose name contains it.
  std::string filter;
};

std::vector<InvariantResult> run_invariants(const InvariantOptions& options = {});

/// "group.name" for every registered invariant.
std::vector<std::string> invariant_names();

}  // namespace qbound
