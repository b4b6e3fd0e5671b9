#pragma once

#include <limits>
#include <optional>
#include <string>

#include "qbound/linalg.hpp"
#include "qbound/povm.hpp"

namespace qbound {

enum class InfoKind { Classical, Quantum };

/// C or Q for a set of test observables.
struct InformationMatrix {
  RealMatrix matrix;
  InfoKind kind = InfoKind::Quantum;
  RealVector offsets;  // Barankin offsets that generated the rows
  /// True when the matrix already equals Q - f f^T (computed from the
  /// shifted observables G_k - f_k rho), in which case bounds ignore f.
  bool f_subtracted = false;
  /// Classical only: rows are directions g(x) of outcomes outside the
  /// support of p(.|theta). Coefficient vectors must be orthogonal to them.
  RealMatrix leak;
};

struct Diagnostics {
  std::size_t grid_points = 0;
  std::size_t evaluations = 0;
  int refine_iterations = 0;
  RealVector argmax;
  double edge_value = std::numeric_limits<double>::quiet_NaN();   // best value at nonzero offsets
  double limit_value = std::numeric_limits<double>::quiet_NaN();  // offsets -> 0 value (s = 0 only)
  bool attained_at_limit = false;
  double alpha = 1.0;
  bool in_range = true;
  double range_residual = 0.0;
  double support_violation = 0.0;
  double regularization_epsilon = 0.0;
  std::string backend;
};

struct BoundResult {
  double value = 0.0;
  RealVector optimal_a;
  RealVector optimal_offsets;
  Diagnostics diagnostics;
  std::optional<Povm> saturating_povm;
  InfoKind kind = InfoKind::Quantum;
};

/// lambda^T (M - f f^T)^+ lambda with the range of lambda checked; +inf
/// when lambda leaves the range. Shared by the classical and quantum paths.
BoundResult rayleigh_bound(const InformationMatrix& m, const RealVector& lambda, const RealVector& f);

}  // namespace qbound
