#pragma once

#include <cstddef>
#include <functional>

#include "qbound/linalg.hpp"
#include "qbound/state_models.hpp"
#include "qbound/test_observables.hpp"

namespace qbound {

enum class Backend { Auto, Generic, ClosedForm };

struct OptimizerConfig {
  int grid_points = 2048;               // first offset dimension
  int coarse_grid_points = 64;          // each further offset dimension
  int refine_iterations = 60;           // golden-section steps per coordinate
  int refine_candidates = 4;            // best grid points that get refined
  double offset_exclusion_radius = 1e-6;
  double min_offset_separation = 1e-3;  // offsets closer than this are skipped
  std::size_t max_evaluations = 20'000'000;
  unsigned threads = 0;                 // 0: QBOUND_THREADS, else hardware
  bool regularize = false;
  double regularization_epsilon = kDefaultRegularization;
  double support_tolerance = kDefaultSupportTolerance;
  double null_tolerance = kDefaultNullTolerance;
  double derivative_step = 0.0;         // 0 selects the family default
  Backend backend = Backend::Auto;

  /// Throws InvalidArgument on out-of-range fields.
  void validate() const;
};

/// Objective over r offsets. Non-finite values from the refinement stage
/// are ignored; +inf on the grid is kept as a genuine divergence.
using OffsetObjective = std::function<double(const RealVector&)>;

struct OffsetSearch {
  double value = 0.0;
  RealVector argmax;
  std::size_t grid_points = 0;
  std::size_t evaluations = 0;
  int refine_iterations = 0;
};

/// Grid search over offsets lambda with theta + lambda in the domain,
/// punctured around 0, followed by coordinate-wise golden-section
/// refinement of the best candidates. Ties go to the smaller |lambda|,
/// then to the lexicographically smaller vector.
OffsetSearch maximize_offsets(const OffsetObjective& objective, int r, const Domain& offsets_domain,
                              const OptimizerConfig& cfg);

/// Domain of admissible offsets Theta - theta.
Domain offset_domain(const Domain& domain, double theta);

/// Uniform grid of n points over the domain: open endpoints excluded, closed
/// ones included.
std::vector<double> uniform_grid(const Domain& domain, int n);

/// Worker count from cfg.threads, QBOUND_THREADS or the hardware.
unsigned worker_count(const OptimizerConfig& cfg);

}  // namespace qbound
