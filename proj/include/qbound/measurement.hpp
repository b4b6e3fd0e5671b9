#pragma once

#include "qbound/bound_result.hpp"
#include "qbound/optimizer.hpp"
#include "qbound/povm.hpp"
#include "qbound/test_observables.hpp"

namespace qbound {

/// a = (Q - f f^T)^+ lambda. With this scaling a^T lambda = a^T (Q - f f^T) a,
/// so the normalization constant is 1. Throws RangeViolation.
RealVector optimal_coefficients(const InformationMatrix& q, const RealVector& lambda, const RealVector& f);

/// Omega_rho(sum_k a_k (G_k - f_k rho)). Its eigenvalues are the deviations
/// of the optimal estimator.
HermitianOperator optimal_observable(const TestObservableSet& set, const HermitianOperator& rho, const RealVector& a);

/// Rank-1 projectors onto the eigenvectors of optimal_observable.
Povm optimal_povm(const TestObservableSet& set, const HermitianOperator& rho, const RealVector& a);

struct SaturationReport {
  double condition_i_residual = 0.0;    // max_x |Im Tr{rho E_x L}|
  double condition_ii_residual = 0.0;   // max_x |p(x) Tr{E_x L rho L} - Tr{rho E_x L}^2|
  double condition_iii_residual = 0.0;  // ||sum_{x in X+} E_x - I||_max
  double classical_equals_quantum_gap = 0.0;
  double classical_bound = 0.0;
  double quantum_bound = 0.0;
  double alpha = 1.0;
  Index degeneracy = 1;  // largest eigenvalue multiplicity of L
};

/// L = optimal_observable(set, rho, a). Diagnostic only, never throws on
/// unsaturated input.
SaturationReport saturation_check(const Povm& povm, const TestObservableSet& set, const HermitianOperator& rho,
                                  const RealVector& a, const RealVector& lambda, const RealVector& f);

/// Everything needed to run the optimal strategy at given test points.
struct OptimalMeasurement {
  TestObservableSet set;
  HermitianOperator state;
  RealVector lambda;
  RealVector a;
  Povm povm;
  RealVector estimator;  // deviations per outcome
  double bound = 0.0;
};

/// Builds the Abel set at the offsets (s derivative rows), solves for a, and
/// returns the saturating POVM and estimator. Multi-copy states for copies > 1.
OptimalMeasurement optimal_measurement(const StateFamily& family, double theta, const std::vector<double>& offsets,
                                       int s, int copies = 1, const OptimizerConfig& cfg = {});

/// Same for a computed bound. A result attained in the offsets -> 0 limit
/// uses the QCRB configuration.
OptimalMeasurement measurement_for_bound(const StateFamily& family, double theta, const BoundResult& bound, int s,
                                       int copies = 1, const OptimizerConfig& cfg = {});

/// max_x |1 + d/dtheta dev_theta(x)| with the measurement and the absolute
/// test points theta + offsets held fixed. Zero means theta_est(x) =
/// theta + dev(x) does not depend on theta to first order.
double estimator_theta_drift(const Povm& povm, const StateFamily& family, double theta,
                             const std::vector<double>& offsets, int s, double h = 1e-4);

}  // namespace qbound
