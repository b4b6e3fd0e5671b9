#pragma once

#include <memory>
#include <string>

#include "qbound/bound_result.hpp"
#include "qbound/optimizer.hpp"
#include "qbound/povm.hpp"
#include "qbound/qubit_mshot.hpp"
#include "qbound/state_models.hpp"
#include "qbound/test_observables.hpp"

namespace qbound {

/// Q_kl = Tr{G_k Omega_rho(G_l)}. Throws NonRealEntry when an entry has an
/// imaginary part above 1e-9 relative to the matrix scale.
InformationMatrix quantum_info_matrix(const TestObservableSet& set, const HermitianOperator& rho,
                                      double tol = kDefaultNullTolerance);

/// Q - f f^T computed from G_k - f_k rho. Equal to the subtraction whenever
/// the support condition holds, and free of cancellation at small offsets.
InformationMatrix quantum_shifted_matrix(const TestObservableSet& set, const HermitianOperator& rho,
                                         double tol = kDefaultNullTolerance);

BoundResult bound_from_matrix(const InformationMatrix& q, const RealVector& lambda, const RealVector& f);

/// a^T Q a / (a^T lambda)^2, the quantity whose infimum over a is the
/// inverse bound. Q is the unshifted matrix.
double quantum_information_function(const TestObservableSet& set, const HermitianOperator& rho, const RealVector& a);

/// 1 / (m F_Q); +inf when the Fisher information vanishes.
BoundResult qcrb(const StateFamily& family, double theta, int copies = 1);

/// Tr{D Omega_rho(D)} with D = rho(theta + lambda) - rho(theta). Throws
/// SupportViolation when D leaks into the kernel of rho(theta) unless
/// regularize is set, in which case rho(theta) is mixed with I/d.
double quantum_chi2(const StateFamily& family, double theta, double lambda, bool regularize = false,
                    double epsilon = kDefaultRegularization);

/// Evaluates the shifted Abel matrix (r Barankin rows, then s derivative
/// rows) at arbitrary offsets for a fixed anchor theta.
class AbelEvaluator {
 public:
  virtual ~AbelEvaluator() = default;

  int derivative_order() const noexcept { return s_; }
  const std::string& backend() const noexcept { return backend_; }

  virtual InformationMatrix shifted_matrix(const RealVector& offsets) const = 0;

  /// lambda = (offsets, 1, 0, ..., 0)
  RealVector lambda(const RealVector& offsets) const;
  BoundResult bound(const RealVector& offsets) const;

  /// The (0,1) value, i.e. the offsets -> 0 limit of the one-point
  /// Barankin objective.
  virtual double crb() const = 0;

  double support_violation() const noexcept { return support_violation_; }
  double regularization_epsilon() const noexcept { return regularization_epsilon_; }

 protected:
  AbelEvaluator(int s, std::string backend) : s_(s), backend_(std::move(backend)) {}

  int s_;
  std::string backend_;
  double support_violation_ = 0.0;
  double regularization_epsilon_ = 0.0;
};

/// Quantum evaluator for rho(theta)^(x)m. Uses the qubit closed forms for a
/// mixed-state QubitPhaseModel with s <= 1 unless cfg selects Generic.
std::unique_ptr<AbelEvaluator> make_quantum_evaluator(const StateFamily& family, double theta, int s, int copies,
                                                      const OptimizerConfig& cfg);

/// Classical evaluator for a fixed measurement on the given family.
std::unique_ptr<AbelEvaluator> make_classical_evaluator(const Povm& povm, const StateFamily& family, double theta,
                                                        int s, const OptimizerConfig& cfg);

/// sup over r offsets with theta + offset in the family domain. For s = 0
/// the result is max(search, crb()), flagged attained_at_limit when the
/// limit wins.
BoundResult sup_abel(const AbelEvaluator& evaluator, const Domain& domain, double theta, int r,
                     const OptimizerConfig& cfg);

/// Quantum Abel bound QAB(r, s) for m copies: r = 0 is the Bhattacharyya
/// bound, (1,0) the quantum HCRB, (0,1) the QCRB.
BoundResult sup_over_testpoints(const StateFamily& family, double theta, int r, int s,
                                const OptimizerConfig& cfg = {}, int copies = 1);

/// Classical Abel bound for a fixed measurement.
BoundResult classical_abel_sup(const Povm& povm, const StateFamily& family, double theta, int r, int s,
                               const OptimizerConfig& cfg = {});

/// sup_lambda lambda^2 / chi^2[p(.|theta+lambda), p(.|theta)].
BoundResult hcrb_classical_sup(const Povm& povm, const StateFamily& family, double theta,
                               const OptimizerConfig& cfg = {});

/// Non-owning shared pointer for APIs that store families.
std::shared_ptr<const StateFamily> borrow(const StateFamily& family);

/// The family itself for one copy, otherwise a MultiCopyFamily view.
std::shared_ptr<const StateFamily> copies_of(const StateFamily& family, int copies);

}  // namespace qbound
