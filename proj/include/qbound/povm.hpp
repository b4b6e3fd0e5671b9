#pragma once

#include <vector>

#include "qbound/operator_core.hpp"
#include "qbound/state_models.hpp"

namespace qbound {

/// Positive operator-valued measure {E_x}.
class Povm {
 public:
  /// Checks E_x >= 0 and sum_x E_x = I, both within tol.
  explicit Povm(std::vector<HermitianOperator> elements, double tol = 1e-10);

  /// Positivity is still checked, completeness is not. Used to describe
  /// measurements that miss outcomes.
  static Povm partial(std::vector<HermitianOperator> elements, double tol = 1e-10);

  /// Rank-1 projectors onto the columns of an orthonormal basis.
  static Povm projective(const ComplexMatrix& basis);

  /// Qubit measurement (I +- n.sigma)/2 along the unit Bloch axis n.
  static Povm qubit_axis(const Vec3& n);

  Index size() const noexcept { return static_cast<Index>(elements_.size()); }
  Index dim() const { return elements_.front().dim(); }
  const std::vector<HermitianOperator>& elements() const noexcept { return elements_; }
  const HermitianOperator& operator[](Index x) const { return elements_[static_cast<std::size_t>(x)]; }

  /// ||sum_x E_x - I||_max
  double completeness_residual() const;

 private:
  Povm() = default;
  static void check_positive(const std::vector<HermitianOperator>& elements, double tol);

  std::vector<HermitianOperator> elements_;
};

inline constexpr double kDefaultProbabilityFloor = 1e-14;

struct ProbabilityModel {
  RealVector probabilities;
  std::vector<Index> support;  // outcomes with p > p_floor
  double p_floor = kDefaultProbabilityFloor;
};

/// p(x) = Tr{E_x rho}; negative roundoff is clipped to zero.
ProbabilityModel probabilities(const Povm& povm, const HermitianOperator& rho,
                               double p_floor = kDefaultProbabilityFloor);

}  // namespace qbound
