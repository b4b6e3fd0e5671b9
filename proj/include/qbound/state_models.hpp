#pragma once

#include <climits>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <vector>

#include "qbound/operator_core.hpp"

namespace qbound {

using Vec3 = Eigen::Vector3d;

/// Real interval of admissible parameter values.
struct Domain {
  double lower = -std::numbers::pi;
  double upper = std::numbers::pi;
  bool lower_open = true;
  bool upper_open = false;

  bool contains(double x) const noexcept;

  /// (-pi, pi]: pi is admissible, -pi is not.
  static Domain circle() { return {}; }
  static Domain closed(double lo, double hi) { return {lo, hi, false, false}; }
};

class BlochVector {
 public:
  BlochVector() = default;
  explicit BlochVector(const Vec3& r);
  BlochVector(double x, double y, double z) : BlochVector(Vec3(x, y, z)) {}

  const Vec3& vec() const noexcept { return r_; }
  double length() const { return r_.norm(); }

 private:
  Vec3 r_ = Vec3::Zero();
};

/// Rotation of r0 by angle theta about the unit axis n.
BlochVector bloch_evolve(const BlochVector& r0, const Vec3& n, double theta);

/// (g0 I + g . sigma) / 2
HermitianOperator bloch_operator(double g0, const Vec3& g);

/// -sum_pm (1 +- r)/2 ln((1 +- r)/2), in nats.
double binary_entropy(double r);

/// Inverse of binary_entropy on [0, 1], by bisection.
double entropy_to_bloch_length(double entropy);

/// One-parameter family theta -> rho(theta) over a domain.
class StateFamily {
 public:
  static constexpr int kUnbounded = INT_MAX;

  explicit StateFamily(Domain domain) : domain_(domain) {}
  virtual ~StateFamily() = default;

  virtual Index dim() const = 0;
  const Domain& domain() const noexcept { return domain_; }

  /// Highest derivative order computed in closed form (0 if none).
  virtual int analytic_order() const { return 0; }
  /// Highest derivative order available at all (closed form or stencil).
  virtual int max_order() const { return kUnbounded; }

  HermitianOperator evaluate(double theta) const;

  /// k-th derivative. Closed form when k <= analytic_order(), otherwise a
  /// central stencil with second-order accuracy; h <= 0 selects
  /// 1e-4 * max(1, |theta|), widened tenfold per order above 2.
  /// With richardson, two step sizes are combined.
  HermitianOperator derivative(double theta, int k, double h = 0.0, bool richardson = false) const;

  /// Finite-difference derivative regardless of closed-form availability.
  HermitianOperator stencil_derivative(double theta, int k, double h = 0.0) const;

 protected:
  virtual HermitianOperator do_evaluate(double theta) const = 0;
  virtual HermitianOperator do_derivative(double theta, int k) const;
  virtual double default_step(double theta) const;

 private:
  Domain domain_;
};

/// rho(theta) = (I + r_theta . sigma)/2 with r_theta the rotation of r0 about n.
class QubitPhaseModel final : public StateFamily {
 public:
  QubitPhaseModel(const BlochVector& r0, const Vec3& axis, Domain domain = Domain::circle());

  /// r0 = (0, r, 0), rotation about z.
  static QubitPhaseModel equatorial(double r, Domain domain = Domain::circle());

  Index dim() const override { return 2; }
  int analytic_order() const override { return kUnbounded; }

  const BlochVector& initial() const noexcept { return r0_; }
  const Vec3& axis() const noexcept { return axis_; }

  Vec3 bloch(double theta) const;
  Vec3 bloch_derivative(double theta, int k) const;

 protected:
  HermitianOperator do_evaluate(double theta) const override;
  HermitianOperator do_derivative(double theta, int k) const override;

 private:
  BlochVector r0_;
  Vec3 axis_;
  Vec3 parallel_;   // (n . r0) n
  Vec3 cos_part_;   // r0 - (n . r0) n
  Vec3 sin_part_;   // n x r0
};

/// (1 - eps)|Psi(theta)><Psi(theta)| + (eps/d) I.
class DepolarizedPureModel final : public StateFamily {
 public:
  using PureFamily = std::function<ComplexVector(double)>;

  /// |Psi(theta)> = exp(-i H theta)|psi0>; derivatives of all orders in closed form.
  DepolarizedPureModel(const ComplexVector& psi0, const HermitianOperator& generator, double epsilon,
                       Domain domain = Domain::circle());

  /// Arbitrary pure family; derivatives by stencil.
  DepolarizedPureModel(PureFamily psi, Index dim, double epsilon, Domain domain = Domain::circle());

  /// |+y> rotated about z, i.e. the equatorial qubit.
  static DepolarizedPureModel equatorial_qubit(double epsilon, Domain domain = Domain::circle());

  /// Uniform superposition in dimension d, phases imprinted by diag(0, 1, ..., d-1).
  static DepolarizedPureModel phase_ladder(Index d, double epsilon, Domain domain = Domain::circle());

  Index dim() const override { return dim_; }
  int analytic_order() const override { return generator_ ? kUnbounded : 0; }
  double epsilon() const noexcept { return epsilon_; }
  ComplexVector pure_state(double theta) const;

 protected:
  HermitianOperator do_evaluate(double theta) const override;
  HermitianOperator do_derivative(double theta, int k) const override;

 private:
  Index dim_;
  double epsilon_;
  PureFamily psi_;
  ComplexVector psi0_;
  std::optional<HermitianOperator> generator_;
};

/// theta -> rho(theta)^{(x) m}; derivatives by the Leibniz rule.
class MultiCopyFamily final : public StateFamily {
 public:
  MultiCopyFamily(std::shared_ptr<const StateFamily> base, int copies,
                  std::size_t max_dim = kDefaultDimensionCap);

  Index dim() const override { return dim_; }
  // Leibniz terms take base derivatives, closed form or not.
  int analytic_order() const override { return base_->max_order(); }
  int max_order() const override { return base_->max_order(); }
  int copies() const noexcept { return copies_; }
  const StateFamily& base() const noexcept { return *base_; }

 protected:
  HermitianOperator do_evaluate(double theta) const override;
  HermitianOperator do_derivative(double theta, int k) const override;

 private:
  ComplexMatrix leibniz(const std::vector<ComplexMatrix>& derivs, int k) const;

  std::shared_ptr<const StateFamily> base_;
  int copies_;
  Index dim_;
};

/// Family given by user callables. The derivative callable is optional.
class CallableFamily final : public StateFamily {
 public:
  using Evaluate = std::function<ComplexMatrix(double)>;
  using Derivative = std::function<ComplexMatrix(double, int)>;

  CallableFamily(Index dim, Evaluate evaluate, Domain domain = Domain::circle(),
                 Derivative derivative = {}, int analytic_order = 0);

  Index dim() const override { return dim_; }
  int analytic_order() const override { return analytic_order_; }

 protected:
  HermitianOperator do_evaluate(double theta) const override;
  HermitianOperator do_derivative(double theta, int k) const override;

 private:
  Index dim_;
  Evaluate evaluate_;
  Derivative derivative_;
  int analytic_order_;
};

/// States tabulated on a uniform grid, linearly interpolated in between.
/// Derivatives use stencils on grid nodes and stop at order 2.
class TabulatedFamily final : public StateFamily {
 public:
  TabulatedFamily(std::vector<double> grid, std::vector<HermitianOperator> states);

  Index dim() const override { return states_.front().dim(); }
  int max_order() const override { return 2; }

 protected:
  HermitianOperator do_evaluate(double theta) const override;
  double default_step(double theta) const override;

 private:
  std::vector<double> grid_;
  std::vector<HermitianOperator> states_;
  double spacing_;
};

/// Central finite-difference weights for the k-th derivative on the
/// integer offsets -p..p (Fornberg's recursion).
std::vector<double> central_stencil(int k, int p);

}  // namespace qbound
