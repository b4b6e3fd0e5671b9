#include "qbound/state_models.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qbound/errors.hpp"

namespace qbound {

bool Domain::contains(double x) const noexcept {
  const bool above = lower_open ? x > lower : x >= lower;
  const bool below = upper_open ? x < upper : x <= upper;
  return above && below;
}

BlochVector::BlochVector(const Vec3& r) : r_(r) {
  if (!(r.norm() <= 1.0 + 1e-12)) {
    throw Error(ErrorKind::OutOfRange, "BlochVector", "|r| = " + std::to_string(r.norm()) + " > 1");
  }
}

namespace {

void require_unit_axis(const Vec3& n, std::string_view op) {
  if (std::abs(n.norm() - 1.0) > 1e-12) {
    throw Error(ErrorKind::NonUnitAxis, op, "|n| = " + std::to_string(n.norm()));
  }
}

}  // namespace

BlochVector bloch_evolve(const BlochVector& r0, const Vec3& n, double theta) {
  require_unit_axis(n, "bloch_evolve");
  const Vec3& r = r0.vec();
  const double along = n.dot(r);
  const Vec3 out = std::cos(theta) * (r - along * n) + along * n + std::sin(theta) * n.cross(r);
  // Rotation preserves the length; rounding can push |r| = 1 a hair above.
  return BlochVector(out.norm() > 1.0 ? Vec3(out / out.norm()) : out);
}

HermitianOperator bloch_operator(double g0, const Vec3& g) {
  ComplexMatrix m = g0 * ComplexMatrix::Identity(2, 2) + g.x() * pauli_x() + g.y() * pauli_y() +
                    g.z() * pauli_z();
  return HermitianOperator::from_trusted(0.5 * m);
}

double binary_entropy(double r) {
  double s = 0.0;
  for (double sign : {1.0, -1.0}) {
    const double p = 0.5 * (1.0 + sign * r);
    if (p > 0.0) s -= p * std::log(p);
  }
  return s;
}

double entropy_to_bloch_length(double entropy) {
  const double ln2 = std::log(2.0);
  if (!(entropy >= 0.0 && entropy <= ln2 + 1e-15)) {
    throw Error(ErrorKind::OutOfRange, "entropy_to_bloch_length",
                "entropy " + std::to_string(entropy) + " outside [0, ln 2]");
  }
  // binary_entropy is decreasing on [0, 1].
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > 1e-15) {
    const double mid = 0.5 * (lo + hi);
    if (binary_entropy(mid) > entropy) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::vector<double> central_stencil(int k, int p) {
  const int n = 2 * p + 1;
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = static_cast<double>(i - p);
  std::vector<std::vector<double>> c(n, std::vector<double>(k + 1, 0.0));
  double c1 = 1.0;
  double c4 = x[0];
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, k);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i];
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int s = mn; s >= 1; --s) c[i][s] = c1 * (s * c[i - 1][s - 1] - c5 * c[i - 1][s]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int s = mn; s >= 1; --s) c[j][s] = (c4 * c[j][s] - s * c[j][s - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = c[i][k];
  return w;
}

HermitianOperator StateFamily::evaluate(double theta) const {
  if (!domain_.contains(theta)) {
    throw Error(ErrorKind::OutOfDomain, "evaluate", "theta = " + std::to_string(theta));
  }
  return do_evaluate(theta);
}

HermitianOperator StateFamily::do_derivative(double, int k) const {
  throw Error(ErrorKind::OrderUnavailable, "derivative",
              "no closed form for order " + std::to_string(k));
}

double StateFamily::default_step(double theta) const {
  return 1e-4 * std::max(1.0, std::abs(theta));
}

HermitianOperator StateFamily::derivative(double theta, int k, double h, bool richardson) const {
  if (k < 1) {
    throw Error(ErrorKind::InvalidArgument, "derivative", "order must be >= 1");
  }
  if (k > max_order()) {
    throw Error(ErrorKind::OrderUnavailable, "derivative",
                "order " + std::to_string(k) + " exceeds " + std::to_string(max_order()));
  }
  if (!domain_.contains(theta)) {
    throw Error(ErrorKind::OutOfDomain, "derivative", "theta = " + std::to_string(theta));
  }
  if (k <= analytic_order()) return do_derivative(theta, k);
  if (!richardson) return stencil_derivative(theta, k, h);
  const double step = h > 0.0 ? h : default_step(theta) * std::pow(10.0, std::max(0, k - 2));
  const auto coarse = stencil_derivative(theta, k, step);
  const auto fine = stencil_derivative(theta, k, 0.5 * step);
  return (4.0 / 3.0) * fine - (1.0 / 3.0) * coarse;
}

HermitianOperator StateFamily::stencil_derivative(double theta, int k, double h) const {
  // Roundoff grows like eps / h^k, so higher orders start from a wider step.
  const double step = h > 0.0 ? h : default_step(theta) * std::pow(10.0, std::max(0, k - 2));
  const int p = (k + 1) / 2;
  for (int j = -p; j <= p; ++j) {
    if (!domain_.contains(theta + j * step)) {
      throw Error(ErrorKind::OutOfDomain, "derivative",
                  "stencil point " + std::to_string(theta + j * step) + " leaves the domain");
    }
  }
  const auto w = central_stencil(k, p);
  ComplexMatrix acc = ComplexMatrix::Zero(dim(), dim());
  for (int j = -p; j <= p; ++j) {
    const double wj = w[j + p];
    if (wj == 0.0) continue;
    acc += wj * do_evaluate(theta + j * step).matrix();
  }
  acc /= std::pow(step, k);
  // Every state has unit trace, so any trace left here is cancellation error.
  acc.diagonal().array() -= acc.trace() / static_cast<double>(dim());
  return HermitianOperator::from_trusted(acc);
}

// --- QubitPhaseModel ---

QubitPhaseModel::QubitPhaseModel(const BlochVector& r0, const Vec3& axis, Domain domain)
    : StateFamily(domain), r0_(r0), axis_(axis) {
  require_unit_axis(axis, "QubitPhaseModel");
  const Vec3& r = r0.vec();
  parallel_ = axis.dot(r) * axis;
  cos_part_ = r - parallel_;
  sin_part_ = axis.cross(r);
}

QubitPhaseModel QubitPhaseModel::equatorial(double r, Domain domain) {
  return QubitPhaseModel(BlochVector(0.0, r, 0.0), Vec3::UnitZ(), domain);
}

Vec3 QubitPhaseModel::bloch(double theta) const {
  return std::cos(theta) * cos_part_ + parallel_ + std::sin(theta) * sin_part_;
}

Vec3 QubitPhaseModel::bloch_derivative(double theta, int k) const {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  // d^k/dtheta^k of (cos, sin) cycles with period four.
  double dc = 0.0;
  double ds = 0.0;
  switch (k % 4) {
    case 0: dc = c; ds = s; break;
    case 1: dc = -s; ds = c; break;
    case 2: dc = -c; ds = -s; break;
    default: dc = s; ds = -c; break;
  }
  return dc * cos_part_ + ds * sin_part_;
}

HermitianOperator QubitPhaseModel::do_evaluate(double theta) const {
  return bloch_operator(1.0, bloch(theta));
}

HermitianOperator QubitPhaseModel::do_derivative(double theta, int k) const {
  return bloch_operator(0.0, bloch_derivative(theta, k));
}

// --- DepolarizedPureModel ---

namespace {

void require_epsilon(double eps) {
  if (!(eps >= 0.0 && eps <= 1.0)) {
    throw Error(ErrorKind::OutOfRange, "DepolarizedPureModel",
                "epsilon " + std::to_string(eps) + " outside [0, 1]");
  }
}

ComplexVector normalized(const ComplexVector& v) {
  const double n = v.norm();
  if (std::abs(n - 1.0) > 1e-10) {
    throw Error(ErrorKind::InvalidArgument, "DepolarizedPureModel",
                "pure state has norm " + std::to_string(n));
  }
  return v / n;
}

}  // namespace

DepolarizedPureModel::DepolarizedPureModel(const ComplexVector& psi0, const HermitianOperator& generator,
                                           double epsilon, Domain domain)
    : StateFamily(domain), dim_(psi0.size()), epsilon_(epsilon), psi0_(normalized(psi0)),
      generator_(generator) {
  require_epsilon(epsilon);
  if (generator.dim() != dim_) {
    throw Error(ErrorKind::DimensionMismatch, "DepolarizedPureModel", "generator dimension");
  }
  const auto dec = spectral_decompose(generator);
  const ComplexMatrix u = dec.eigenvectors;
  const RealVector lam = dec.eigenvalues;
  const ComplexVector start = psi0_;
  psi_ = [u, lam, start](double theta) {
    ComplexVector phases(lam.size());
    for (Index i = 0; i < lam.size(); ++i) phases(i) = std::exp(Complex(0.0, -lam(i) * theta));
    return ComplexVector(u * (phases.asDiagonal() * (u.adjoint() * start)));
  };
}

DepolarizedPureModel::DepolarizedPureModel(PureFamily psi, Index dim, double epsilon, Domain domain)
    : StateFamily(domain), dim_(dim), epsilon_(epsilon), psi_(std::move(psi)) {
  require_epsilon(epsilon);
}

DepolarizedPureModel DepolarizedPureModel::equatorial_qubit(double epsilon, Domain domain) {
  ComplexVector plus_y(2);
  plus_y << 1.0 / std::sqrt(2.0), Complex(0.0, 1.0 / std::sqrt(2.0));
  return DepolarizedPureModel(plus_y, HermitianOperator::from_trusted(0.5 * pauli_z()), epsilon, domain);
}

DepolarizedPureModel DepolarizedPureModel::phase_ladder(Index d, double epsilon, Domain domain) {
  if (d < 2) throw Error(ErrorKind::InvalidArgument, "DepolarizedPureModel", "dimension must be >= 2");
  ComplexVector psi = ComplexVector::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));
  ComplexMatrix h = ComplexMatrix::Zero(d, d);
  for (Index i = 0; i < d; ++i) h(i, i) = static_cast<double>(i);
  return DepolarizedPureModel(psi, HermitianOperator::from_trusted(h), epsilon, domain);
}

ComplexVector DepolarizedPureModel::pure_state(double theta) const {
  ComplexVector v = psi_(theta);
  if (v.size() != dim_) {
    throw Error(ErrorKind::DimensionMismatch, "DepolarizedPureModel", "pure state dimension");
  }
  return normalized(v);
}

HermitianOperator DepolarizedPureModel::do_evaluate(double theta) const {
  const ComplexVector v = pure_state(theta);
  ComplexMatrix m = (1.0 - epsilon_) * (v * v.adjoint());
  m.diagonal().array() += epsilon_ / static_cast<double>(dim_);
  return HermitianOperator::from_trusted(m);
}

HermitianOperator DepolarizedPureModel::do_derivative(double theta, int k) const {
  const ComplexVector v = pure_state(theta);
  const ComplexMatrix& h = generator_->matrix();
  ComplexMatrix d = v * v.adjoint();
  // d/dtheta P = -i [H, P]
  for (int i = 0; i < k; ++i) d = Complex(0.0, -1.0) * (h * d - d * h);
  return HermitianOperator::from_trusted((1.0 - epsilon_) * d);
}

// --- MultiCopyFamily ---

MultiCopyFamily::MultiCopyFamily(std::shared_ptr<const StateFamily> base, int copies, std::size_t max_dim)
    : StateFamily(base->domain()), base_(std::move(base)), copies_(copies) {
  if (copies < 1) throw Error(ErrorKind::InvalidArgument, "MultiCopyFamily", "copies must be >= 1");
  double dim = 1.0;
  for (int i = 0; i < copies; ++i) dim *= static_cast<double>(base_->dim());
  if (dim > static_cast<double>(max_dim)) {
    throw Error(ErrorKind::DimensionCap, "MultiCopyFamily",
                "d^m = " + std::to_string(static_cast<long long>(dim)) + " exceeds cap " +
                    std::to_string(max_dim));
  }
  dim_ = static_cast<Index>(dim);
}

HermitianOperator MultiCopyFamily::do_evaluate(double theta) const {
  return tensor_power(base_->evaluate(theta), copies_, static_cast<std::size_t>(dim_));
}

ComplexMatrix MultiCopyFamily::leibniz(const std::vector<ComplexMatrix>& derivs, int k) const {
  // Sum over compositions k_1 + ... + k_m = k of k!/(k_1!...k_m!) (x)_i rho^(k_i).
  ComplexMatrix total = ComplexMatrix::Zero(dim_, dim_);
  std::vector<int> parts(copies_, 0);
  std::function<void(int, int)> recurse = [&](int slot, int remaining) {
    if (slot == copies_ - 1) {
      parts[slot] = remaining;
      double coeff = std::tgamma(k + 1.0);
      ComplexMatrix prod = derivs[parts[0]];
      coeff /= std::tgamma(parts[0] + 1.0);
      for (int i = 1; i < copies_; ++i) {
        prod = kron(prod, derivs[parts[i]]);
        coeff /= std::tgamma(parts[i] + 1.0);
      }
      total += coeff * prod;
      return;
    }
    for (int take = 0; take <= remaining; ++take) {
      parts[slot] = take;
      recurse(slot + 1, remaining - take);
    }
  };
  recurse(0, k);
  return total;
}

HermitianOperator MultiCopyFamily::do_derivative(double theta, int k) const {
  std::vector<ComplexMatrix> derivs;
  derivs.reserve(k + 1);
  derivs.push_back(base_->evaluate(theta).matrix());
  for (int j = 1; j <= k; ++j) derivs.push_back(base_->derivative(theta, j).matrix());
  return HermitianOperator::from_trusted(leibniz(derivs, k));
}

// --- CallableFamily ---

CallableFamily::CallableFamily(Index dim, Evaluate evaluate, Domain domain, Derivative derivative,
                               int analytic_order)
    : StateFamily(domain), dim_(dim), evaluate_(std::move(evaluate)), derivative_(std::move(derivative)),
      analytic_order_(derivative_ ? analytic_order : 0) {}

HermitianOperator CallableFamily::do_evaluate(double theta) const {
  HermitianOperator h(evaluate_(theta));
  if (h.dim() != dim_) throw Error(ErrorKind::DimensionMismatch, "evaluate", "callable returned wrong size");
  return h;
}

HermitianOperator CallableFamily::do_derivative(double theta, int k) const {
  HermitianOperator h(derivative_(theta, k));
  if (h.dim() != dim_) throw Error(ErrorKind::DimensionMismatch, "derivative", "callable returned wrong size");
  return h;
}

// --- TabulatedFamily ---

TabulatedFamily::TabulatedFamily(std::vector<double> grid, std::vector<HermitianOperator> states)
    : StateFamily(Domain::closed(grid.empty() ? 0.0 : grid.front(), grid.empty() ? 0.0 : grid.back())),
      grid_(std::move(grid)), states_(std::move(states)) {
  if (grid_.size() < 2 || grid_.size() != states_.size()) {
    throw Error(ErrorKind::InvalidArgument, "TabulatedFamily", "need >= 2 grid points with one state each");
  }
  spacing_ = (grid_.back() - grid_.front()) / static_cast<double>(grid_.size() - 1);
  for (std::size_t i = 1; i < grid_.size(); ++i) {
    if (std::abs(grid_[i] - grid_[i - 1] - spacing_) > 1e-9 * std::max(1.0, std::abs(spacing_)) ||
        spacing_ <= 0.0) {
      throw Error(ErrorKind::InvalidArgument, "TabulatedFamily", "grid must be uniform and increasing");
    }
    if (states_[i].dim() != states_[0].dim()) {
      throw Error(ErrorKind::DimensionMismatch, "TabulatedFamily", "states differ in dimension");
    }
  }
}

HermitianOperator TabulatedFamily::do_evaluate(double theta) const {
  const double pos = (theta - grid_.front()) / spacing_;
  auto i = static_cast<std::size_t>(std::clamp(std::floor(pos), 0.0, static_cast<double>(grid_.size() - 2)));
  const double t = std::clamp(pos - static_cast<double>(i), 0.0, 1.0);
  if (t < 1e-12) return states_[i];
  if (t > 1.0 - 1e-12) return states_[i + 1];
  return (1.0 - t) * states_[i] + t * states_[i + 1];
}

double TabulatedFamily::default_step(double) const { return spacing_; }

}  // namespace qbound
