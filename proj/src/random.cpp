#include "qbound/random.hpp"

#include <cmath>
#include <numbers>

namespace qbound {

double Random::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u = 0.0;
  while (u == 0.0) u = uniform();
  const double v = uniform();
  const double rad = std::sqrt(-2.0 * std::log(u));
  spare_ = rad * std::sin(2.0 * std::numbers::pi * v);
  has_spare_ = true;
  return rad * std::cos(2.0 * std::numbers::pi * v);
}

HermitianOperator Random::hermitian(Index d) {
  ComplexMatrix m(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) m(i, j) = complex_normal();
  }
  return HermitianOperator::from_trusted(m + m.adjoint());
}

ComplexMatrix Random::unitary(Index d) {
  ComplexMatrix g(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) g(i, j) = complex_normal();
  }
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix r = qr.matrixQR();
  for (Index j = 0; j < d; ++j) {
    const double a = std::abs(r(j, j));
    if (a > 0.0) q.col(j) *= r(j, j) / a;
  }
  return q;
}

HermitianOperator Random::density_matrix(Index d, double min_eig) {
  RealVector w(d);
  for (Index i = 0; i < d; ++i) w(i) = -std::log(std::max(uniform(), 1e-300));
  w /= w.sum();
  w = (1.0 - d * min_eig) * w.array() + min_eig;
  const ComplexMatrix u = unitary(d);
  return HermitianOperator::from_trusted(u * w.cast<Complex>().asDiagonal() * u.adjoint());
}

Vec3 Random::unit_vector() {
  Vec3 v(normal(), normal(), normal());
  while (v.norm() == 0.0) v = Vec3(normal(), normal(), normal());
  return v / v.norm();
}

Vec3 Random::bloch_vector(double max_len) {
  return unit_vector() * (max_len * std::cbrt(uniform()));
}

Povm Random::qubit_projective() { return Povm::qubit_axis(unit_vector()); }

}  // namespace qbound
