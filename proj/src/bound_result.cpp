#include "qbound/bound_result.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "qbound/errors.hpp"
#include "qbound/operator_core.hpp"

namespace qbound {

namespace {

// Orthonormal basis of the null space of the rows of `leak`.
RealMatrix allowed_directions(const RealMatrix& leak, Index n) {
  if (leak.rows() == 0) return RealMatrix::Identity(n, n);
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(leak.transpose() * leak);
  const double top = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
  std::vector<Index> keep;
  for (Index i = 0; i < n; ++i) {
    if (std::abs(es.eigenvalues()(i)) <= 1e-12 * top) keep.push_back(i);
  }
  RealMatrix basis(n, static_cast<Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) basis.col(static_cast<Index>(j)) = es.eigenvectors().col(keep[j]);
  return basis;
}

}  // namespace

BoundResult rayleigh_bound(const InformationMatrix& m, const RealVector& lambda, const RealVector& f) {
  const Index n = m.matrix.rows();
  if (m.matrix.cols() != n || lambda.size() != n || (!m.f_subtracted && f.size() != n)) {
    throw Error(ErrorKind::DimensionMismatch, "rayleigh_bound",
                "matrix " + std::to_string(n) + ", lambda " + std::to_string(lambda.size()));
  }
  RealMatrix shifted = m.matrix;
  if (!m.f_subtracted) shifted -= f * f.transpose();

  BoundResult out;
  out.kind = m.kind;
  out.optimal_offsets = m.offsets;
  if (lambda.isZero(0.0)) {
    out.value = 0.0;
    out.optimal_a = RealVector::Zero(n);
    return out;
  }
  const RealMatrix basis = allowed_directions(m.leak, n);
  if (basis.cols() == 0) {
    // Every direction has infinite variance weight, so the supremum is 0.
    out.value = 0.0;
    out.optimal_a = RealVector::Zero(n);
    return out;
  }
  const RealMatrix reduced = basis.transpose() * shifted * basis;
  const RealVector lam = basis.transpose() * lambda;
  const RealMatrix pinv = sym_pinv(reduced);
  const RealVector b = pinv * lam;
  out.optimal_a = basis * b;
  const RealVector resid = reduced * b - lam;
  out.diagnostics.range_residual = lam.norm() > 0.0 ? resid.norm() / lam.norm() : 0.0;
  out.diagnostics.in_range = lam.norm() == 0.0 || in_range(reduced, pinv, lam);
  if (!out.diagnostics.in_range) {
    out.value = std::numeric_limits<double>::infinity();
    return out;
  }
  out.value = std::max(0.0, lam.dot(b));
  return out;
}

}  // namespace qbound
