#include "qbound/operator_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qbound/errors.hpp"

namespace qbound {

ComplexMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

ComplexMatrix pauli_y() {
  ComplexMatrix m(2, 2);
  m << 0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0;
  return m;
}

ComplexMatrix pauli_z() {
  ComplexMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

namespace {

ComplexMatrix hermitian_part(const ComplexMatrix& m) {
  return 0.5 * (m + m.adjoint());
}

void require_same_dim(const HermitianOperator& a, const HermitianOperator& b, std::string_view op) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorKind::DimensionMismatch, op,
                std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  }
}

// Largest-magnitude component of each column made real and positive.
void fix_phases(ComplexMatrix& vecs) {
  for (Index c = 0; c < vecs.cols(); ++c) {
    Index best = 0;
    double best_abs = -1.0;
    for (Index r = 0; r < vecs.rows(); ++r) {
      const double a = std::abs(vecs(r, c));
      if (a > best_abs + 1e-12) {
        best_abs = a;
        best = r;
      }
    }
    if (best_abs > 0.0) {
      const Complex phase = std::conj(vecs(best, c)) / best_abs;
      vecs.col(c) *= phase;
    }
  }
}

}  // namespace

HermitianOperator::HermitianOperator(const ComplexMatrix& entries) {
  if (entries.rows() != entries.cols() || entries.rows() < 1) {
    throw Error(ErrorKind::DimensionMismatch, "HermitianOperator",
                "expected a non-empty square matrix");
  }
  const double scale = qbound::max_abs(entries);
  const double defect = qbound::max_abs(ComplexMatrix(entries - entries.adjoint()));
  if (defect > 1e-12 * scale) {
    throw Error(ErrorKind::NonHermitian, "HermitianOperator",
                "||H - H^dagger||_max = " + std::to_string(defect));
  }
  entries_ = hermitian_part(entries);
}

HermitianOperator HermitianOperator::from_trusted(const ComplexMatrix& entries) {
  HermitianOperator h;
  h.entries_ = hermitian_part(entries);
  return h;
}

HermitianOperator HermitianOperator::identity(Index dim) {
  return from_trusted(ComplexMatrix::Identity(dim, dim));
}

HermitianOperator HermitianOperator::zero(Index dim) {
  return from_trusted(ComplexMatrix::Zero(dim, dim));
}

HermitianOperator& HermitianOperator::operator+=(const HermitianOperator& other) {
  require_same_dim(*this, other, "HermitianOperator::operator+");
  entries_ += other.entries_;
  return *this;
}

HermitianOperator& HermitianOperator::operator-=(const HermitianOperator& other) {
  require_same_dim(*this, other, "HermitianOperator::operator-");
  entries_ -= other.entries_;
  return *this;
}

HermitianOperator& HermitianOperator::operator*=(double s) {
  entries_ *= s;
  return *this;
}

double trace_product(const HermitianOperator& a, const HermitianOperator& b) {
  require_same_dim(a, b, "trace_product");
  // Tr{AB} = sum_ij A_ij B_ji = sum_ij A_ij conj(B_ij) for Hermitian B.
  return (a.matrix().array() * b.matrix().conjugate().array()).sum().real();
}

SpectralDecomposition spectral_decompose(const HermitianOperator& h) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h.matrix());
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::NumericalFailure, "spectral_decompose", "eigensolver did not converge");
  }
  SpectralDecomposition out{solver.eigenvalues(), solver.eigenvectors()};
  fix_phases(out.eigenvectors);
  return out;
}

namespace {

double psd_threshold(const RealVector& evals, double tol, std::string_view op) {
  const double top = evals.maxCoeff();
  const double scale = std::max(top, 0.0);
  const double cut = tol * scale;
  if (evals.minCoeff() < -cut && evals.minCoeff() < -1e-300) {
    throw Error(ErrorKind::NegativeEigenvalue, op,
                "min eigenvalue " + std::to_string(evals.minCoeff()));
  }
  return cut;
}

}  // namespace

SupportProjector support_projector(const HermitianOperator& rho, double tol) {
  const auto dec = spectral_decompose(rho);
  const double cut = psd_threshold(dec.eigenvalues, tol, "support_projector");
  const Index d = rho.dim();
  ComplexMatrix p = ComplexMatrix::Zero(d, d);
  Index rank = 0;
  for (Index i = 0; i < d; ++i) {
    if (dec.eigenvalues(i) <= cut) {
      p += dec.eigenvectors.col(i) * dec.eigenvectors.col(i).adjoint();
      ++rank;
    }
  }
  return {HermitianOperator::from_trusted(p), rank, cut};
}

OmegaOperator::OmegaOperator(const HermitianOperator& rho, double tol) {
  const auto dec = spectral_decompose(rho);
  const double cut = psd_threshold(dec.eigenvalues, tol, "omega_apply");
  const Index d = rho.dim();
  basis_ = dec.eigenvectors;
  eigenvalues_ = dec.eigenvalues;
  ComplexMatrix null_proj = ComplexMatrix::Zero(d, d);
  for (Index i = 0; i < d; ++i) {
    if (eigenvalues_(i) <= cut) {
      eigenvalues_(i) = 0.0;
      null_proj += basis_.col(i) * basis_.col(i).adjoint();
      ++null_rank_;
    }
  }
  null_projector_ = HermitianOperator::from_trusted(null_proj);
  weights_.resize(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) {
      const double s = eigenvalues_(i) + eigenvalues_(j);
      weights_(i, j) = s > 0.0 ? 2.0 / s : 0.0;
    }
  }
}

ComplexMatrix OmegaOperator::to_eigenbasis(const HermitianOperator& x) const {
  if (x.dim() != dim()) {
    throw Error(ErrorKind::DimensionMismatch, "omega_apply",
                std::to_string(dim()) + " vs " + std::to_string(x.dim()));
  }
  return basis_.adjoint() * x.matrix() * basis_;
}

HermitianOperator OmegaOperator::apply(const HermitianOperator& x) const {
  const ComplexMatrix xe = to_eigenbasis(x);
  const ComplexMatrix scaled = (weights_.cast<Complex>().array() * xe.array()).matrix();
  return HermitianOperator::from_trusted(basis_ * scaled * basis_.adjoint());
}

Complex OmegaOperator::inner(const ComplexMatrix& x_eig, const ComplexMatrix& y_eig) const {
  // Tr{X Omega(Y)} = sum_ij X_ji W_ij Y_ij
  return (x_eig.transpose().array() * weights_.cast<Complex>().array() * y_eig.array()).sum();
}

HermitianOperator omega_apply(const HermitianOperator& rho, const HermitianOperator& x, double tol) {
  if (rho.dim() != x.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "omega_apply",
                std::to_string(rho.dim()) + " vs " + std::to_string(x.dim()));
  }
  return OmegaOperator(rho, tol).apply(x);
}

HermitianOperator omega_apply_vectorized(const HermitianOperator& rho, const HermitianOperator& x,
                                         double tol) {
  if (rho.dim() != x.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "omega_apply_vectorized",
                std::to_string(rho.dim()) + " vs " + std::to_string(x.dim()));
  }
  const Index d = rho.dim();
  const ComplexMatrix id = ComplexMatrix::Identity(d, d);
  // Row-major vectorization: |A X B>> = (A (x) B^T)|X>>.
  const ComplexMatrix k = 0.5 * (kron(rho.matrix(), id) + kron(id, rho.matrix().transpose()));
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(k);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::NumericalFailure, "omega_apply_vectorized", "eigensolver did not converge");
  }
  const RealVector& kappa = solver.eigenvalues();
  // Eigenvalues of K are (p_i + p_j)/2, so its largest one equals max p.
  const double top = kappa.maxCoeff();
  const double cut = tol * std::max(top, 0.0);
  if (kappa.minCoeff() < -cut && kappa.minCoeff() < -1e-300) {
    throw Error(ErrorKind::NegativeEigenvalue, "omega_apply_vectorized",
                "min eigenvalue " + std::to_string(kappa.minCoeff()));
  }
  RealVector inv(kappa.size());
  for (Index i = 0; i < kappa.size(); ++i) {
    // A pair of null eigenvalues of rho gives kappa <= cut.
    inv(i) = kappa(i) > cut ? 1.0 / kappa(i) : 0.0;
  }
  ComplexVector vx(d * d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) vx(i * d + j) = x.matrix()(i, j);
  }
  const ComplexMatrix& u = solver.eigenvectors();
  const ComplexVector coeffs = u.adjoint() * vx;
  const ComplexVector vy = u * (inv.cast<Complex>().array() * coeffs.array()).matrix();
  ComplexMatrix y(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) y(i, j) = vy(i * d + j);
  }
  return HermitianOperator::from_trusted(y);
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

HermitianOperator tensor_power(const HermitianOperator& rho, int m, std::size_t max_dim) {
  if (m < 1) {
    throw Error(ErrorKind::InvalidArgument, "tensor_power", "m must be >= 1, got " + std::to_string(m));
  }
  double dim = 1.0;
  for (int i = 0; i < m; ++i) dim *= static_cast<double>(rho.dim());
  if (dim > static_cast<double>(max_dim)) {
    throw Error(ErrorKind::DimensionCap, "tensor_power",
                "d^m = " + std::to_string(static_cast<long long>(dim)) + " exceeds cap " +
                    std::to_string(max_dim));
  }
  ComplexMatrix out = rho.matrix();
  for (int i = 1; i < m; ++i) out = kron(out, rho.matrix());
  return HermitianOperator::from_trusted(out);
}

RealMatrix sym_pinv(const RealMatrix& m, double rcond) {
  const RealMatrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<RealMatrix> solver(sym);
  const RealVector& mu = solver.eigenvalues();
  const double top = mu.size() == 0 ? 0.0 : mu.cwiseAbs().maxCoeff();
  const double cut = rcond * top;
  RealVector inv(mu.size());
  for (Index i = 0; i < mu.size(); ++i) {
    inv(i) = (top > 0.0 && std::abs(mu(i)) > cut) ? 1.0 / mu(i) : 0.0;
  }
  const RealMatrix& v = solver.eigenvectors();
  RealMatrix out = v * inv.asDiagonal() * v.transpose();
  return 0.5 * (out + out.transpose());
}

bool in_range(const RealMatrix& m, const RealMatrix& m_pinv, const RealVector& v, double rel_tol) {
  const RealVector residual = m * (m_pinv * v) - v;
  return residual.norm() <= rel_tol * v.norm();
}

}  // namespace qbound
