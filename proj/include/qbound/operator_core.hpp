#pragma once

#include <cstddef>

#include "qbound/linalg.hpp"

namespace qbound {

inline constexpr double kDefaultNullTolerance = 1e-12;
inline constexpr std::size_t kDefaultDimensionCap = 4096;

/// Dense complex Hermitian matrix. Construction checks Hermiticity to
/// 1e-12 relative to the largest entry and stores the exactly Hermitian part.
class HermitianOperator {
 public:
  HermitianOperator() = default;
  explicit HermitianOperator(const ComplexMatrix& entries);

  /// Builds from a matrix that is Hermitian up to roundoff by construction
  /// (products like V D V^dagger). Symmetrizes without checking.
  static HermitianOperator from_trusted(const ComplexMatrix& entries);
  static HermitianOperator identity(Index dim);
  static HermitianOperator zero(Index dim);

  Index dim() const noexcept { return entries_.rows(); }
  const ComplexMatrix& matrix() const noexcept { return entries_; }
  double max_abs() const { return qbound::max_abs(entries_); }
  double trace() const { return entries_.trace().real(); }

  HermitianOperator& operator+=(const HermitianOperator& other);
  HermitianOperator& operator-=(const HermitianOperator& other);
  HermitianOperator& operator*=(double s);

  friend HermitianOperator operator+(HermitianOperator a, const HermitianOperator& b) { return a += b; }
  friend HermitianOperator operator-(HermitianOperator a, const HermitianOperator& b) { return a -= b; }
  friend HermitianOperator operator*(double s, HermitianOperator a) { return a *= s; }
  friend HermitianOperator operator*(HermitianOperator a, double s) { return a *= s; }

 private:
  ComplexMatrix entries_;
};

/// Tr{A B} for Hermitian A, B (real up to roundoff).
double trace_product(const HermitianOperator& a, const HermitianOperator& b);

struct SpectralDecomposition {
  RealVector eigenvalues;       // ascending
  ComplexMatrix eigenvectors;   // columns, phase-fixed
};

struct SupportProjector {
  HermitianOperator projector;  // onto the numerical kernel
  Index rank = 0;               // dimension of the kernel
  double null_tolerance = 0.0;  // absolute threshold that was applied
};

SpectralDecomposition spectral_decompose(const HermitianOperator& h);

SupportProjector support_projector(const HermitianOperator& rho,
                                   double tol = kDefaultNullTolerance);

/// Precomputed symmetric-division superoperator for a fixed positive
/// semi-definite operator rho:
///
///   Omega(X) = sum_{p_i + p_j > 0} 2/(p_i + p_j) |i><i|X|j><j|
///
/// Eigenvalues at or below tol * max eigenvalue are clamped to zero, and
/// pairs of such null eigenvalues are excluded from the sum.
class OmegaOperator {
 public:
  explicit OmegaOperator(const HermitianOperator& rho, double tol = kDefaultNullTolerance);

  Index dim() const noexcept { return basis_.rows(); }
  const ComplexMatrix& basis() const noexcept { return basis_; }
  const RealVector& eigenvalues() const noexcept { return eigenvalues_; }
  const RealMatrix& weights() const noexcept { return weights_; }
  const HermitianOperator& null_projector() const noexcept { return null_projector_; }
  Index null_rank() const noexcept { return null_rank_; }

  HermitianOperator apply(const HermitianOperator& x) const;

  /// V^dagger X V in the eigenbasis of rho.
  ComplexMatrix to_eigenbasis(const HermitianOperator& x) const;

  /// Tr{X Omega(Y)} for operators already rotated with to_eigenbasis.
  Complex inner(const ComplexMatrix& x_eig, const ComplexMatrix& y_eig) const;

 private:
  ComplexMatrix basis_;
  RealVector eigenvalues_;
  RealMatrix weights_;
  HermitianOperator null_projector_;
  Index null_rank_ = 0;
};

HermitianOperator omega_apply(const HermitianOperator& rho, const HermitianOperator& x,
                              double tol = kDefaultNullTolerance);

/// Same map computed on the row-major vectorization: the pseudo-inverse of
/// (rho (x) I + I (x) rho^T) / 2 applied to |X>>. Costs O(d^6); intended
/// for small dimensions and as an independent cross-check.
HermitianOperator omega_apply_vectorized(const HermitianOperator& rho, const HermitianOperator& x,
                                         double tol = kDefaultNullTolerance);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

HermitianOperator tensor_power(const HermitianOperator& rho, int m,
                               std::size_t max_dim = kDefaultDimensionCap);

/// Moore-Penrose pseudo-inverse of a real symmetric matrix. Eigenvalues with
/// |mu| <= rcond * max|mu| are treated as zero.
RealMatrix sym_pinv(const RealMatrix& m, double rcond = 1e-12);

/// True when ||(M M^+ - I) v|| <= rel_tol * ||v||.
bool in_range(const RealMatrix& m, const RealMatrix& m_pinv, const RealVector& v,
              double rel_tol = 1e-8);

}  // namespace qbound
