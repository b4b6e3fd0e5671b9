#pragma once

#include <cstdint>
#include <random>

#include "qbound/operator_core.hpp"
#include "qbound/povm.hpp"
#include "qbound/state_models.hpp"

namespace qbound {

/// Portable draws on top of mt19937_64 (the standard distributions are
/// implementation-defined, these are not).
class Random {
 public:
  explicit Random(std::uint64_t seed) : gen_(seed) {}

  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  Complex complex_normal() { return {normal(), normal()}; }

  HermitianOperator hermitian(Index d);
  /// Haar-random unitary via QR of a Ginibre matrix.
  ComplexMatrix unitary(Index d);
  /// Full-rank density matrix with eigenvalues bounded below by min_eig.
  HermitianOperator density_matrix(Index d, double min_eig = 1e-3);
  /// Uniform point of the ball of radius max_len.
  Vec3 bloch_vector(double max_len = 1.0);
  Vec3 unit_vector();
  /// Projective qubit measurement along a random axis.
  Povm qubit_projective();

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace qbound
