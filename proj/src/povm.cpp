#include "qbound/povm.hpp"

#include <algorithm>
#include <string>

#include "qbound/errors.hpp"

namespace qbound {

void Povm::check_positive(const std::vector<HermitianOperator>& elements, double tol) {
  if (elements.empty()) throw Error(ErrorKind::InvalidArgument, "Povm", "no elements");
  for (std::size_t x = 0; x < elements.size(); ++x) {
    if (elements[x].dim() != elements.front().dim()) {
      throw Error(ErrorKind::DimensionMismatch, "Povm", "elements differ in dimension");
    }
    const double lo = spectral_decompose(elements[x]).eigenvalues(0);
    if (lo < -tol) {
      throw Error(ErrorKind::InvalidArgument, "Povm",
                  "element " + std::to_string(x) + " has eigenvalue " + std::to_string(lo));
    }
  }
}

Povm::Povm(std::vector<HermitianOperator> elements, double tol) : elements_(std::move(elements)) {
  check_positive(elements_, tol);
  const double defect = completeness_residual();
  if (defect > tol) {
    throw Error(ErrorKind::InvalidArgument, "Povm", "||sum E_x - I||_max = " + std::to_string(defect));
  }
}

Povm Povm::partial(std::vector<HermitianOperator> elements, double tol) {
  check_positive(elements, tol);
  Povm p;
  p.elements_ = std::move(elements);
  return p;
}

Povm Povm::projective(const ComplexMatrix& basis) {
  std::vector<HermitianOperator> out;
  out.reserve(static_cast<std::size_t>(basis.cols()));
  for (Index c = 0; c < basis.cols(); ++c) {
    out.push_back(HermitianOperator::from_trusted(basis.col(c) * basis.col(c).adjoint()));
  }
  return Povm(std::move(out));
}

Povm Povm::qubit_axis(const Vec3& n) {
  if (std::abs(n.norm() - 1.0) > 1e-12) {
    throw Error(ErrorKind::NonUnitAxis, "Povm::qubit_axis", "|n| = " + std::to_string(n.norm()));
  }
  return Povm({bloch_operator(1.0, n), bloch_operator(1.0, -n)});
}

double Povm::completeness_residual() const {
  ComplexMatrix sum = -ComplexMatrix::Identity(dim(), dim());
  for (const auto& e : elements_) sum += e.matrix();
  return max_abs(sum);
}

ProbabilityModel probabilities(const Povm& povm, const HermitianOperator& rho, double p_floor) {
  if (povm.dim() != rho.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "probabilities", "POVM and state differ in dimension");
  }
  ProbabilityModel out;
  out.p_floor = p_floor;
  out.probabilities.resize(povm.size());
  for (Index x = 0; x < povm.size(); ++x) {
    const double p = std::max(0.0, trace_product(povm[x], rho));
    out.probabilities(x) = p;
    if (p > p_floor) out.support.push_back(x);
  }
  return out;
}

}  // namespace qbound
