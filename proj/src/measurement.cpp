#include "qbound/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qbound/classical_bounds.hpp"
#include "qbound/errors.hpp"
#include "qbound/quantum_bounds.hpp"

namespace qbound {

RealVector optimal_coefficients(const InformationMatrix& q, const RealVector& lambda, const RealVector& f) {
  const auto b = rayleigh_bound(q, lambda, f);
  if (!b.diagnostics.in_range) {
    throw Error(ErrorKind::RangeViolation, "optimal_coefficients",
                "lambda outside the range of Q - f f^T (residual " + std::to_string(b.diagnostics.range_residual) +
                    ")");
  }
  return b.optimal_a;
}

HermitianOperator optimal_observable(const TestObservableSet& set, const HermitianOperator& rho, const RealVector& a) {
  if (a.size() != set.size()) {
    throw Error(ErrorKind::DimensionMismatch, "optimal_povm",
                std::to_string(a.size()) + " coefficients for " + std::to_string(set.size()) + " observables");
  }
  HermitianOperator ga = HermitianOperator::zero(rho.dim());
  for (Index k = 0; k < set.size(); ++k) ga += a(k) * set[k].g;
  ga -= set.f_vector().dot(a) * rho;
  return omega_apply(rho, ga);
}

Povm optimal_povm(const TestObservableSet& set, const HermitianOperator& rho, const RealVector& a) {
  return Povm::projective(spectral_decompose(optimal_observable(set, rho, a)).eigenvectors);
}

SaturationReport saturation_check(const Povm& povm, const TestObservableSet& set, const HermitianOperator& rho,
                                  const RealVector& a, const RealVector& lambda, const RealVector& f) {
  SaturationReport rep;
  const HermitianOperator l = optimal_observable(set, rho, a);
  const ComplexMatrix lrl = l.matrix() * rho.matrix() * l.matrix();
  const auto p = probabilities(povm, rho);
  double scale = 0.0;
  for (Index x : p.support) {
    const ComplexMatrix& e = povm[x].matrix();
    const Complex t = (rho.matrix() * e * l.matrix()).trace();
    const double second = (e * lrl).trace().real();
    rep.condition_i_residual = std::max(rep.condition_i_residual, std::abs(t.imag()));
    rep.condition_ii_residual =
        std::max(rep.condition_ii_residual, std::abs(p.probabilities(x) * second - std::norm(t)));
    scale = std::max(scale, p.probabilities(x) * std::abs(second));
  }
  ComplexMatrix sum = -ComplexMatrix::Identity(rho.dim(), rho.dim());
  for (Index x : p.support) sum += povm[x].matrix();
  rep.condition_iii_residual = max_abs(sum);

  // The shifted matrices avoid cancellation; they apply when f is the set's own.
  const bool own_f = f.size() == set.size() && f == set.f_vector();
  const auto q = own_f ? quantum_shifted_matrix(set, rho) : quantum_info_matrix(set, rho);
  const auto c = own_f ? classical_shifted_matrix(povm, set, rho) : classical_info_matrix(povm, set, rho);
  rep.quantum_bound = bound_from_matrix(q, lambda, f).value;
  rep.classical_bound = classical_bound(c, lambda, f).value;
  rep.classical_equals_quantum_gap = rep.classical_bound - rep.quantum_bound;
  RealMatrix qs = q.matrix;
  if (!q.f_subtracted) qs -= f * f.transpose();
  const double denom = a.dot(qs * a);
  rep.alpha = denom != 0.0 ? a.dot(lambda) / denom : 0.0;

  const RealVector ev = spectral_decompose(l).eigenvalues;
  const double tol = 1e-9 * std::max(1.0, ev.cwiseAbs().maxCoeff());
  Index run = 1;
  for (Index i = 1; i < ev.size(); ++i) {
    run = ev(i) - ev(i - 1) <= tol ? run + 1 : 1;
    rep.degeneracy = std::max(rep.degeneracy, run);
  }
  return rep;
}

OptimalMeasurement optimal_measurement(const StateFamily& family, double theta, const std::vector<double>& offsets,
                                       int s, int copies, const OptimizerConfig& cfg) {
  const auto fam = copies_of(family, copies);
  const auto raw = abel_set(*fam, theta, offsets, s, cfg.derivative_step);
  const auto checked = validate_support(raw, fam->evaluate(theta), cfg.support_tolerance, cfg.regularize,
                                        cfg.regularization_epsilon);
  const auto q = quantum_shifted_matrix(checked.set, checked.state, cfg.null_tolerance);
  const RealVector lambda = checked.set.lambda();
  const RealVector a = optimal_coefficients(q, lambda, RealVector::Zero(lambda.size()));
  Povm povm = optimal_povm(checked.set, checked.state, a);
  const auto c = classical_shifted_matrix(povm, checked.set, checked.state);
  RealVector est = optimal_estimator(povm, checked.set, c, lambda, checked.set.f_vector(), checked.state);
  return {checked.set, checked.state, lambda, a, std::move(povm), std::move(est), lambda.dot(a)};
}

OptimalMeasurement measurement_for_bound(const StateFamily& family, double theta, const BoundResult& bound, int s,
                                       int copies, const OptimizerConfig& cfg) {
  if (bound.diagnostics.attained_at_limit) return optimal_measurement(family, theta, std::vector<double>{}, 1, copies, cfg);
  std::vector<double> offsets(bound.optimal_offsets.data(), bound.optimal_offsets.data() + bound.optimal_offsets.size());
  return optimal_measurement(family, theta, offsets, s, copies, cfg);
}

double estimator_theta_drift(const Povm& povm, const StateFamily& family, double theta,
                             const std::vector<double>& offsets, int s, double h) {
  auto deviations = [&](double t) {
    std::vector<double> shifted;
    for (double o : offsets) shifted.push_back(o + theta - t);
    const auto set = abel_set(family, t, shifted, s);
    const auto rho = family.evaluate(t);
    const auto c = classical_shifted_matrix(povm, set, rho);
    return optimal_estimator(povm, set, c, set.lambda(), set.f_vector(), rho);
  };
  const RealVector up = deviations(theta + h);
  const RealVector down = deviations(theta - h);
  return (((up - down) / (2.0 * h)).array() + 1.0).abs().maxCoeff();
}

}  // namespace qbound
