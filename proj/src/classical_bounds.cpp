#include "qbound/classical_bounds.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "qbound/errors.hpp"

namespace qbound {

namespace {

constexpr double kLeakTolerance = 1e-12;

// g(x, k) = Tr{E_x G_k}
RealMatrix outcome_vectors(const Povm& povm, const TestObservableSet& set) {
  if (set.size() > 0 && povm.dim() != set.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "classical_info_matrix", "POVM and observables differ in dimension");
  }
  RealMatrix g(povm.size(), set.size());
  for (Index x = 0; x < povm.size(); ++x) {
    for (Index k = 0; k < set.size(); ++k) g(x, k) = trace_product(povm[x], set[k].g);
  }
  return g;
}

InformationMatrix assemble(const RealMatrix& g, const ProbabilityModel& p, const TestObservableSet& set,
                           bool shifted) {
  RealMatrix gt = g;
  if (shifted) gt -= p.probabilities * set.f_vector().transpose();
  auto out = outcome_information(gt, p, shifted);
  out.offsets = set.offsets();
  return out;
}

}  // namespace

InformationMatrix outcome_information(const RealMatrix& g, const ProbabilityModel& p, bool f_subtracted) {
  const Index n = g.cols();
  InformationMatrix out;
  out.kind = InfoKind::Classical;
  out.f_subtracted = f_subtracted;
  out.matrix = RealMatrix::Zero(n, n);
  std::vector<bool> in_support(static_cast<std::size_t>(g.rows()), false);
  for (Index x : p.support) {
    in_support[static_cast<std::size_t>(x)] = true;
    const RealVector gx = g.row(x).transpose();
    out.matrix.noalias() += gx * gx.transpose() / p.probabilities(x);
  }
  std::vector<Index> leaks;
  for (Index x = 0; x < g.rows(); ++x) {
    if (!in_support[static_cast<std::size_t>(x)] && n > 0 && g.row(x).cwiseAbs().maxCoeff() > kLeakTolerance) {
      leaks.push_back(x);
    }
  }
  out.leak.resize(static_cast<Index>(leaks.size()), n);
  for (std::size_t i = 0; i < leaks.size(); ++i) out.leak.row(static_cast<Index>(i)) = g.row(leaks[i]);
  out.matrix = (0.5 * (out.matrix + out.matrix.transpose())).eval();
  return out;
}

InformationMatrix classical_info_matrix(const Povm& povm, const TestObservableSet& set, const HermitianOperator& rho,
                                        double p_floor) {
  return assemble(outcome_vectors(povm, set), probabilities(povm, rho, p_floor), set, false);
}

InformationMatrix classical_shifted_matrix(const Povm& povm, const TestObservableSet& set,
                                           const HermitianOperator& rho, double p_floor) {
  return assemble(outcome_vectors(povm, set), probabilities(povm, rho, p_floor), set, true);
}

BoundResult classical_bound(const InformationMatrix& c, const RealVector& lambda, const RealVector& f) {
  auto out = rayleigh_bound(c, lambda, f);
  out.kind = InfoKind::Classical;
  return out;
}

double chi2_divergence(const ProbabilityModel& q, const ProbabilityModel& p) {
  if (q.probabilities.size() != p.probabilities.size()) {
    throw Error(ErrorKind::DimensionMismatch, "chi2_divergence", "outcome counts differ");
  }
  double sum = 0.0;
  for (Index x = 0; x < p.probabilities.size(); ++x) {
    const double px = p.probabilities(x);
    const double qx = q.probabilities(x);
    if (px > p.p_floor) {
      sum += (qx - px) * (qx - px) / px;
    } else if (qx > p.p_floor) {
      return std::numeric_limits<double>::infinity();
    }
  }
  return sum;
}

RealVector optimal_estimator(const Povm& povm, const TestObservableSet& set, const InformationMatrix& c,
                             const RealVector& lambda, const RealVector& f, const HermitianOperator& rho) {
  const auto bound = classical_bound(c, lambda, f);
  if (!bound.diagnostics.in_range) {
    throw Error(ErrorKind::RangeViolation, "optimal_estimator",
                "lambda outside the range of C - f f^T (residual " +
                    std::to_string(bound.diagnostics.range_residual) + ")");
  }
  const RealVector& a = bound.optimal_a;
  const auto p = probabilities(povm, rho);
  const RealMatrix g = outcome_vectors(povm, set);
  const double shift = (c.f_subtracted ? set.f_vector() : f).dot(a);
  RealVector dev = RealVector::Zero(povm.size());
  for (Index x : p.support) {
    dev(x) = (g.row(x).dot(a) - shift * p.probabilities(x)) / p.probabilities(x);
  }
  return dev;
}

double estimator_variance(const ProbabilityModel& p, const RealVector& deviations) {
  double mean = 0.0;
  for (Index x = 0; x < deviations.size(); ++x) mean += p.probabilities(x) * deviations(x);
  double var = 0.0;
  for (Index x = 0; x < deviations.size(); ++x) {
    var += p.probabilities(x) * (deviations(x) - mean) * (deviations(x) - mean);
  }
  return var;
}

RealVector estimator_constraints(const Povm& povm, const TestObservableSet& set, const RealVector& deviations) {
  return outcome_vectors(povm, set).transpose() * deviations;
}

}  // namespace qbound
