#pragma once

#include "qbound/bound_result.hpp"
#include "qbound/povm.hpp"
#include "qbound/test_observables.hpp"

namespace qbound {

/// C_kl = sum_{x in X+} g_k(x) g_l(x) / p(x|theta), g_k(x) = Tr{E_x G_k}.
InformationMatrix classical_info_matrix(const Povm& povm, const TestObservableSet& set, const HermitianOperator& rho,
                                        double p_floor = kDefaultProbabilityFloor);

/// C - f f^T built from g_k(x) - f_k p(x), which avoids cancelling 1 + chi^2
/// against 1 when offsets are small.
InformationMatrix classical_shifted_matrix(const Povm& povm, const TestObservableSet& set,
                                           const HermitianOperator& rho,
                                           double p_floor = kDefaultProbabilityFloor);

/// sum_{x in X+} g(x) g(x)^T / p(x) from outcome rows g(x, k). Rows of
/// outcomes outside X+ that carry weight become leak directions.
InformationMatrix outcome_information(const RealMatrix& g, const ProbabilityModel& p, bool f_subtracted);

/// lambda^T (C - f f^T)^+ lambda. Infinite when lambda is outside the range.
BoundResult classical_bound(const InformationMatrix& c, const RealVector& lambda, const RealVector& f);

/// sum_{x in X+(p)} (q - p)^2 / p; +inf when q has mass outside X+(p).
double chi2_divergence(const ProbabilityModel& q, const ProbabilityModel& p);

/// Deviations theta_est(x) - <theta_est> of the locally best unbiased
/// estimator for this measurement. Outcomes outside X+ get 0.
/// Throws RangeViolation when the bound is infinite.
RealVector optimal_estimator(const Povm& povm, const TestObservableSet& set, const InformationMatrix& c,
                             const RealVector& lambda, const RealVector& f, const HermitianOperator& rho);

/// sum_x p(x) v(x)^2 and sum_x g_k(x) v(x), for checking estimators exactly.
double estimator_variance(const ProbabilityModel& p, const RealVector& deviations);
RealVector estimator_constraints(const Povm& povm, const TestObservableSet& set, const RealVector& deviations);

}  // namespace qbound
