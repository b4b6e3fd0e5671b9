#pragma once

#include <cstdint>
#include <limits>
#include <string_view>
#include <vector>

#include "qbound/povm.hpp"
#include "qbound/state_models.hpp"

namespace qbound {

/// Generator behind sample(); recorded in run outputs.
inline constexpr std::string_view kRngAlgorithm = "mt19937_64";

struct SampleRun {
  std::uint64_t seed = 0;
  std::int64_t n_samples = 0;
  std::vector<std::int64_t> counts;  // per POVM element
  double theta_true = std::numeric_limits<double>::quiet_NaN();
};

/// n_samples independent outcomes of the POVM on rho. Uniforms come from the
/// top 53 bits of mt19937_64 and are mapped through the cumulative
/// distribution, so runs are identical across platforms.
SampleRun sample(const Povm& povm, const HermitianOperator& rho, std::int64_t n_samples, std::uint64_t seed,
                 double theta_true = std::numeric_limits<double>::quiet_NaN());

struct EstimatorStats {
  double mean = 0.0;
  double variance = 0.0;           // unbiased sample variance
  double variance_std_error = 0.0; // sqrt((m4 - (n-3)/(n-1) s^4) / n), plug-in moments
};

/// Sample statistics of theta_est over the outcomes of a run.
EstimatorStats evaluate_estimator(const SampleRun& run, const RealVector& estimator_values);

/// sum_x p(x) (v(x) - <v>)^2 with exact probabilities; variance_std_error is 0.
EstimatorStats evaluate_exact(const ProbabilityModel& p, const RealVector& estimator_values);

/// Grid point maximizing sum_x counts(x) ln p(x|theta'). Ties go to the
/// smallest |theta'|. Throws DegenerateLikelihood when every point ties.
double grid_mle(const SampleRun& run, const Povm& povm, const StateFamily& family, const std::vector<double>& grid);

}  // namespace qbound
