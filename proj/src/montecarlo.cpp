#include "qbound/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "qbound/errors.hpp"

namespace qbound {

SampleRun sample(const Povm& povm, const HermitianOperator& rho, std::int64_t n_samples, std::uint64_t seed,
                 double theta_true) {
  if (n_samples < 1) throw Error(ErrorKind::InvalidArgument, "sample", "n_samples must be >= 1");
  const auto p = probabilities(povm, rho);
  std::vector<double> cdf(static_cast<std::size_t>(povm.size()));
  double acc = 0.0;
  for (Index x = 0; x < povm.size(); ++x) {
    acc += p.probabilities(x);
    cdf[static_cast<std::size_t>(x)] = acc;
  }
  // Normalize away roundoff so u < 1 always lands on an outcome.
  for (double& c : cdf) c /= acc;
  cdf.back() = 1.0;

  SampleRun run;
  run.seed = seed;
  run.n_samples = n_samples;
  run.theta_true = theta_true;
  run.counts.assign(cdf.size(), 0);
  std::mt19937_64 gen(seed);
  for (std::int64_t i = 0; i < n_samples; ++i) {
    const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    ++run.counts[static_cast<std::size_t>(it - cdf.begin())];
  }
  return run;
}

EstimatorStats evaluate_estimator(const SampleRun& run, const RealVector& values) {
  if (static_cast<Index>(run.counts.size()) != values.size()) {
    throw Error(ErrorKind::DimensionMismatch, "evaluate_estimator", "one estimator value per outcome expected");
  }
  const double n = static_cast<double>(run.n_samples);
  EstimatorStats st;
  for (std::size_t x = 0; x < run.counts.size(); ++x) st.mean += static_cast<double>(run.counts[x]) * values(static_cast<Index>(x));
  st.mean /= n;
  double m2 = 0.0;
  double m4 = 0.0;
  for (std::size_t x = 0; x < run.counts.size(); ++x) {
    const double d = values(static_cast<Index>(x)) - st.mean;
    m2 += static_cast<double>(run.counts[x]) * d * d;
    m4 += static_cast<double>(run.counts[x]) * d * d * d * d;
  }
  st.variance = run.n_samples > 1 ? m2 / (n - 1.0) : 0.0;
  // Var(s^2) = (mu4 - (n-3)/(n-1) sigma^4) / n. The finite-n term matters
  // for two-point estimators, where mu4 = sigma^4.
  const double s2 = m2 / n;
  const double shrink = run.n_samples > 1 ? (n - 3.0) / (n - 1.0) : 0.0;
  st.variance_std_error = std::sqrt(std::max(0.0, m4 / n - shrink * s2 * s2) / n);
  return st;
}

EstimatorStats evaluate_exact(const ProbabilityModel& p, const RealVector& values) {
  if (p.probabilities.size() != values.size()) {
    throw Error(ErrorKind::DimensionMismatch, "evaluate_exact", "one estimator value per outcome expected");
  }
  EstimatorStats st;
  st.mean = p.probabilities.dot(values);
  st.variance = p.probabilities.dot((values.array() - st.mean).square().matrix());
  return st;
}

double grid_mle(const SampleRun& run, const Povm& povm, const StateFamily& family, const std::vector<double>& grid) {
  if (grid.empty()) throw Error(ErrorKind::InvalidArgument, "grid_mle", "empty grid");
  std::vector<double> ll(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto p = probabilities(povm, family.evaluate(grid[i]));
    double sum = 0.0;
    for (std::size_t x = 0; x < run.counts.size(); ++x) {
      if (run.counts[x] == 0) continue;
      const double px = p.probabilities(static_cast<Index>(x));
      sum += px > 0.0 ? static_cast<double>(run.counts[x]) * std::log(px) : -INFINITY;
    }
    ll[i] = sum;
  }
  if (std::all_of(ll.begin(), ll.end(), [&](double v) { return v == ll.front(); })) {
    throw Error(ErrorKind::DegenerateLikelihood, "grid_mle", "likelihood is flat over the grid");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (ll[i] > ll[best] || (ll[i] == ll[best] && std::abs(grid[i]) < std::abs(grid[best]))) best = i;
  }
  return grid[best];
}

}  // namespace qbound
