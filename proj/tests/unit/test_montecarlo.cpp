#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "qbound/errors.hpp"
#include "qbound/measurement.hpp"
#include "qbound/montecarlo.hpp"
#include "qbound/quantum_bounds.hpp"

using namespace qbound;
using std::numbers::pi;

namespace {

HermitianOperator diag(double a, double b) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return HermitianOperator(m);
}

const Povm kZ = Povm::qubit_axis(Vec3::UnitZ());

}  // namespace

TEST(Sample, CertainOutcome) {
  const auto run = sample(kZ, diag(1.0, 0.0), 1000, 3);
  EXPECT_EQ(run.counts[0], 1000);
  EXPECT_EQ(run.counts[1], 0);
  EXPECT_EQ(run.n_samples, 1000);
  EXPECT_EQ(run.seed, 3u);
}

TEST(Sample, FairCoin) {
  const auto run = sample(kZ, diag(0.5, 0.5), 100000, 11);
  EXPECT_NEAR(static_cast<double>(run.counts[0]) / 1e5, 0.5, 0.01);
}

TEST(Sample, DeterministicPerSeed) {
  const auto rho = diag(0.3, 0.7);
  EXPECT_EQ(sample(kZ, rho, 5000, 9).counts, sample(kZ, rho, 5000, 9).counts);
  EXPECT_NE(sample(kZ, rho, 5000, 9).counts, sample(kZ, rho, 5000, 10).counts);
}

TEST(Sample, MatchesReferenceGenerator) {
  // Inverse-CDF over uniforms from the top 53 bits of the standard engine.
  const auto run = sample(kZ, diag(0.3, 0.7), 2000, 5489);
  std::mt19937_64 gen(5489);
  EXPECT_EQ(gen(), 14514284786278117030ULL);
  gen.seed(5489);
  std::int64_t first = 0;
  for (int i = 0; i < 2000; ++i) first += static_cast<double>(gen() >> 11) * 0x1.0p-53 < 0.3 ? 1 : 0;
  EXPECT_EQ(run.counts[0], first);
}

TEST(Sample, RejectsEmptyRun) {
  EXPECT_THROW(sample(kZ, diag(0.5, 0.5), 0, 1), Error);
  EXPECT_THROW(sample(kZ, diag(0.5, 0.5), -4, 1), Error);
}

TEST(Estimator, ConstantHasNoVariance) {
  const auto run = sample(kZ, diag(0.4, 0.6), 1000, 2);
  const auto st = evaluate_estimator(run, RealVector::Constant(2, 0.25));
  EXPECT_DOUBLE_EQ(st.mean, 0.25);
  EXPECT_EQ(st.variance, 0.0);
  EXPECT_EQ(st.variance_std_error, 0.0);
}

TEST(Estimator, SampleMomentsByHand) {
  SampleRun run;
  run.n_samples = 4;
  run.counts = {3, 1};
  const auto st = evaluate_estimator(run, (RealVector(2) << 0.0, 4.0).finished());
  EXPECT_DOUBLE_EQ(st.mean, 1.0);
  EXPECT_DOUBLE_EQ(st.variance, (3 * 1.0 + 9.0) / 3.0);
  // Central moments about 1: m2 = 12 / 4, m4 = 84 / 4.
  EXPECT_DOUBLE_EQ(st.variance_std_error, std::sqrt((21.0 - (1.0 / 3.0) * 9.0) / 4));
  EXPECT_THROW(evaluate_estimator(run, RealVector::Zero(3)), Error);
}

TEST(Estimator, ExactPluginEqualsBound) {
  const auto model = QubitPhaseModel::equatorial(0.42);
  for (auto [offsets, s] : {std::pair{std::vector<double>{}, 1}, {std::vector<double>{pi}, 0}, {std::vector<double>{2.0}, 1}}) {
    const auto om = optimal_measurement(model, 0.0, offsets, s);
    const auto st = evaluate_exact(probabilities(om.povm, om.state), om.estimator);
    EXPECT_NEAR(st.mean, 0.0, 1e-12);
    EXPECT_NEAR(st.variance, om.bound, 1e-10 * om.bound);
    EXPECT_EQ(st.variance_std_error, 0.0);
  }
}

TEST(Estimator, TwoPointStandardErrorIsSecondOrder) {
  // +-1 with probability 1/2: Var(s^2) = 2 / (n (n-1)) exactly.
  SampleRun run;
  run.n_samples = 1000;
  run.counts = {500, 500};
  const auto st = evaluate_estimator(run, (RealVector(2) << -1.0, 1.0).finished());
  EXPECT_NEAR(st.variance_std_error, std::sqrt(2.0 / (1000.0 * 999.0)), 1e-15);
}

TEST(Estimator, EmpiricalVarianceConvergesToBound) {
  const auto model = QubitPhaseModel::equatorial(0.42);
  const auto om = optimal_measurement(model, 0.0, {}, 1);
  for (std::int64_t n : {10'000, 100'000, 1'000'000}) {
    const auto run = sample(om.povm, om.state, n, 20);
    const auto st = evaluate_estimator(run, om.estimator);
    EXPECT_LE(std::abs(st.variance - om.bound), 5 * st.variance_std_error) << "n=" << n;
  }
}

TEST(GridMle, RecoversPhase) {
  const auto model = QubitPhaseModel::equatorial(0.8);
  const Povm x = Povm::qubit_axis(Vec3::UnitX());
  const double truth = -0.5;
  const auto run = sample(x, model.evaluate(truth), 200000, 4, truth);
  std::vector<double> grid;
  for (int i = 0; i <= 200; ++i) grid.push_back(-1.5 + 1.5 * i / 200.0);  // x measurement is ambiguous beyond this
  EXPECT_NEAR(grid_mle(run, x, model, grid), truth, 0.02);
}

TEST(GridMle, FlatLikelihoodThrows) {
  const auto model = QubitPhaseModel::equatorial(0.8);
  const Povm z = Povm::qubit_axis(Vec3::UnitZ());  // blind to rotations about z
  const auto run = sample(z, model.evaluate(0.0), 100, 1);
  try {
    grid_mle(run, z, model, {-1.0, 0.0, 1.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateLikelihood);
  }
  EXPECT_THROW(grid_mle(run, z, model, {}), Error);
}

TEST(GridMle, TiesGoToSmallestOffset) {
  const auto model = QubitPhaseModel::equatorial(0.8);
  const Povm x = Povm::qubit_axis(Vec3::UnitX());
  SampleRun run;
  run.n_samples = 10;
  run.counts = {5, 5};
  // p is symmetric in theta -> pi - theta; the grid has mirrored pairs.
  EXPECT_NEAR(grid_mle(run, x, model, {pi - 0.2, 0.2, 1.0}), 0.2, 1e-15);
}
