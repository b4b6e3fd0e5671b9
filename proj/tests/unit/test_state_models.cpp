#include <gtest/gtest.h>

#include <numbers>

#include "oracles.hpp"
#include "qbound/errors.hpp"
#include "qbound/random.hpp"
#include "qbound/state_models.hpp"

using namespace qbound;
using std::numbers::pi;

namespace {

double diff(const ComplexMatrix& a, const ComplexMatrix& b) { return max_abs(ComplexMatrix(a - b)); }

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST(Domain, CircleIsHalfOpen) {
  const Domain c = Domain::circle();
  EXPECT_TRUE(c.contains(pi));
  EXPECT_FALSE(c.contains(-pi));
  EXPECT_TRUE(c.contains(0.0));
  const Domain d = Domain::closed(-1.0, 1.0);
  EXPECT_TRUE(d.contains(-1.0));
  EXPECT_FALSE(d.contains(1.0 + 1e-15));
}

TEST(BlochEvolve, QuarterTurnsAndAxisInvariance) {
  const double r = 0.42;
  const auto a = bloch_evolve(BlochVector(0, r, 0), Vec3::UnitZ(), 0.0).vec();
  EXPECT_LT((a - Vec3(0, r, 0)).norm(), 1e-15);
  const auto b = bloch_evolve(BlochVector(0, r, 0), Vec3::UnitZ(), pi / 2).vec();
  EXPECT_LT((b - Vec3(-r, 0, 0)).norm(), 1e-15);
  for (double t : {0.3, 1.7, -2.9}) {
    const auto c = bloch_evolve(BlochVector(0, 0, r), Vec3::UnitZ(), t).vec();
    EXPECT_LT((c - Vec3(0, 0, r)).norm(), 1e-15);
  }
}

TEST(BlochEvolve, MatchesAngleAxisRotation) {
  Random rng(21);
  for (int i = 0; i < 200; ++i) {
    const Vec3 r0 = rng.bloch_vector();
    const Vec3 n = rng.unit_vector();
    const double t = rng.uniform(-pi, pi);
    const auto out = bloch_evolve(BlochVector(r0), n, t).vec();
    EXPECT_LT((out - oracle::rotate(r0, n, t)).norm(), 1e-14);
    EXPECT_NEAR(out.norm(), r0.norm(), 1e-12);
  }
}

TEST(BlochEvolve, RejectsNonUnitAxis) {
  EXPECT_EQ(kind_of([] { bloch_evolve(BlochVector(0, 0.5, 0), Vec3(0, 0, 1.1), 0.2); }), ErrorKind::NonUnitAxis);
  EXPECT_EQ(kind_of([] { QubitPhaseModel(BlochVector(0, 0.5, 0), Vec3(1, 1, 0)); }), ErrorKind::NonUnitAxis);
  EXPECT_EQ(kind_of([] { BlochVector(0.8, 0.8, 0); }), ErrorKind::OutOfRange);
}

TEST(Entropy, EndpointsAndInverse) {
  EXPECT_NEAR(entropy_to_bloch_length(0.0), 1.0, 1e-12);
  EXPECT_NEAR(entropy_to_bloch_length(std::log(2.0)), 0.0, 1e-12);
  const double r = entropy_to_bloch_length(0.6);
  EXPECT_NEAR(r, oracle::bloch_length_for_entropy(0.6), 1e-12);
  EXPECT_NEAR(oracle::binary_entropy(r), 0.6, 1e-13);
  EXPECT_NEAR(r, 0.42, 0.005);
  double prev = 1.0;
  for (int i = 1; i <= 20; ++i) {
    const double next = entropy_to_bloch_length(std::log(2.0) * i / 20.0);
    EXPECT_LT(next, prev);
    prev = next;
  }
  EXPECT_EQ(kind_of([] { entropy_to_bloch_length(0.8); }), ErrorKind::OutOfRange);
  EXPECT_EQ(kind_of([] { entropy_to_bloch_length(-0.1); }), ErrorKind::OutOfRange);
}

TEST(QubitPhaseModel, EvaluateMatchesConstruction) {
  const auto model = QubitPhaseModel::equatorial(0.42);
  EXPECT_LT(diff(model.evaluate(0.0).matrix(), oracle::bloch_matrix(1.0, Vec3(0, 0.42, 0))), 1e-15);
  for (double t : {-3.0, -1.0, 0.5, pi}) {
    const auto rho = model.evaluate(t);
    EXPECT_NEAR(rho.trace(), 1.0, 1e-12);
    EXPECT_LT(diff(rho.matrix(), oracle::bloch_matrix(1.0, oracle::equatorial(0.42, t))), 1e-15);
    const auto ev = spectral_decompose(rho).eigenvalues;
    EXPECT_NEAR(ev(0), 0.29, 1e-12);
    EXPECT_NEAR(ev(1), 0.71, 1e-12);
  }
  EXPECT_EQ(kind_of([&] { model.evaluate(-pi); }), ErrorKind::OutOfDomain);
  EXPECT_EQ(kind_of([&] { model.evaluate(4.0); }), ErrorKind::OutOfDomain);
}

TEST(QubitPhaseModel, AnalyticDerivatives) {
  const double r = 0.42;
  const auto model = QubitPhaseModel::equatorial(r);
  EXPECT_LT(diff(model.derivative(0.0, 1).matrix(), oracle::bloch_matrix(0.0, Vec3(-r, 0, 0))), 1e-15);
  EXPECT_LT(diff(model.derivative(0.0, 2).matrix(), oracle::bloch_matrix(0.0, Vec3(0, -r, 0))), 1e-15);
  // d^k/dt^k of the rotation at angle t equals the rotation at t + k pi/2 minus the parallel part.
  Random rng(22);
  for (int i = 0; i < 20; ++i) {
    const QubitPhaseModel general(BlochVector(rng.bloch_vector()), rng.unit_vector());
    const Vec3 par = general.axis().dot(general.initial().vec()) * general.axis();
    const double t = rng.uniform(-2.0, 2.0);
    for (int k = 1; k <= 5; ++k) {
      const Vec3 expect = oracle::rotate(general.initial().vec() - par, general.axis(), t + k * pi / 2);
      EXPECT_LT((general.bloch_derivative(t, k) - expect).norm(), 1e-14);
    }
  }
}

TEST(QubitPhaseModel, StencilAgreesWithAnalytic) {
  const auto model = QubitPhaseModel::equatorial(0.42);
  for (double t : {0.0, 0.7, -2.0}) {
    EXPECT_LT(diff(model.stencil_derivative(t, 1, 1e-4).matrix(), model.derivative(t, 1).matrix()), 1e-7);
    EXPECT_LT(diff(model.stencil_derivative(t, 2).matrix(), model.derivative(t, 2).matrix()), 1e-6);
    EXPECT_LT(diff(model.stencil_derivative(t, 3).matrix(), model.derivative(t, 3).matrix()), 1e-4);
    EXPECT_LT(diff(model.derivative(t, 2, 1e-2, true).matrix(), model.derivative(t, 2).matrix()), 1e-6);
  }
}

TEST(StateFamily, DerivativesAreTraceless) {
  Random rng(23);
  const auto ladder = DepolarizedPureModel::phase_ladder(4, 0.05);
  const QubitPhaseModel model(BlochVector(rng.bloch_vector()), rng.unit_vector());
  for (int k = 1; k <= 4; ++k) {
    EXPECT_LT(std::abs(ladder.derivative(0.4, k).trace()), 1e-8);
    EXPECT_LT(std::abs(ladder.stencil_derivative(0.4, k).trace()), 1e-8);
    EXPECT_LT(std::abs(model.stencil_derivative(0.4, k).trace()), 1e-8);
  }
}

TEST(StateFamily, StencilLeavingDomainFails) {
  const auto model = QubitPhaseModel::equatorial(0.42, Domain::closed(0.0, 1.0));
  EXPECT_EQ(kind_of([&] { model.stencil_derivative(0.0, 1); }), ErrorKind::OutOfDomain);
  EXPECT_NO_THROW(model.derivative(0.0, 1));
  EXPECT_EQ(kind_of([&] { model.derivative(0.5, 0); }), ErrorKind::InvalidArgument);
}

TEST(CentralStencil, KnownWeights) {
  const auto w1 = central_stencil(1, 1);
  EXPECT_NEAR(w1[0], -0.5, 1e-15);
  EXPECT_NEAR(w1[1], 0.0, 1e-15);
  EXPECT_NEAR(w1[2], 0.5, 1e-15);
  const auto w2 = central_stencil(2, 1);
  EXPECT_NEAR(w2[0], 1.0, 1e-15);
  EXPECT_NEAR(w2[1], -2.0, 1e-15);
  const auto w3 = central_stencil(3, 2);
  const double expect[] = {-0.5, 1.0, 0.0, -1.0, 0.5};
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(w3[i], expect[i], 1e-14);
}

TEST(DepolarizedPureModel, MatchesDefinition) {
  const auto full = DepolarizedPureModel::phase_ladder(3, 1.0);
  EXPECT_LT(diff(full.evaluate(0.8).matrix(), ComplexMatrix::Identity(3, 3) / 3.0), 1e-15);
  const double eps = 0.2;
  const auto m = DepolarizedPureModel::phase_ladder(3, eps);
  const double t = 0.8;
  Eigen::VectorXcd psi(3);
  for (int j = 0; j < 3; ++j) psi(j) = std::polar(1.0 / std::sqrt(3.0), -j * t);
  const ComplexMatrix expect = (1 - eps) * psi * psi.adjoint() + eps / 3.0 * ComplexMatrix::Identity(3, 3);
  EXPECT_LT(diff(m.evaluate(t).matrix(), expect), 1e-14);
  EXPECT_LT(diff(m.derivative(t, 1).matrix(), m.stencil_derivative(t, 1).matrix()), 1e-7);
  EXPECT_LT(diff(m.derivative(t, 2).matrix(), m.stencil_derivative(t, 2).matrix()), 1e-6);
}

TEST(DepolarizedPureModel, EquatorialQubitMatchesQubitModel) {
  const double eps = 0.1;
  const auto dep = DepolarizedPureModel::equatorial_qubit(eps);
  const auto qubit = QubitPhaseModel::equatorial(1.0 - eps);
  for (double t : {0.0, 1.1, pi}) {
    EXPECT_LT(diff(dep.evaluate(t).matrix(), qubit.evaluate(t).matrix()), 1e-14);
    EXPECT_LT(diff(dep.derivative(t, 3).matrix(), qubit.derivative(t, 3).matrix()), 1e-14);
  }
}

TEST(DepolarizedPureModel, CallablePureFamilyUsesStencils) {
  const DepolarizedPureModel dep(
      [](double t) {
        Eigen::VectorXcd v(2);
        v << std::cos(t / 2), std::sin(t / 2);
        return v;
      },
      2, 0.0);
  EXPECT_EQ(dep.analytic_order(), 0);
  const Vec3 expect(std::cos(0.3), 0.0, -std::sin(0.3));  // d/dt of (sin t, 0, cos t)
  EXPECT_LT(diff(dep.derivative(0.3, 1).matrix(), oracle::bloch_matrix(0.0, expect)), 1e-7);
}

TEST(MultiCopyFamily, MatchesTensorPowerAndDifferences) {
  const auto base = QubitPhaseModel::equatorial(0.6);
  const MultiCopyFamily three(std::shared_ptr<const StateFamily>(&base, [](const StateFamily*) {}), 3);
  EXPECT_EQ(three.dim(), 8);
  const double t = 0.4;
  EXPECT_LT(diff(three.evaluate(t).matrix(), oracle::tensor(base.evaluate(t).matrix(), 3)), 1e-15);
  for (int k = 1; k <= 3; ++k) {
    const double h = 1e-3;
    const auto w = central_stencil(k, (k + 1) / 2);
    ComplexMatrix fd = ComplexMatrix::Zero(8, 8);
    const int p = (k + 1) / 2;
    for (int j = -p; j <= p; ++j) fd += w[j + p] * oracle::tensor(base.evaluate(t + j * h).matrix(), 3);
    fd /= std::pow(h, k);
    EXPECT_LT(diff(three.derivative(t, k).matrix(), fd), 1e-4) << "k = " << k;
  }
  EXPECT_EQ(kind_of([&] { MultiCopyFamily(std::shared_ptr<const StateFamily>(&base, [](const StateFamily*) {}), 13); }),
            ErrorKind::DimensionCap);
}

TEST(TabulatedFamily, InterpolatesAndCapsOrder) {
  const auto model = QubitPhaseModel::equatorial(0.5);
  std::vector<double> grid;
  std::vector<HermitianOperator> states;
  for (int i = 0; i <= 100; ++i) {
    grid.push_back(-1.0 + 0.02 * i);
    states.push_back(model.evaluate(grid.back()));
  }
  const TabulatedFamily tab(grid, states);
  EXPECT_LT(diff(tab.evaluate(0.2).matrix(), model.evaluate(0.2).matrix()), 1e-14);
  EXPECT_LT(diff(tab.evaluate(0.21).matrix(), model.evaluate(0.21).matrix()), 1e-4);
  EXPECT_LT(diff(tab.derivative(0.2, 1).matrix(), model.derivative(0.2, 1).matrix()), 1e-4);
  EXPECT_EQ(kind_of([&] { tab.derivative(0.2, 3); }), ErrorKind::OrderUnavailable);
  EXPECT_EQ(kind_of([&] { tab.evaluate(1.5); }), ErrorKind::OutOfDomain);
}

TEST(CallableFamily, UsesSuppliedDerivative) {
  const auto model = QubitPhaseModel::equatorial(0.5);
  const CallableFamily fam(
      2, [&](double t) { return ComplexMatrix(model.evaluate(t).matrix()); }, Domain::circle(),
      [&](double t, int k) { return ComplexMatrix(model.derivative(t, k).matrix()); }, 2);
  EXPECT_EQ(fam.analytic_order(), 2);
  EXPECT_LT(diff(fam.derivative(0.3, 2).matrix(), model.derivative(0.3, 2).matrix()), 1e-15);
  EXPECT_LT(diff(fam.derivative(0.3, 3).matrix(), model.derivative(0.3, 3).matrix()), 1e-4);
}
