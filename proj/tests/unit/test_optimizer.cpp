#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <numbers>

#include "qbound/errors.hpp"
#include "qbound/optimizer.hpp"

using namespace qbound;
using std::numbers::pi;

namespace {

OptimizerConfig small() {
  OptimizerConfig cfg;
  cfg.grid_points = 101;
  cfg.coarse_grid_points = 21;
  return cfg;
}

}  // namespace

TEST(UniformGrid, Endpoints) {
  const auto circle = uniform_grid(Domain::circle(), 4);
  ASSERT_EQ(circle.size(), 4u);
  EXPECT_GT(circle.front(), -pi);
  EXPECT_EQ(circle.back(), pi);
  EXPECT_NEAR(circle[1] - circle[0], 2 * pi / 4, 1e-14);
  const auto closed = uniform_grid(Domain::closed(-1.0, 1.0), 5);
  EXPECT_EQ(closed.front(), -1.0);
  EXPECT_EQ(closed.back(), 1.0);
  EXPECT_NEAR(closed[2], 0.0, 1e-15);
  const Domain open{0.0, 1.0, true, true};
  const auto inner = uniform_grid(open, 3);
  EXPECT_NEAR(inner.front(), 0.25, 1e-15);
  EXPECT_NEAR(inner.back(), 0.75, 1e-15);
}

TEST(OffsetDomain, ShiftsByTheta) {
  const auto d = offset_domain(Domain::closed(-1.0, 2.0), 0.5);
  EXPECT_EQ(d.lower, -1.5);
  EXPECT_EQ(d.upper, 1.5);
}

TEST(MaximizeOffsets, FindsInteriorMaximum) {
  const auto f = [](const RealVector& x) { return -std::pow(x(0) - 0.7312, 2); };
  const auto res = maximize_offsets(f, 1, Domain::closed(-2.0, 2.0), small());
  EXPECT_NEAR(res.argmax(0), 0.7312, 1e-7);
  EXPECT_GT(res.refine_iterations, 0);
  EXPECT_GT(res.evaluations, res.grid_points);
}

TEST(MaximizeOffsets, KeepsEdgeMaximumExactly) {
  const auto f = [](const RealVector& x) { return 1.0 - std::cos(x(0)); };
  const auto res = maximize_offsets(f, 1, Domain::circle(), OptimizerConfig{});
  EXPECT_EQ(res.argmax(0), pi);
  EXPECT_EQ(res.value, 2.0);
}

TEST(MaximizeOffsets, TwoDimensional) {
  const auto f = [](const RealVector& x) { return -std::pow(x(0) - 1.1, 2) - std::pow(x(1) + 0.4, 2); };
  const auto res = maximize_offsets(f, 2, Domain::closed(-2.0, 2.0), small());
  EXPECT_NEAR(res.argmax(0), 1.1, 1e-6);
  EXPECT_NEAR(res.argmax(1), -0.4, 1e-6);
}

TEST(MaximizeOffsets, TiesPreferSmallerOffsets) {
  auto cfg = small();
  cfg.refine_iterations = 0;
  cfg.grid_points = 8;  // -3pi/4 .. pi in steps of pi/4 on the circle
  const auto f = [](const RealVector& x) { return std::cos(4 * x(0)) > 0.999 ? 1.0 : 0.0; };
  EXPECT_NEAR(maximize_offsets(f, 1, Domain::circle(), cfg).argmax(0), -pi / 2, 1e-12);
  const auto sym = maximize_offsets([](const RealVector& x) { return std::abs(x(0)); }, 1, Domain::closed(-1, 1), cfg);
  EXPECT_EQ(sym.argmax(0), -1.0);
}

TEST(MaximizeOffsets, PuncturesAroundZero) {
  std::atomic<bool> saw_zero{false};
  auto cfg = small();
  cfg.offset_exclusion_radius = 0.05;
  const auto f = [&](const RealVector& x) {
    if (std::abs(x(0)) < 0.05) saw_zero = true;
    return -std::abs(x(0));
  };
  const auto res = maximize_offsets(f, 1, Domain::closed(-1.0, 1.0), cfg);
  EXPECT_FALSE(saw_zero);
  EXPECT_GE(std::abs(res.argmax(0)), 0.05);
}

TEST(MaximizeOffsets, SkipsCoincidentOffsets) {
  std::atomic<int> bad{0};
  const auto f = [&](const RealVector& x) {
    if (std::abs(x(0) - x(1)) < 1e-3) ++bad;
    return 0.0;
  };
  maximize_offsets(f, 2, Domain::closed(-1.0, 1.0), small());
  EXPECT_EQ(bad.load(), 0);
}

TEST(MaximizeOffsets, DivergenceOnGridIsReported) {
  const auto f = [](const RealVector& x) {
    return x(0) > 0.5 ? std::numeric_limits<double>::infinity() : 0.0;
  };
  EXPECT_TRUE(std::isinf(maximize_offsets(f, 1, Domain::closed(-1.0, 1.0), small()).value));
}

TEST(MaximizeOffsets, NanIsInadmissible) {
  const auto nan = [](const RealVector&) { return std::numeric_limits<double>::quiet_NaN(); };
  EXPECT_THROW(maximize_offsets(nan, 1, Domain::closed(-1.0, 1.0), small()), Error);
}

TEST(MaximizeOffsets, BudgetExceeded) {
  auto cfg = small();
  cfg.max_evaluations = 50;
  try {
    maximize_offsets([](const RealVector&) { return 0.0; }, 1, Domain::closed(-1.0, 1.0), cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OptimizerBudgetExceeded);
  }
  cfg.max_evaluations = 150;  // grid fits, refinement does not
  EXPECT_THROW(maximize_offsets([](const RealVector& x) { return -x(0) * x(0); }, 1, Domain::closed(-1.0, 1.0), cfg),
               Error);
}

TEST(MaximizeOffsets, ObjectiveExceptionsPropagate) {
  const auto f = [](const RealVector& x) -> double {
    if (x(0) > 0.9) throw Error(ErrorKind::NumericalFailure, "test", "boom");
    return 0.0;
  };
  EXPECT_THROW(maximize_offsets(f, 1, Domain::closed(-1.0, 1.0), small()), Error);
}

TEST(MaximizeOffsets, ResultIndependentOfThreads) {
  const auto f = [](const RealVector& x) { return std::sin(3 * x(0)) * std::cos(x(1)) + 0.1 * x(0); };
  auto one = small();
  one.threads = 1;
  auto many = small();
  many.threads = 4;
  const auto a = maximize_offsets(f, 2, Domain::circle(), one);
  const auto b = maximize_offsets(f, 2, Domain::circle(), many);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.argmax, b.argmax);
}

TEST(OptimizerConfig, Validation) {
  OptimizerConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.grid_points = 3;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.regularization_epsilon = 0.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.refine_candidates = 0;
  EXPECT_THROW(cfg.validate(), Error);
  EXPECT_THROW(maximize_offsets([](const RealVector&) { return 0.0; }, 0, Domain::circle(), OptimizerConfig{}), Error);
}

TEST(WorkerCount, EnvironmentAndConfig) {
  OptimizerConfig cfg;
  ::setenv("QBOUND_THREADS", "1", 1);
  EXPECT_EQ(worker_count(cfg), 1u);
  cfg.threads = 3;
  EXPECT_EQ(worker_count(cfg), 3u);
  ::unsetenv("QBOUND_THREADS");
  cfg.threads = 0;
  EXPECT_GE(worker_count(cfg), 1u);
}
