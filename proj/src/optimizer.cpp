#include "qbound/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <numeric>
#include <string>
#include <thread>

#include "qbound/errors.hpp"

namespace qbound {

void OptimizerConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::InvalidArgument, "OptimizerConfig", what); };
  if (grid_points < 8) fail("grid_points must be >= 8");
  if (coarse_grid_points < 2) fail("coarse_grid_points must be >= 2");
  if (refine_iterations < 0) fail("refine_iterations must be >= 0");
  if (refine_candidates < 1) fail("refine_candidates must be >= 1");
  if (!(offset_exclusion_radius >= 0.0)) fail("offset_exclusion_radius must be >= 0");
  if (!(min_offset_separation >= 0.0)) fail("min_offset_separation must be >= 0");
  if (max_evaluations == 0) fail("max_evaluations must be positive");
  if (!(regularization_epsilon > 0.0 && regularization_epsilon <= 1.0)) fail("regularization_epsilon must be in (0, 1]");
  if (!(support_tolerance >= 0.0)) fail("support_tolerance must be >= 0");
  if (!(null_tolerance >= 0.0)) fail("null_tolerance must be >= 0");
  if (!(derivative_step >= 0.0)) fail("derivative_step must be >= 0");
}

Domain offset_domain(const Domain& domain, double theta) {
  return {domain.lower - theta, domain.upper - theta, domain.lower_open, domain.upper_open};
}

std::vector<double> uniform_grid(const Domain& d, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  const double span = d.upper - d.lower;
  const int first = d.lower_open ? 1 : 0;
  const int intervals = n - 1 + (d.lower_open ? 1 : 0) + (d.upper_open ? 1 : 0);
  for (int j = 0; j < n; ++j) {
    out[static_cast<std::size_t>(j)] = d.lower + span * static_cast<double>(j + first) / intervals;
  }
  if (!d.upper_open) out.back() = d.upper;
  return out;
}

unsigned worker_count(const OptimizerConfig& cfg) {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("QBOUND_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap > 0) n = std::min(n, static_cast<unsigned>(cap));
  }
  if (cfg.threads > 0) n = cfg.threads;
  return n;
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// True when a is preferred over b.
bool better(double va, const RealVector& a, double vb, const RealVector& b) {
  if (va != vb) return va > vb;
  const double na = a.norm();
  const double nb = b.norm();
  if (na != nb) return na < nb;
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

bool separated(const RealVector& x, double min_sep) {
  for (Index i = 0; i < x.size(); ++i) {
    for (Index j = 0; j < i; ++j) {
      if (std::abs(x(i) - x(j)) < min_sep) return false;
    }
  }
  return true;
}

struct Grid {
  std::vector<std::vector<double>> axes;
  std::size_t total = 1;

  RealVector point(std::size_t index) const {
    RealVector x(static_cast<Index>(axes.size()));
    for (std::size_t d = axes.size(); d-- > 0;) {
      const std::size_t n = axes[d].size();
      x(static_cast<Index>(d)) = axes[d][index % n];
      index /= n;
    }
    return x;
  }
};

std::vector<double> punctured(const Domain& dom, int n, double radius) {
  auto pts = uniform_grid(dom, n);
  std::erase_if(pts, [radius](double x) { return std::abs(x) < radius; });
  return pts;
}

void golden_refine(const OffsetObjective& f, RealVector& x, double& fx, Index coord, double a, double b, int iters,
                   std::size_t& evals, const OptimizerConfig& cfg) {
  auto eval = [&](double t) {
    RealVector y = x;
    y(coord) = t;
    ++evals;
    if (evals > cfg.max_evaluations) {
      throw Error(ErrorKind::OptimizerBudgetExceeded, "maximize_offsets",
                  "more than " + std::to_string(cfg.max_evaluations) + " evaluations");
    }
    if (!separated(y, cfg.min_offset_separation)) return kNegInf;
    const double v = f(y);
    return std::isfinite(v) ? v : kNegInf;
  };
  auto consider = [&](double t, double v) {
    RealVector y = x;
    y(coord) = t;
    // Moves smaller than rounding noise would only shift the argmax away
    // from grid points such as the domain edge.
    if (v > kNegInf && v > fx + 8.0 * std::numeric_limits<double>::epsilon() * std::abs(fx)) {
      x = y;
      fx = v;
    }
  };
  if (!(b > a)) return;
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  const double fa = eval(a);
  const double fb = eval(b);
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = eval(c);
  double fd = eval(d);
  consider(a, fa);
  consider(b, fb);
  for (int it = 0; it < iters; ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = eval(d);
    }
    consider(c, fc);
    consider(d, fd);
  }
}

}  // namespace

OffsetSearch maximize_offsets(const OffsetObjective& objective, int r, const Domain& dom,
                              const OptimizerConfig& cfg) {
  cfg.validate();
  if (r < 1) throw Error(ErrorKind::InvalidArgument, "maximize_offsets", "need at least one offset");

  Grid grid;
  for (int d = 0; d < r; ++d) {
    grid.axes.push_back(punctured(dom, d == 0 ? cfg.grid_points : cfg.coarse_grid_points, cfg.offset_exclusion_radius));
    grid.total *= grid.axes.back().size();
  }
  if (grid.total == 0) throw Error(ErrorKind::InvalidArgument, "maximize_offsets", "empty offset grid");
  if (grid.total > cfg.max_evaluations) {
    throw Error(ErrorKind::OptimizerBudgetExceeded, "maximize_offsets",
                "grid of " + std::to_string(grid.total) + " points exceeds the budget");
  }

  std::vector<double> values(grid.total, kNegInf);
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(cfg), grid.total));
  std::vector<std::exception_ptr> errors(workers);
  auto run = [&](unsigned w) {
    try {
      for (std::size_t i = w; i < grid.total; i += workers) {
        const RealVector x = grid.point(i);
        if (!separated(x, cfg.min_offset_separation)) continue;
        const double v = objective(x);
        values[i] = std::isnan(v) ? kNegInf : v;
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (workers <= 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  OffsetSearch out;
  out.grid_points = grid.total;
  out.evaluations = grid.total;

  std::vector<std::size_t> order(grid.total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(cfg.refine_candidates), grid.total);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return better(values[a], grid.point(a), values[b], grid.point(b));
                    });
  out.value = values[order[0]];
  out.argmax = grid.point(order[0]);
  if (out.value == kNegInf) {
    throw Error(ErrorKind::NumericalFailure, "maximize_offsets", "no admissible offset on the grid");
  }
  if (std::isinf(out.value) || cfg.refine_iterations == 0) return out;

  std::vector<double> steps;
  for (const auto& axis : grid.axes) {
    steps.push_back(axis.size() > 1 ? (dom.upper - dom.lower) / static_cast<double>(axis.size()) : 0.0);
  }
  const double open_margin = 1e-12 * std::max(1.0, std::abs(dom.upper - dom.lower));
  const int passes = r == 1 ? 1 : 2;
  for (std::size_t c = 0; c < keep; ++c) {
    if (values[order[c]] == kNegInf) break;
    RealVector x = grid.point(order[c]);
    double fx = values[order[c]];
    for (int pass = 0; pass < passes; ++pass) {
      for (Index i = 0; i < r; ++i) {
        const double step = steps[static_cast<std::size_t>(i)];
        double a = std::max(x(i) - step, dom.lower + (dom.lower_open ? open_margin : 0.0));
        double b = std::min(x(i) + step, dom.upper - (dom.upper_open ? open_margin : 0.0));
        if (x(i) > 0.0) a = std::max(a, cfg.offset_exclusion_radius);
        if (x(i) < 0.0) b = std::min(b, -cfg.offset_exclusion_radius);
        golden_refine(objective, x, fx, i, a, b, cfg.refine_iterations, out.evaluations, cfg);
        out.refine_iterations += cfg.refine_iterations;
      }
    }
    // Same noise margin as inside the refinement: a flat maximum stays at the
    // best grid point instead of drifting to an equivalent open endpoint.
    if (fx > out.value + 8.0 * std::numeric_limits<double>::epsilon() * std::abs(out.value)) {
      out.value = fx;
      out.argmax = x;
    }
  }
  return out;
}

}  // namespace qbound
