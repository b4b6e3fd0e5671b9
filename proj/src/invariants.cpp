#include "qbound/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qbound/classical_bounds.hpp"
#include "qbound/measurement.hpp"
#include "qbound/montecarlo.hpp"
#include "qbound/quantum_bounds.hpp"
#include "qbound/qubit_mshot.hpp"
#include "qbound/random.hpp"
#include "qbound/test_observables.hpp"

namespace qbound {

namespace {

using std::numbers::pi;

struct Context {
  OmegaFunction omega;
  std::uint64_t seed;
};

struct Invariant {
  const char* group;
  const char* name;
  double tolerance;
  std::function<double(const Context&)> measure;  // worst defect, compared against tolerance
};

double max_diff(const HermitianOperator& a, const HermitianOperator& b) {
  return max_abs(ComplexMatrix(a.matrix() - b.matrix()));
}

OptimizerConfig quick_optimizer() {
  OptimizerConfig cfg;
  cfg.grid_points = 256;
  cfg.coarse_grid_points = 16;
  cfg.refine_iterations = 40;
  return cfg;
}

double mixed_qubit_r(Random& rng) { return rng.uniform(0.05, 0.95); }

const std::vector<Invariant>& registry() {
  static const std::vector<Invariant> all = {
      {"omega", "symmetric_division_identity", 1e-9,
       [](const Context& c) {
         Random rng(c.seed);
         double worst = 0.0;
         for (Index d : {2, 3, 4}) {
           for (int i = 0; i < 40; ++i) {
             const auto rho = rng.density_matrix(d);
             const auto x = rng.hermitian(d);
             const auto w = c.omega(rho, x);
             const ComplexMatrix back = 0.5 * (w.matrix() * rho.matrix() + rho.matrix() * w.matrix());
             worst = std::max(worst, max_abs(ComplexMatrix(back - x.matrix())) / std::max(1.0, x.max_abs()));
           }
         }
         return worst;
       }},
      {"omega", "backends_agree", 1e-9,
       [](const Context& c) {
         Random rng(c.seed + 1);
         double worst = 0.0;
         for (int i = 0; i < 60; ++i) {
           const auto rho = rng.density_matrix(3);
           const auto x = rng.hermitian(3);
           worst = std::max(worst, max_diff(c.omega(rho, x), omega_apply_vectorized(rho, x)) / std::max(1.0, x.max_abs()));
         }
         return worst;
       }},
      {"omega", "linearity", 1e-10,
       [](const Context& c) {
         Random rng(c.seed + 2);
         double worst = 0.0;
         for (int i = 0; i < 30; ++i) {
           const auto rho = rng.density_matrix(3, 0.05);
           const auto x = rng.hermitian(3);
           const auto y = rng.hermitian(3);
           const double a = rng.uniform(-2, 2);
           const double b = rng.uniform(-2, 2);
           const auto lhs = c.omega(rho, a * x + b * y);
           const auto rhs = a * c.omega(rho, x) + b * c.omega(rho, y);
           worst = std::max(worst, max_diff(lhs, rhs) / std::max(1.0, lhs.max_abs()));
         }
         return worst;
       }},
      {"omega", "inner_product_symmetry", 1e-10,
       [](const Context& c) {
         Random rng(c.seed + 3);
         double worst = 0.0;
         for (int i = 0; i < 30; ++i) {
           const auto rho = rng.density_matrix(4, 0.02);
           const auto x = rng.hermitian(4);
           const auto y = rng.hermitian(4);
           const double xy = trace_product(x, c.omega(rho, y));
           const double yx = trace_product(y, c.omega(rho, x));
           worst = std::max(worst, std::abs(xy - yx) / std::max(1.0, std::abs(xy)));
         }
         return worst;
       }},
      {"omega", "pseudo_inverse", 1e-9,
       [](const Context& c) {
         Random rng(c.seed + 4);
         double worst = 0.0;
         for (int i = 0; i < 20; ++i) {
           RealMatrix b(4, 2);
           for (Index k = 0; k < b.size(); ++k) b.data()[k] = rng.normal();
           const RealMatrix m = b * b.transpose();
           const RealMatrix p = sym_pinv(m);
           worst = std::max(worst, max_abs(RealMatrix(m * p * m - m)));
           worst = std::max(worst, max_abs(RealMatrix(p * m * p - p)));
         }
         return worst;
       }},
      {"state", "bloch_norm_preserved", 1e-12,
       [](const Context& c) {
         Random rng(c.seed + 10);
         double worst = 0.0;
         for (int i = 0; i < 100; ++i) {
           const BlochVector r0(rng.bloch_vector());
           const auto r = bloch_evolve(r0, rng.unit_vector(), rng.uniform(-pi, pi));
           worst = std::max(worst, std::abs(r.length() - r0.length()));
         }
         return worst;
       }},
      {"state", "spectrum_theta_invariant", 1e-12,
       [](const Context& c) {
         Random rng(c.seed + 11);
         double worst = 0.0;
         for (int i = 0; i < 20; ++i) {
           const QubitPhaseModel model(BlochVector(rng.bloch_vector(0.99)), rng.unit_vector());
           const RealVector ref = spectral_decompose(model.evaluate(0.0)).eigenvalues;
           const RealVector other = spectral_decompose(model.evaluate(rng.uniform(-3.0, 3.0))).eigenvalues;
           worst = std::max(worst, (ref - other).cwiseAbs().maxCoeff());
         }
         return worst;
       }},
      {"state", "derivatives_traceless", 1e-8,
       [](const Context& c) {
         Random rng(c.seed + 12);
         double worst = 0.0;
         const auto ladder = DepolarizedPureModel::phase_ladder(3, 0.1);
         const QubitPhaseModel model(BlochVector(rng.bloch_vector(0.9)), rng.unit_vector());
         for (int k = 1; k <= 3; ++k) {
           worst = std::max(worst, std::abs(ladder.derivative(0.3, k).trace()));
           worst = std::max(worst, std::abs(model.derivative(0.3, k).trace()));
           worst = std::max(worst, std::abs(model.stencil_derivative(0.3, k).trace()));
         }
         return worst;
       }},
      {"state", "entropy_roundtrip", 1e-10,
       [](const Context&) {
         double worst = 0.0;
         for (int i = 0; i <= 100; ++i) {
           const double r = i / 100.0;
           worst = std::max(worst, std::abs(entropy_to_bloch_length(binary_entropy(r)) - r));
         }
         return worst;
       }},
      {"observables", "barankin_lambda_is_offset", 0.0,
       [](const Context&) {
         const auto model = QubitPhaseModel::equatorial(0.5);
         const std::vector<double> offsets{0.4, -1.3, pi};
         const auto set = barankin_set(model, 0.0, offsets);
         double worst = 0.0;
         for (std::size_t k = 0; k < offsets.size(); ++k) {
           worst = std::max(worst, std::abs(set.lambda()(static_cast<Index>(k)) - offsets[k]));
           worst = std::max(worst, max_diff(set[static_cast<Index>(k)].g, model.evaluate(offsets[k])));
         }
         return worst;
       }},
      {"observables", "abel_concatenates_builders", 0.0,
       [](const Context&) {
         const auto model = QubitPhaseModel::equatorial(0.5);
         const auto abel = abel_set(model, 0.2, {0.7, -0.4}, 2);
         const auto ba = barankin_set(model, 0.2, {0.7, -0.4});
         const auto bh = bhattacharyya_set(model, 0.2, 2);
         double worst = 0.0;
         for (Index k = 0; k < 2; ++k) worst = std::max(worst, max_diff(abel[k].g, ba[k].g));
         for (Index k = 0; k < 2; ++k) worst = std::max(worst, max_diff(abel[k + 2].g, bh[k].g));
         RealVector f(4);
         f << 1, 1, 0, 0;
         return std::max(worst, (abel.f_vector() - f).cwiseAbs().maxCoeff());
       }},
      {"observables", "support_validation_idempotent", kDefaultSupportTolerance,
       [](const Context&) {
         const auto pure = DepolarizedPureModel::equatorial_qubit(0.0);
         const auto set = barankin_set(pure, 0.0, {0.8});
         const auto first = validate_support(set, pure.evaluate(0.0), kDefaultSupportTolerance, true);
         const auto second = validate_support(first.set, first.state, kDefaultSupportTolerance, false);
         return second.diagnostics.max_violation;
       }},
      {"classical", "chi2_equals_barankin_entry", 1e-10,
       [](const Context& c) {
         Random rng(c.seed + 20);
         double worst = 0.0;
         for (int i = 0; i < 20; ++i) {
           const auto model = QubitPhaseModel::equatorial(mixed_qubit_r(rng));
           const auto povm = rng.qubit_projective();
           const double lam = rng.uniform(0.1, 3.0);
           const auto set = barankin_set(model, 0.0, {lam});
           const auto cm = classical_info_matrix(povm, set, model.evaluate(0.0));
           const double chi2 = chi2_divergence(probabilities(povm, model.evaluate(lam)),
                                               probabilities(povm, model.evaluate(0.0)));
           worst = std::max(worst, std::abs(cm.matrix(0, 0) - 1.0 - chi2));
         }
         return worst;
       }},
      {"classical", "estimator_attains_bound", 1e-9,
       [](const Context& c) {
         Random rng(c.seed + 21);
         double worst = 0.0;
         for (int i = 0; i < 20; ++i) {
           const auto model = QubitPhaseModel::equatorial(mixed_qubit_r(rng));
           const auto povm = rng.qubit_projective();
           const auto set = abel_set(model, 0.0, {rng.uniform(0.3, 3.0)}, 1);
           const auto rho = model.evaluate(0.0);
           const auto cm = classical_shifted_matrix(povm, set, rho);
           const auto bound = classical_bound(cm, set.lambda(), set.f_vector());
           if (!std::isfinite(bound.value)) continue;
           const auto est = optimal_estimator(povm, set, cm, set.lambda(), set.f_vector(), rho);
           const double var = evaluate_exact(probabilities(povm, rho), est).variance;
           worst = std::max(worst, std::abs(var - bound.value) / std::max(1.0, bound.value));
         }
         return worst;
       }},
      {"classical", "constraints_never_loosen", 1e-8,
       [](const Context& c) {
         Random rng(c.seed + 22);
         double worst = 0.0;
         for (int i = 0; i < 20; ++i) {
           const auto model = QubitPhaseModel::equatorial(mixed_qubit_r(rng));
           Povm povm({bloch_operator(0.5, Vec3(0.5, 0, 0)), bloch_operator(0.5, Vec3(-0.5, 0, 0)),
                      bloch_operator(0.5, Vec3(0, 0, 0.5)), bloch_operator(0.5, Vec3(0, 0, -0.5))});
           const double l1 = rng.uniform(0.2, 3.0);
           const double l2 = -rng.uniform(0.2, 3.0);
           const auto rho = model.evaluate(0.0);
           const auto small = abel_set(model, 0.0, {l1}, 1);
           const auto big = abel_set(model, 0.0, {l1, l2}, 1);
           const double v1 = classical_bound(classical_shifted_matrix(povm, small, rho), small.lambda(), small.f_vector()).value;
           const double v2 = classical_bound(classical_shifted_matrix(povm, big, rho), big.lambda(), big.f_vector()).value;
           worst = std::max(worst, v1 - v2);
         }
         return worst;
       }},
      {"quantum", "information_matrix_psd", 1e-9,
       [](const Context& c) {
         Random rng(c.seed + 30);
         double worst = 0.0;
         for (int i = 0; i < 20; ++i) {
           const QubitPhaseModel model(BlochVector(rng.bloch_vector(0.95)), rng.unit_vector());
           const auto set = abel_set(model, 0.0, {rng.uniform(-3, -0.1), rng.uniform(0.1, 3)}, 2);
           const auto q = quantum_info_matrix(set, model.evaluate(0.0));
           const double lo = Eigen::SelfAdjointEigenSolver<RealMatrix>(q.matrix).eigenvalues().minCoeff();
           worst = std::max(worst, -lo / std::max(1.0, q.matrix.cwiseAbs().maxCoeff()));
         }
         return worst;
       }},
      {"quantum", "bounds_above_qcrb", 1e-8,
       [](const Context& c) {
         Random rng(c.seed + 31);
         double worst = 0.0;
         for (int i = 0; i < 5; ++i) {
           const auto model = QubitPhaseModel::equatorial(mixed_qubit_r(rng));
           const double q = qcrb(model, 0.0).value;
           for (auto [r, s] : {std::pair{1, 0}, {1, 1}, {0, 2}}) {
             const double v = sup_over_testpoints(model, 0.0, r, s, quick_optimizer()).value;
             worst = std::max(worst, (q - v) / q);
           }
         }
         return worst;
       }},
      {"quantum", "hierarchy_monotone", 1e-8,
       [](const Context& c) {
         Random rng(c.seed + 32);
         double worst = 0.0;
         for (int i = 0; i < 4; ++i) {
           const QubitPhaseModel model(BlochVector(rng.bloch_vector(0.9)), Vec3::UnitZ());
           if (model.derivative(0.0, 1).max_abs() < 1e-3) continue;
           const auto cfg = quick_optimizer();
           const double v01 = sup_over_testpoints(model, 0.0, 0, 1, cfg).value;
           const double v10 = sup_over_testpoints(model, 0.0, 1, 0, cfg).value;
           const double v11 = sup_over_testpoints(model, 0.0, 1, 1, cfg).value;
           worst = std::max({worst, (v01 - v10) / v01, (v10 - v11) / v10});
         }
         return worst;
       }},
      {"quantum", "chi2_approaches_fisher", 1e-6,
       [](const Context&) {
         const auto model = QubitPhaseModel::equatorial(0.6);
         const double lam = 1e-3;
         return std::abs(quantum_chi2(model, 0.0, lam) / (lam * lam) - 0.36);
       }},
      {"quantum", "explicit_base_row_consistent", 1e-9,
       [](const Context& c) {
         Random rng(c.seed + 33);
         double worst = 0.0;
         for (int i = 0; i < 20; ++i) {
           const auto rho_model = QubitPhaseModel(BlochVector(rng.bloch_vector(0.9)), rng.unit_vector());
           const auto set = abel_set(rho_model, 0.0, {rng.uniform(0.2, 3.0), -rng.uniform(0.2, 3.0)}, 1);
           const auto rho = rho_model.evaluate(0.0);
           const double implicit = bound_from_matrix(quantum_info_matrix(set, rho), set.lambda(), set.f_vector()).value;
           const auto with_base = set.with_base_state(rho);
           const double explicit_value =
               bound_from_matrix(quantum_info_matrix(with_base, rho), with_base.lambda(), with_base.f_vector()).value;
           if (std::isfinite(implicit)) worst = std::max(worst, std::abs(implicit - explicit_value) / implicit);
         }
         return worst;
       }},
      {"mshot", "closed_forms_match_tensor_power", 1e-9,
       [](const Context& c) {
         Random rng(c.seed + 40);
         double worst = 0.0;
         for (int m = 1; m <= 3; ++m) {
           const auto model = QubitPhaseModel::equatorial(mixed_qubit_r(rng));
           const MShotContext ctx(model, m, 0.0);
           const double lk = rng.uniform(-pi, pi);
           const double ll = rng.uniform(-pi, pi);
           const auto rho = tensor_power(model.evaluate(0.0), m);
           const auto rk = tensor_power(model.evaluate(lk), m);
           const auto rl = tensor_power(model.evaluate(ll), m);
           const OmegaOperator omega(rho);
           worst = std::max(worst, std::abs(qba_entry_mshot(ctx, lk, ll) - trace_product(rk, omega.apply(rl))));
         }
         return worst;
       }},
      {"mshot", "fisher_additive", 1e-9,
       [](const Context&) {
         const auto model = QubitPhaseModel::equatorial(0.42);
         const MultiCopyFamily three(borrow(model), 3);
         const OmegaOperator omega(three.evaluate(0.0));
         const auto d = three.derivative(0.0, 1);
         const double generic = trace_product(d, omega.apply(d));
         return std::abs(generic - qbh11_mshot(MShotContext(model, 3, 0.0)));
       }},
      {"measurement", "optimal_povm_saturates", 1e-7,
       [](const Context&) {
         const auto model = QubitPhaseModel::equatorial(0.42);
         double worst = 0.0;
         for (const auto& offsets : {std::vector<double>{}, std::vector<double>{pi}, std::vector<double>{2.0}}) {
           const auto om = optimal_measurement(model, 0.0, offsets, 1);
           const auto rep = saturation_check(om.povm, om.set, om.state, om.a, om.lambda, om.set.f_vector());
           worst = std::max({worst, std::abs(rep.classical_equals_quantum_gap), rep.condition_i_residual,
                             rep.condition_iii_residual});
         }
         return worst;
       }},
      {"measurement", "povm_projective", 1e-9,
       [](const Context&) {
         const auto model = QubitPhaseModel::equatorial(0.42);
         const auto om = optimal_measurement(model, 0.0, std::vector<double>{pi}, 1, 2);
         double worst = 0.0;
         for (Index x = 0; x < om.povm.size(); ++x) {
           const ComplexMatrix& e = om.povm[x].matrix();
           worst = std::max(worst, max_abs(ComplexMatrix(e * e - e)));
           for (Index y = 0; y < x; ++y) worst = std::max(worst, max_abs(ComplexMatrix(e * om.povm[y].matrix())));
         }
         return worst;
       }},
      {"montecarlo", "sampling_reproducible", 0.0,
       [](const Context& c) {
         const auto model = QubitPhaseModel::equatorial(0.42);
         const auto povm = Povm::qubit_axis(Vec3::UnitX());
         const auto a = sample(povm, model.evaluate(0.0), 20000, c.seed);
         const auto b = sample(povm, model.evaluate(0.0), 20000, c.seed);
         return a.counts == b.counts ? 0.0 : 1.0;
       }},
      {"montecarlo", "exact_plugin_equals_bound", 1e-9,
       [](const Context&) {
         const auto model = QubitPhaseModel::equatorial(0.42);
         const auto om = optimal_measurement(model, 0.0, std::vector<double>{pi}, 1);
         const double var = evaluate_exact(probabilities(om.povm, om.state), om.estimator).variance;
         return std::abs(var - om.bound) / om.bound;
       }},
  };
  return all;
}

bool selected(const Invariant& inv, const std::string& filter) {
  if (filter.empty() || filter == inv.group) return true;
  const std::string full = std::string(inv.group) + "." + inv.name;
  return full.find(filter) != std::string::npos;
}

}  // namespace

std::vector<InvariantResult> run_invariants(const InvariantOptions& options) {
  Context ctx{options.omega, options.seed};
  if (!ctx.omega) {
    ctx.omega = [](const HermitianOperator& rho, const HermitianOperator& x) { return omega_apply(rho, x); };
  }
  std::vector<InvariantResult> out;
  for (const auto& inv : registry()) {
    if (!selected(inv, options.filter)) continue;
    InvariantResult res{inv.group, inv.name, false, 0.0, inv.tolerance};
    try {
      res.measured = inv.measure(ctx);
      res.passed = res.measured <= inv.tolerance;
    } catch (const std::exception&) {
      res.measured = std::numeric_limits<double>::infinity();
      res.passed = false;
    }
    out.push_back(res);
  }
  return out;
}

std::vector<std::string> invariant_names() {
  std::vector<std::string> out;
  for (const auto& inv : registry()) out.push_back(std::string(inv.group) + "." + inv.name);
  return out;
}

}  // namespace qbound
