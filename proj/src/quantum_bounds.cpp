#include "qbound/quantum_bounds.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "qbound/classical_bounds.hpp"
#include "qbound/errors.hpp"

namespace qbound {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double real_entry(Complex z, double scale, std::string_view op) {
  if (std::abs(z.imag()) > 1e-9 * std::max(1.0, scale)) {
    throw Error(ErrorKind::NonRealEntry, op, "imaginary part " + std::to_string(z.imag()));
  }
  return z.real();
}

RealMatrix gram(const OmegaOperator& omega, const std::vector<ComplexMatrix>& eig, std::string_view op) {
  const Index n = static_cast<Index>(eig.size());
  RealMatrix q(n, n);
  std::vector<Complex> raw(static_cast<std::size_t>(n * n));
  double scale = 0.0;
  for (Index k = 0; k < n; ++k) {
    for (Index l = k; l < n; ++l) {
      const Complex z = omega.inner(eig[static_cast<std::size_t>(k)], eig[static_cast<std::size_t>(l)]);
      raw[static_cast<std::size_t>(k * n + l)] = z;
      scale = std::max(scale, std::abs(z.real()));
    }
  }
  for (Index k = 0; k < n; ++k) {
    for (Index l = k; l < n; ++l) {
      q(k, l) = q(l, k) = real_entry(raw[static_cast<std::size_t>(k * n + l)], scale, op);
    }
  }
  return q;
}

// max |X_ij| over pairs of kernel indices, X already in the eigenbasis.
double kernel_leak(const OmegaOperator& omega, const ComplexMatrix& x_eig) {
  double v = 0.0;
  const RealVector& p = omega.eigenvalues();
  for (Index i = 0; i < p.size(); ++i) {
    if (p(i) != 0.0) continue;
    for (Index j = 0; j < p.size(); ++j) {
      if (p(j) == 0.0) v = std::max(v, std::abs(x_eig(i, j)));
    }
  }
  return v;
}

InformationMatrix info_from(const TestObservableSet& set, const HermitianOperator& rho, double tol, bool shifted) {
  if (set.size() > 0 && set.dim() != rho.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "quantum_info_matrix", "set and state differ in dimension");
  }
  const OmegaOperator omega(rho, tol);
  std::vector<ComplexMatrix> eig;
  eig.reserve(static_cast<std::size_t>(set.size()));
  for (Index k = 0; k < set.size(); ++k) {
    HermitianOperator g = set[k].g;
    if (shifted && set.f_vector()(k) != 0.0) g -= set.f_vector()(k) * rho;
    eig.push_back(omega.to_eigenbasis(g));
  }
  InformationMatrix out;
  out.kind = InfoKind::Quantum;
  out.matrix = gram(omega, eig, "quantum_info_matrix");
  out.offsets = set.offsets();
  out.f_subtracted = shifted;
  return out;
}

// --- evaluators ---

class GenericQuantum final : public AbelEvaluator {
 public:
  GenericQuantum(const StateFamily& family, double theta, int s, int copies, const OptimizerConfig& cfg)
      : AbelEvaluator(s, "generic"), family_(copies_of(family, copies)), theta_(theta),
        support_tol_(cfg.support_tolerance) {
    HermitianOperator rho = family_->evaluate(theta);
    std::vector<HermitianOperator> derivs;
    for (int k = 1; k <= std::max(s, 1); ++k) derivs.push_back(family_->derivative(theta, k, cfg.derivative_step));

    const auto kernel = support_projector(rho, cfg.null_tolerance);
    if (kernel.rank > 0) {
      if (cfg.regularize) {
        rho = mix_with_identity(rho, cfg.regularization_epsilon);
        regularization_epsilon_ = cfg.regularization_epsilon;
      } else {
        const ComplexMatrix& p = kernel.projector.matrix();
        for (const auto& d : derivs) {
          const double v = max_abs(ComplexMatrix(p * d.matrix() * p));
          support_violation_ = std::max(support_violation_, v);
          if (v > support_tol_ * std::max(d.max_abs(), 1e-300)) {
            throw Error(ErrorKind::SupportViolation, "sup_over_testpoints",
                        "derivative leaks into the kernel of rho (" + std::to_string(v) + ")");
          }
        }
      }
    }
    rho_ = rho;
    omega_ = std::make_unique<OmegaOperator>(rho_, cfg.null_tolerance);
    check_kernel_ = omega_->null_rank() > 0;
    for (const auto& d : derivs) deriv_eig_.push_back(omega_->to_eigenbasis(d));
    fisher_ = omega_->inner(deriv_eig_[0], deriv_eig_[0]).real();
  }

  InformationMatrix shifted_matrix(const RealVector& offsets) const override {
    std::vector<ComplexMatrix> eig;
    eig.reserve(static_cast<std::size_t>(offsets.size() + s_));
    for (Index i = 0; i < offsets.size(); ++i) {
      const HermitianOperator delta = family_->evaluate(theta_ + offsets(i)) - rho_;
      eig.push_back(omega_->to_eigenbasis(delta));
      if (check_kernel_) {
        const double v = kernel_leak(*omega_, eig.back());
        if (v > support_tol_ * std::max(delta.max_abs(), 1e-300)) {
          throw Error(ErrorKind::SupportViolation, "sup_over_testpoints",
                      "rho(theta + " + std::to_string(offsets(i)) + ") leaks into the kernel of rho(theta)");
        }
      }
    }
    for (int k = 0; k < s_; ++k) eig.push_back(deriv_eig_[static_cast<std::size_t>(k)]);
    InformationMatrix out;
    out.kind = InfoKind::Quantum;
    out.matrix = gram(*omega_, eig, "sup_over_testpoints");
    out.offsets = offsets;
    out.f_subtracted = true;
    return out;
  }

  double crb() const override { return fisher_ > 0.0 ? 1.0 / fisher_ : kInf; }

 private:
  std::shared_ptr<const StateFamily> family_;
  double theta_;
  double support_tol_;
  HermitianOperator rho_;
  std::unique_ptr<OmegaOperator> omega_;
  bool check_kernel_ = false;
  std::vector<ComplexMatrix> deriv_eig_;
  double fisher_ = 0.0;
};

class QubitClosedForm final : public AbelEvaluator {
 public:
  QubitClosedForm(const QubitPhaseModel& model, double theta, int s, int copies)
      : AbelEvaluator(s, "closed_form"), ctx_(model, copies, theta), fisher_(qbh11_mshot(ctx_)) {}

  InformationMatrix shifted_matrix(const RealVector& offsets) const override {
    const Index r = offsets.size();
    const Index n = r + s_;
    InformationMatrix out;
    out.kind = InfoKind::Quantum;
    out.matrix.resize(n, n);
    out.offsets = offsets;
    out.f_subtracted = true;
    for (Index i = 0; i < r; ++i) {
      for (Index j = i; j < r; ++j) {
        out.matrix(i, j) = out.matrix(j, i) = qba_shifted_entry_mshot(ctx_, offsets(i), offsets(j));
      }
      if (s_ == 1) out.matrix(i, r) = out.matrix(r, i) = qh_entry_mshot(ctx_, offsets(i));
    }
    if (s_ == 1) out.matrix(r, r) = fisher_;
    return out;
  }

  double crb() const override { return fisher_ > 0.0 ? 1.0 / fisher_ : kInf; }

 private:
  MShotContext ctx_;
  double fisher_;
};

class ClassicalFixed final : public AbelEvaluator {
 public:
  ClassicalFixed(const Povm& povm, const StateFamily& family, double theta, int s, const OptimizerConfig& cfg)
      : AbelEvaluator(s, "classical"), povm_(povm), family_(family), theta_(theta) {
    if (povm.dim() != family.dim()) {
      throw Error(ErrorKind::DimensionMismatch, "classical_abel_sup", "POVM and family differ in dimension");
    }
    p0_ = probabilities(povm_, family.evaluate(theta));
    deriv_.resize(povm_.size(), std::max(s, 1));
    for (int k = 1; k <= std::max(s, 1); ++k) {
      const auto d = family.derivative(theta, k, cfg.derivative_step);
      for (Index x = 0; x < povm_.size(); ++x) deriv_(x, k - 1) = trace_product(povm_[x], d);
    }
  }

  InformationMatrix shifted_matrix(const RealVector& offsets) const override {
    const Index r = offsets.size();
    RealMatrix g(povm_.size(), r + s_);
    for (Index i = 0; i < r; ++i) {
      const auto p = probabilities(povm_, family_.evaluate(theta_ + offsets(i)));
      g.col(i) = p.probabilities - p0_.probabilities;
    }
    if (s_ > 0) g.rightCols(s_) = deriv_.leftCols(s_);
    auto out = outcome_information(g, p0_, true);
    out.offsets = offsets;
    return out;
  }

  double crb() const override {
    InformationMatrix c = outcome_information(deriv_.leftCols(1), p0_, true);
    return rayleigh_bound(c, RealVector::Ones(1), RealVector::Zero(1)).value;
  }

 private:
  Povm povm_;
  const StateFamily& family_;
  double theta_;
  ProbabilityModel p0_;
  RealMatrix deriv_;
};

const QubitPhaseModel* closed_form_model(const StateFamily& family, double theta, int s, const OptimizerConfig& cfg) {
  if (cfg.backend == Backend::Generic || s > 1) return nullptr;
  const auto* qubit = dynamic_cast<const QubitPhaseModel*>(&family);
  if (qubit == nullptr) return nullptr;
  if (qubit->bloch(theta).norm() > 1.0 - 1e-12) return nullptr;
  return qubit;
}

}  // namespace

std::shared_ptr<const StateFamily> borrow(const StateFamily& family) {
  return std::shared_ptr<const StateFamily>(std::shared_ptr<const StateFamily>{}, &family);
}

std::shared_ptr<const StateFamily> copies_of(const StateFamily& family, int copies) {
  if (copies < 1) throw Error(ErrorKind::InvalidArgument, "copies_of", "copies must be >= 1");
  if (copies == 1) return borrow(family);
  return std::make_shared<MultiCopyFamily>(borrow(family), copies);
}

InformationMatrix quantum_info_matrix(const TestObservableSet& set, const HermitianOperator& rho, double tol) {
  return info_from(set, rho, tol, false);
}

InformationMatrix quantum_shifted_matrix(const TestObservableSet& set, const HermitianOperator& rho, double tol) {
  return info_from(set, rho, tol, true);
}

BoundResult bound_from_matrix(const InformationMatrix& q, const RealVector& lambda, const RealVector& f) {
  auto out = rayleigh_bound(q, lambda, f);
  out.kind = InfoKind::Quantum;
  return out;
}

BoundResult qcrb(const StateFamily& family, double theta, int copies) {
  if (copies < 1) throw Error(ErrorKind::InvalidArgument, "qcrb", "copies must be >= 1");
  double fisher = 0.0;
  std::string backend = "generic";
  if (const auto* qubit = closed_form_model(family, theta, 1, OptimizerConfig{})) {
    fisher = qbh11_mshot(MShotContext(*qubit, 1, theta));
    backend = "closed_form";
  } else {
    const OmegaOperator omega(family.evaluate(theta));
    const ComplexMatrix d = omega.to_eigenbasis(family.derivative(theta, 1));
    fisher = omega.inner(d, d).real();
  }
  BoundResult out;
  out.kind = InfoKind::Quantum;
  const double total = copies * fisher;
  out.value = total > 0.0 ? 1.0 / total : kInf;
  out.optimal_a = RealVector::Constant(1, out.value);
  out.optimal_offsets = RealVector(0);
  out.diagnostics.backend = backend;
  out.diagnostics.in_range = total > 0.0;
  return out;
}

double quantum_information_function(const TestObservableSet& set, const HermitianOperator& rho, const RealVector& a) {
  const auto q = quantum_info_matrix(set, rho);
  if (a.size() != q.matrix.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "quantum_information_function",
                std::to_string(a.size()) + " coefficients for " + std::to_string(q.matrix.rows()) + " observables");
  }
  const double num = a.dot(q.matrix * a);
  const double den = a.dot(set.lambda());
  return num / (den * den);
}

double quantum_chi2(const StateFamily& family, double theta, double lambda, bool regularize, double epsilon) {
  if (lambda == 0.0) return 0.0;
  HermitianOperator rho = family.evaluate(theta);
  const HermitianOperator shifted = family.evaluate(theta + lambda);
  OmegaOperator omega(rho);
  HermitianOperator delta = shifted - rho;
  ComplexMatrix d = omega.to_eigenbasis(delta);
  if (omega.null_rank() > 0 && kernel_leak(omega, d) > kDefaultSupportTolerance * std::max(delta.max_abs(), 1e-300)) {
    if (!regularize) {
      throw Error(ErrorKind::SupportViolation, "quantum_chi2",
                  "rho(theta + lambda) leaks into the kernel of rho(theta)");
    }
    rho = mix_with_identity(rho, epsilon);
    omega = OmegaOperator(rho);
    delta = shifted - rho;
    d = omega.to_eigenbasis(delta);
  }
  return std::max(0.0, omega.inner(d, d).real());
}

RealVector AbelEvaluator::lambda(const RealVector& offsets) const {
  RealVector lam = RealVector::Zero(offsets.size() + s_);
  lam.head(offsets.size()) = offsets;
  if (s_ > 0) lam(offsets.size()) = 1.0;
  return lam;
}

BoundResult AbelEvaluator::bound(const RealVector& offsets) const {
  const auto m = shifted_matrix(offsets);
  auto out = rayleigh_bound(m, lambda(offsets), RealVector::Zero(m.matrix.rows()));
  out.diagnostics.backend = backend_;
  out.diagnostics.support_violation = support_violation_;
  out.diagnostics.regularization_epsilon = regularization_epsilon_;
  return out;
}

std::unique_ptr<AbelEvaluator> make_quantum_evaluator(const StateFamily& family, double theta, int s, int copies,
                                                      const OptimizerConfig& cfg) {
  if (const auto* qubit = closed_form_model(family, theta, s, cfg)) {
    return std::make_unique<QubitClosedForm>(*qubit, theta, s, copies);
  }
  if (cfg.backend == Backend::ClosedForm) {
    throw Error(ErrorKind::InvalidArgument, "sup_over_testpoints",
                "closed forms need a mixed-state qubit phase model and s <= 1");
  }
  return std::make_unique<GenericQuantum>(family, theta, s, copies, cfg);
}

std::unique_ptr<AbelEvaluator> make_classical_evaluator(const Povm& povm, const StateFamily& family, double theta,
                                                        int s, const OptimizerConfig& cfg) {
  return std::make_unique<ClassicalFixed>(povm, family, theta, s, cfg);
}

BoundResult sup_abel(const AbelEvaluator& ev, const Domain& domain, double theta, int r, const OptimizerConfig& cfg) {
  cfg.validate();
  const int s = ev.derivative_order();
  if (r < 0 || s < 0 || r + s < 1) {
    throw Error(ErrorKind::InvalidArgument, "sup_over_testpoints",
                "need r >= 0, s >= 0 and r + s >= 1, got (" + std::to_string(r) + "," + std::to_string(s) + ")");
  }
  if (r == 0) return ev.bound(RealVector(0));

  const auto search = maximize_offsets([&ev](const RealVector& x) { return ev.bound(x).value; }, r,
                                       offset_domain(domain, theta), cfg);
  BoundResult out;
  Diagnostics diag;
  diag.edge_value = search.value;
  if (s == 0) {
    diag.limit_value = ev.crb();
    if (diag.limit_value >= search.value) {
      // Offsets shrinking to zero: the one-point Barankin objective tends to the QCRB.
      out.value = diag.limit_value;
      out.optimal_a = RealVector::Constant(1, diag.limit_value);
      out.optimal_offsets = RealVector::Zero(r);
      diag.attained_at_limit = true;
    }
  }
  if (!diag.attained_at_limit) {
    out = ev.bound(search.argmax);
    out.value = search.value;
    out.optimal_offsets = search.argmax;
    diag.in_range = out.diagnostics.in_range;
    diag.range_residual = out.diagnostics.range_residual;
  }
  out.kind = dynamic_cast<const ClassicalFixed*>(&ev) ? InfoKind::Classical : InfoKind::Quantum;
  diag.grid_points = search.grid_points;
  diag.evaluations = search.evaluations;
  diag.refine_iterations = search.refine_iterations;
  diag.argmax = out.optimal_offsets;
  diag.backend = ev.backend();
  diag.support_violation = ev.support_violation();
  diag.regularization_epsilon = ev.regularization_epsilon();
  out.diagnostics = diag;
  return out;
}

BoundResult sup_over_testpoints(const StateFamily& family, double theta, int r, int s, const OptimizerConfig& cfg,
                                int copies) {
  if (r < 0 || s < 0 || r + s < 1) {
    throw Error(ErrorKind::InvalidArgument, "sup_over_testpoints",
                "need r >= 0, s >= 0 and r + s >= 1, got (" + std::to_string(r) + "," + std::to_string(s) + ")");
  }
  const auto ev = make_quantum_evaluator(family, theta, s, copies, cfg);
  return sup_abel(*ev, family.domain(), theta, r, cfg);
}

BoundResult classical_abel_sup(const Povm& povm, const StateFamily& family, double theta, int r, int s,
                               const OptimizerConfig& cfg) {
  const auto ev = make_classical_evaluator(povm, family, theta, s, cfg);
  return sup_abel(*ev, family.domain(), theta, r, cfg);
}

BoundResult hcrb_classical_sup(const Povm& povm, const StateFamily& family, double theta, const OptimizerConfig& cfg) {
  return classical_abel_sup(povm, family, theta, 1, 0, cfg);
}

}  // namespace qbound
