#include "qbound/test_observables.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qbound/errors.hpp"

namespace qbound {

TestObservableSet::TestObservableSet(double theta, std::vector<TestObservable> entries)
    : theta_(theta), entries_(std::move(entries)) {
  const Index n = size();
  lambda_.resize(n);
  f_.resize(n);
  const bool explicit_base = has_base_state();
  for (Index k = 0; k < n; ++k) {
    const auto& e = entries_[static_cast<std::size_t>(k)];
    if (e.g.dim() != entries_.front().g.dim()) {
      throw Error(ErrorKind::DimensionMismatch, "TestObservableSet", "entries differ in dimension");
    }
    lambda_(k) = e.lambda;
    if (explicit_base) {
      f_(k) = 0.0;
    } else {
      switch (e.kind) {
        case ObservableKind::BarankinPoint: f_(k) = 1.0; break;
        case ObservableKind::DerivativeOrder: f_(k) = 0.0; break;
        default: f_(k) = e.g.trace(); break;
      }
    }
  }
}

Index TestObservableSet::dim() const {
  return entries_.empty() ? 0 : entries_.front().g.dim();
}

RealVector TestObservableSet::offsets() const {
  std::vector<double> out;
  for (const auto& e : entries_) {
    if (e.kind == ObservableKind::BarankinPoint) out.push_back(e.offset);
  }
  return Eigen::Map<RealVector>(out.data(), static_cast<Index>(out.size()));
}

int TestObservableSet::barankin_count() const {
  return static_cast<int>(std::count_if(entries_.begin(), entries_.end(), [](const auto& e) {
    return e.kind == ObservableKind::BarankinPoint;
  }));
}

int TestObservableSet::derivative_count() const {
  return static_cast<int>(std::count_if(entries_.begin(), entries_.end(), [](const auto& e) {
    return e.kind == ObservableKind::DerivativeOrder;
  }));
}

bool TestObservableSet::has_base_state() const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [](const auto& e) { return e.kind == ObservableKind::BaseState; });
}

TestObservableSet TestObservableSet::with_base_state(const HermitianOperator& rho) const {
  std::vector<TestObservable> out;
  out.reserve(entries_.size() + 1);
  out.push_back({rho, 0.0, ObservableKind::BaseState, 0.0, 0});
  out.insert(out.end(), entries_.begin(), entries_.end());
  return TestObservableSet(theta_, std::move(out));
}

namespace {

void check_offsets(const StateFamily& family, double theta, const std::vector<double>& offsets) {
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    const double lam = offsets[i];
    if (lam == 0.0) {
      throw Error(ErrorKind::ZeroOffset, "barankin_set", "offset " + std::to_string(i) + " is zero");
    }
    if (!family.domain().contains(theta + lam)) {
      throw Error(ErrorKind::OutOfDomain, "barankin_set",
                  "theta + " + std::to_string(lam) + " leaves the domain");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (offsets[j] == lam) {
        throw Error(ErrorKind::DuplicateOffset, "barankin_set", "offset " + std::to_string(lam) + " repeated");
      }
    }
  }
}

void append_barankin(std::vector<TestObservable>& out, const StateFamily& family, double theta,
                     const std::vector<double>& offsets) {
  for (double lam : offsets) {
    out.push_back({family.evaluate(theta + lam), lam, ObservableKind::BarankinPoint, lam, 0});
  }
}

void append_derivatives(std::vector<TestObservable>& out, const StateFamily& family, double theta, int s,
                        double h) {
  for (int k = 1; k <= s; ++k) {
    out.push_back({family.derivative(theta, k, h), k == 1 ? 1.0 : 0.0, ObservableKind::DerivativeOrder, 0.0, k});
  }
}

}  // namespace

TestObservableSet barankin_set(const StateFamily& family, double theta, const std::vector<double>& offsets) {
  check_offsets(family, theta, offsets);
  std::vector<TestObservable> out;
  append_barankin(out, family, theta, offsets);
  return TestObservableSet(theta, std::move(out));
}

TestObservableSet bhattacharyya_set(const StateFamily& family, double theta, int s, double h) {
  if (s < 1) throw Error(ErrorKind::InvalidArgument, "bhattacharyya_set", "s must be >= 1");
  std::vector<TestObservable> out;
  append_derivatives(out, family, theta, s, h);
  return TestObservableSet(theta, std::move(out));
}

TestObservableSet abel_set(const StateFamily& family, double theta, const std::vector<double>& offsets, int s,
                           double h) {
  if (s < 0) throw Error(ErrorKind::InvalidArgument, "abel_set", "s must be >= 0");
  if (offsets.empty() && s == 0) throw Error(ErrorKind::InvalidArgument, "abel_set", "empty set");
  check_offsets(family, theta, offsets);
  std::vector<TestObservable> out;
  append_barankin(out, family, theta, offsets);
  append_derivatives(out, family, theta, s, h);
  return TestObservableSet(theta, std::move(out));
}

HermitianOperator mix_with_identity(const HermitianOperator& rho, double eps) {
  ComplexMatrix m = (1.0 - eps) * rho.matrix();
  m.diagonal().array() += eps / static_cast<double>(rho.dim());
  return HermitianOperator::from_trusted(m);
}

SupportCheck validate_support(const TestObservableSet& set, const HermitianOperator& rho, double tol,
                              bool regularize, double epsilon) {
  if (set.size() > 0 && set.dim() != rho.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "validate_support", "set and state differ in dimension");
  }
  const auto kernel = support_projector(rho);
  SupportDiagnostics diag;
  bool violated = false;
  if (kernel.rank > 0) {
    const ComplexMatrix& p = kernel.projector.matrix();
    for (const auto& e : set.entries()) {
      const double v = max_abs(ComplexMatrix(p * e.g.matrix() * p));
      diag.max_violation = std::max(diag.max_violation, v);
      if (v > tol * std::max(e.g.max_abs(), 1e-300)) violated = true;
    }
  }
  if (!violated) return {set, rho, diag};
  if (!regularize) {
    throw Error(ErrorKind::SupportViolation, "validate_support",
                "||P G P||_max = " + std::to_string(diag.max_violation) + " on the kernel of rho");
  }
  diag.regularization_epsilon = epsilon;
  return {set, mix_with_identity(rho, epsilon), diag};
}

}  // namespace qbound
