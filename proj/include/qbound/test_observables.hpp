#pragma once

#include <optional>
#include <vector>

#include "qbound/operator_core.hpp"
#include "qbound/state_models.hpp"

namespace qbound {

enum class ObservableKind { BarankinPoint, DerivativeOrder, BaseState, Custom };

struct TestObservable {
  HermitianOperator g;
  double lambda = 0.0;
  ObservableKind kind = ObservableKind::Custom;
  double offset = 0.0;  // BarankinPoint only
  int order = 0;        // DerivativeOrder only
};

/// Ordered test observables G_k with their bias constraints lambda_k.
///
/// The f-vector holds Tr{G_k}: 1 for Barankin points, 0 for derivatives.
/// When the base state rho(theta) is stored as an explicit entry, the
/// subtraction of f f^T is already carried by that row and f is all zeros.
class TestObservableSet {
 public:
  TestObservableSet() = default;
  TestObservableSet(double theta, std::vector<TestObservable> entries);

  double theta() const noexcept { return theta_; }
  Index size() const noexcept { return static_cast<Index>(entries_.size()); }
  Index dim() const;
  const std::vector<TestObservable>& entries() const noexcept { return entries_; }
  const TestObservable& operator[](Index k) const { return entries_[static_cast<std::size_t>(k)]; }

  const RealVector& lambda() const noexcept { return lambda_; }
  const RealVector& f_vector() const noexcept { return f_; }
  RealVector offsets() const;
  int barankin_count() const;
  int derivative_count() const;
  bool has_base_state() const;

  /// Copy with rho(theta) prepended as an explicit row with lambda = 0.
  TestObservableSet with_base_state(const HermitianOperator& rho) const;

 private:
  double theta_ = 0.0;
  std::vector<TestObservable> entries_;
  RealVector lambda_;
  RealVector f_;
};

TestObservableSet barankin_set(const StateFamily& family, double theta, const std::vector<double>& offsets);

TestObservableSet bhattacharyya_set(const StateFamily& family, double theta, int s, double h = 0.0);

/// Barankin entries first, then derivatives 1..s.
TestObservableSet abel_set(const StateFamily& family, double theta, const std::vector<double>& offsets, int s,
                           double h = 0.0);

struct SupportDiagnostics {
  double max_violation = 0.0;           // max_k ||P G_k P||_max, P the kernel projector
  double regularization_epsilon = 0.0;  // 0 unless the state was replaced
};

struct SupportCheck {
  TestObservableSet set;
  HermitianOperator state;  // rho, or (1 - eps) rho + eps I/d after regularization
  SupportDiagnostics diagnostics;
};

inline constexpr double kDefaultSupportTolerance = 1e-10;
inline constexpr double kDefaultRegularization = 1e-8;

/// Checks Pi G_k Pi = 0 on the kernel of rho, each entry relative to
/// ||G_k||_max. Throws SupportViolation unless regularize is set.
SupportCheck validate_support(const TestObservableSet& set, const HermitianOperator& rho,
                              double tol = kDefaultSupportTolerance, bool regularize = false,
                              double epsilon = kDefaultRegularization);

/// (1 - eps) rho + eps I/d
HermitianOperator mix_with_identity(const HermitianOperator& rho, double eps);

}  // namespace qbound
