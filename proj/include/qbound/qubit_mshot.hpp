#pragma once

#include "qbound/state_models.hpp"

namespace qbound {

/// Single-copy spectral data of rho(theta) for a qubit model, reused by the
/// m-copy closed forms.
class MShotContext {
 public:
  MShotContext(const QubitPhaseModel& model, int copies, double theta);

  const QubitPhaseModel& model() const noexcept { return model_; }
  int copies() const noexcept { return copies_; }
  double theta() const noexcept { return theta_; }
  double p_plus() const noexcept { return p_plus_; }
  double p_minus() const noexcept { return p_minus_; }
  /// Columns |+>, |-> of rho(theta).
  const ComplexMatrix& basis() const noexcept { return basis_; }

 private:
  QubitPhaseModel model_;
  int copies_;
  double theta_;
  double p_plus_;
  double p_minus_;
  ComplexMatrix basis_;
  Vec3 r_;
};

/// Tr{rho(theta+lk)^(x)m Omega(rho(theta+ll)^(x)m)} with Omega taken at rho(theta)^(x)m.
double qba_entry_mshot(const MShotContext& ctx, double lambda_k, double lambda_l);

/// Same entry for the shifted observables rho(theta+l)^(x)m - rho(theta)^(x)m,
/// i.e. the Barankin entry minus 1, without cancellation for small offsets.
double qba_shifted_entry_mshot(const MShotContext& ctx, double lambda_k, double lambda_l);

/// m times the single-copy quantum Fisher information.
double qbh11_mshot(const MShotContext& ctx);

/// m times Tr{rho(theta+lk) Omega(d rho/d theta)}.
double qh_entry_mshot(const MShotContext& ctx, double lambda_k);

/// Bloch-vector form of Tr{G_k Omega(G_l)} for G = (g0 I + g.sigma)/2.
double qubit_q_entry(double g0k, const Vec3& gk, double g0l, const Vec3& gl, const Vec3& r);

}  // namespace qbound
