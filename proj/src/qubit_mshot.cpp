#include "qbound/qubit_mshot.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "qbound/errors.hpp"

namespace qbound {

namespace {

constexpr double kSingularMargin = 1e-12;

// Coefficients c[a][b] of x^a y^b, a counting sites with eps = +, b with eta = +.
class Poly {
 public:
  explicit Poly(int degree) : n_(degree + 1), c_(static_cast<std::size_t>(n_ * n_), Complex(0.0)) {}

  static Poly one(int degree) {
    Poly p(degree);
    p.at(0, 0) = 1.0;
    return p;
  }

  Complex& at(int a, int b) { return c_[static_cast<std::size_t>(a * n_ + b)]; }
  Complex at(int a, int b) const { return c_[static_cast<std::size_t>(a * n_ + b)]; }
  int size() const { return n_; }

  Poly& operator+=(const Poly& o) {
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }

  // Product truncated to the common degree; terms never exceed it here.
  friend Poly operator*(const Poly& p, const Poly& q) {
    Poly out(p.n_ - 1);
    for (int a = 0; a < p.n_; ++a) {
      for (int b = 0; b < p.n_; ++b) {
        const Complex pv = p.at(a, b);
        if (pv == Complex(0.0)) continue;
        for (int c = 0; a + c < p.n_; ++c) {
          for (int d = 0; b + d < p.n_; ++d) out.at(a + c, b + d) += pv * q.at(c, d);
        }
      }
    }
    return out;
  }

 private:
  int n_;
  std::vector<Complex> c_;
};

// Site polynomial for T[eps][eta] = <eps|X|eta><eta|Y|eps>, index 0 = +.
Poly site(const ComplexMatrix& x, const ComplexMatrix& y, int degree) {
  Poly p(degree);
  p.at(1, 1) = x(0, 0) * y(0, 0);
  p.at(1, 0) = x(0, 1) * y(1, 0);
  p.at(0, 1) = x(1, 0) * y(0, 1);
  p.at(0, 0) = x(1, 1) * y(1, 1);
  return p;
}

std::vector<Poly> powers(const Poly& p, int m) {
  std::vector<Poly> out;
  out.push_back(Poly::one(p.size() - 1));
  for (int j = 1; j <= m; ++j) out.push_back(out.back() * p);
  return out;
}

// sum_{ab} c_ab 2/(P_a + P_b) with P_a = p+^a p-^(m-a), null pairs dropped.
double contract(const Poly& c, double p_plus, double p_minus, int m) {
  std::vector<double> eig(static_cast<std::size_t>(m + 1));
  double top = 0.0;
  for (int a = 0; a <= m; ++a) {
    eig[static_cast<std::size_t>(a)] = std::pow(p_plus, a) * std::pow(p_minus, m - a);
    top = std::max(top, eig[static_cast<std::size_t>(a)]);
  }
  const double cut = kDefaultNullTolerance * top;
  Complex sum = 0.0;
  double scale = 0.0;
  for (int a = 0; a <= m; ++a) {
    for (int b = 0; b <= m; ++b) {
      const double ea = eig[static_cast<std::size_t>(a)] > cut ? eig[static_cast<std::size_t>(a)] : 0.0;
      const double eb = eig[static_cast<std::size_t>(b)] > cut ? eig[static_cast<std::size_t>(b)] : 0.0;
      if (ea + eb <= 0.0) continue;
      const Complex term = c.at(a, b) * (2.0 / (ea + eb));
      sum += term;
      scale = std::max(scale, std::abs(term));
    }
  }
  if (std::abs(sum.imag()) > 1e-10 * std::max(1.0, scale)) {
    throw Error(ErrorKind::NonRealEntry, "qba_entry_mshot", "imaginary part " + std::to_string(sum.imag()));
  }
  return sum.real();
}

ComplexMatrix in_basis(const MShotContext& ctx, double g0, const Vec3& g) {
  return ctx.basis().adjoint() * bloch_operator(g0, g).matrix() * ctx.basis();
}

void check_offset(const MShotContext& ctx, double lambda, std::string_view op) {
  if (!ctx.model().domain().contains(ctx.theta() + lambda)) {
    throw Error(ErrorKind::OutOfDomain, op, "theta + " + std::to_string(lambda) + " leaves the domain");
  }
}

}  // namespace

MShotContext::MShotContext(const QubitPhaseModel& model, int copies, double theta)
    : model_(model), copies_(copies), theta_(theta) {
  if (copies < 1) throw Error(ErrorKind::InvalidArgument, "MShotContext", "copies must be >= 1");
  if (!model.domain().contains(theta)) {
    throw Error(ErrorKind::OutOfDomain, "MShotContext", "theta = " + std::to_string(theta));
  }
  r_ = model.bloch(theta);
  const double len = r_.norm();
  if (len > 1.0 - kSingularMargin) {
    throw Error(ErrorKind::SingularState, "MShotContext", "|r| = 1: closed forms need a mixed state");
  }
  p_plus_ = 0.5 * (1.0 + len);
  p_minus_ = 0.5 * (1.0 - len);
  const auto dec = spectral_decompose(model.evaluate(theta));
  basis_.resize(2, 2);
  basis_.col(0) = dec.eigenvectors.col(1);
  basis_.col(1) = dec.eigenvectors.col(0);
}

double qba_entry_mshot(const MShotContext& ctx, double lambda_k, double lambda_l) {
  check_offset(ctx, lambda_k, "qba_entry_mshot");
  check_offset(ctx, lambda_l, "qba_entry_mshot");
  const int m = ctx.copies();
  const auto& model = ctx.model();
  const ComplexMatrix ak = in_basis(ctx, 1.0, model.bloch(ctx.theta() + lambda_k));
  const ComplexMatrix al = in_basis(ctx, 1.0, model.bloch(ctx.theta() + lambda_l));
  return contract(powers(site(ak, al, m), m)[static_cast<std::size_t>(m)], ctx.p_plus(), ctx.p_minus(), m);
}

double qba_shifted_entry_mshot(const MShotContext& ctx, double lambda_k, double lambda_l) {
  check_offset(ctx, lambda_k, "qba_shifted_entry_mshot");
  check_offset(ctx, lambda_l, "qba_shifted_entry_mshot");
  const int m = ctx.copies();
  const auto& model = ctx.model();
  const Vec3 r = model.bloch(ctx.theta());
  const Vec3 rk = model.bloch(ctx.theta() + lambda_k);
  const Vec3 rl = model.bloch(ctx.theta() + lambda_l);
  const ComplexMatrix a0 = in_basis(ctx, 1.0, r);
  const ComplexMatrix ak = in_basis(ctx, 1.0, rk);
  const ComplexMatrix al = in_basis(ctx, 1.0, rl);
  const ComplexMatrix dk = in_basis(ctx, 0.0, rk - r);
  const ComplexMatrix dl = in_basis(ctx, 0.0, rl - r);

  // A^(x)m - A0^(x)m = sum_t A0^(x)(t-1) (x) dA (x) A^(x)(m-t). Expanding both
  // factors this way keeps every term second order in the offsets.
  const auto p00 = powers(site(a0, a0, m), m);
  const auto pk0 = powers(site(ak, a0, m), m);
  const auto p0l = powers(site(a0, al, m), m);
  const auto pkl = powers(site(ak, al, m), m);
  const Poly pd0 = site(dk, a0, m);
  const Poly pkd = site(ak, dl, m);
  const Poly p0d = site(a0, dl, m);
  const Poly pdl = site(dk, al, m);
  const Poly pdd = site(dk, dl, m);
  auto pw = [](const std::vector<Poly>& v, int j) { return v[static_cast<std::size_t>(j)]; };

  Poly total(m);
  for (int t = 1; t <= m; ++t) {
    for (int u = 1; u <= m; ++u) {
      if (t < u) {
        total += pw(p00, t - 1) * pd0 * pw(pk0, u - t - 1) * pkd * pw(pkl, m - u);
      } else if (t > u) {
        total += pw(p00, u - 1) * p0d * pw(p0l, t - u - 1) * pdl * pw(pkl, m - t);
      } else {
        total += pw(p00, t - 1) * pdd * pw(pkl, m - t);
      }
    }
  }
  return contract(total, ctx.p_plus(), ctx.p_minus(), m);
}

double qbh11_mshot(const MShotContext& ctx) {
  const auto& model = ctx.model();
  const Vec3 r = model.bloch(ctx.theta());
  const Vec3 dr = model.bloch_derivative(ctx.theta(), 1);
  return ctx.copies() * qubit_q_entry(0.0, dr, 0.0, dr, r);
}

double qh_entry_mshot(const MShotContext& ctx, double lambda_k) {
  check_offset(ctx, lambda_k, "qh_entry_mshot");
  const auto& model = ctx.model();
  const Vec3 r = model.bloch(ctx.theta());
  const Vec3 dr = model.bloch_derivative(ctx.theta(), 1);
  // Tr{Omega(d rho)} = 0, so the shifted observable gives the same entry.
  return ctx.copies() * qubit_q_entry(0.0, model.bloch(ctx.theta() + lambda_k) - r, 0.0, dr, r);
}

double qubit_q_entry(double g0k, const Vec3& gk, double g0l, const Vec3& gl, const Vec3& r) {
  const double r2 = r.squaredNorm();
  if (r2 >= 1.0 - kSingularMargin) {
    throw Error(ErrorKind::SingularState, "qubit_q_entry", "|r| = 1");
  }
  return (g0k - gk.dot(r)) * (g0l - gl.dot(r)) / (1.0 - r2) + gk.dot(gl);
}

}  // namespace qbound
