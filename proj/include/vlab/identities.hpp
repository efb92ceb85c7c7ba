#ifndef VLAB_IDENTITIES_HPP
#define VLAB_IDENTITIES_HPP

// Both sides of the modular relation, the auxiliary modular relation and the
// Riesz-sum identity; Perron evaluation of Riesz sums; reconstruction of the
// completed function from kernel sums.

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "vlab/irho.hpp"
#include "vlab/kernels.hpp"
#include "vlab/residues.hpp"

namespace vlab {

enum class IdentityTag { modular, riesz, aux_modular, functional_eq };

[[nodiscard]] inline std::string to_string(IdentityTag t) {
  switch (t) {
    case IdentityTag::modular: return "modular";
    case IdentityTag::riesz: return "riesz";
    case IdentityTag::aux_modular: return "aux_modular";
    case IdentityTag::functional_eq: return "functional_eq";
  }
  return "?";
}

[[nodiscard]] inline IdentityTag identity_tag_from_string(const std::string& s) {
  if (s == "modular") return IdentityTag::modular;
  if (s == "riesz") return IdentityTag::riesz;
  if (s == "aux_modular" || s == "aux") return IdentityTag::aux_modular;
  if (s == "functional_eq" || s == "fe") return IdentityTag::functional_eq;
  throw ConfigError("unknown identity tag: " + s);
}

struct IdentityReport {
  IdentityTag identity = IdentityTag::modular;
  real x = 0.0;            // evaluation point for modular, aux and riesz
  cplx s{0.0, 0.0};        // evaluation point for functional_eq
  real rho = 0.0;
  real a = 0.0;            // contour abscissa used
  cplx lhs{0.0, 0.0};
  cplx rhs{0.0, 0.0};
  real residual = 0.0;     // |lhs - rhs|
  real tol = 0.0;          // requested tolerance
  real tol_abs = 0.0;      // absolute threshold the residual is compared with
  long terms_lhs = 0;
  long terms_rhs = 0;
  real truncation_estimate = 0.0;
  bool passed = false;
  bool genuine_failure = false;  // estimate < tol/2 yet residual > tol

  bool operator==(const IdentityReport&) const = default;
};

namespace detail {

inline void finalize(IdentityReport& r) {
  r.residual = std::abs(r.lhs - r.rhs);
  r.passed = r.residual <= r.tol_abs;
  r.genuine_failure = r.truncation_estimate < 0.5 * r.tol_abs && r.residual > r.tol_abs;
}

inline std::string signature_key(const GammaSignature& sig) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < sig.alphas.size(); ++i) os << sig.alphas[i] << ',' << sig.betas[i] << ';';
  return os.str();
}

inline bool real_coefficients(const ArithmeticSeriesPair& sp) {
  for (long n = 1; n <= sp.n_max(); ++n)
    if (sp.a(n).imag() != 0.0 || sp.b(n).imag() != 0.0) return false;
  return true;
}

}  // namespace detail

// Decay bounds are calibrated once per (signature, kernel).
[[nodiscard]] inline DecayBound cached_decay_bound(const GammaSignature& sig, const KernelKind& kind) {
  static std::mutex mu;
  static std::map<std::string, DecayBound> cache;
  std::string key = to_string(kind.variant) + ":" + detail::signature_key(sig);
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  DecayBound b = calibrate_decay_bound(sig, kind);
  std::lock_guard<std::mutex> lock(mu);
  cache.emplace(key, b);
  return b;
}

// Smallest abscissa right of every abscissa of absolute convergence, margin 1/4.
[[nodiscard]] inline real default_identity_abscissa(const FunctionalEquationData& fe) {
  return std::max({0.0, fe.sigma_a, fe.sigma_b}) + 0.25;
}

struct TruncatedSum {
  cplx value{0.0, 0.0};
  real error = 0.0;  // quadrature error of the included kernels
  long terms = 0;
  real tail = 0.0;   // bound on the omitted terms
};

// sum_n c_n K(l_n * scale) for K = Z or Y, truncated where the decay-bound tail
// over the generated range drops below tol/4; kernels to tol/(4 sum |c_n|).
template <class Coef, class Ladder>
[[nodiscard]] TruncatedSum decaying_kernel_sum(const KernelKind& kind, const GammaSignature& sig, Coef coef,
                                               Ladder ladder, long n_max, real scale, real tol) {
  DecayBound B = cached_decay_bound(sig, kind);
  std::vector<real> bound(n_max + 2, 0.0);
  long need = 0;
  for (long n = 1; n <= n_max; ++n) {
    real xi = ladder(n) * scale;
    if (xi < 1.0) {
      need = n;
      bound[n] = std::numeric_limits<real>::infinity();
    } else {
      bound[n] = std::abs(coef(n)) * B(xi);
    }
  }
  if (!(bound[n_max] < 1e-3 * tol))
    throw RangeError("kernel sum: truncation infeasible within the generated range (n_max = " +
                     std::to_string(n_max) + ")");
  std::vector<real> tail(n_max + 1, 0.0);
  for (long n = n_max - 1; n >= 0; --n) tail[n] = tail[n + 1] + bound[n + 1];
  long N = std::max(need, 1L);
  while (N < n_max && !(tail[N] < 0.25 * tol)) ++N;
  real mass = 0.0;
  for (long n = 1; n <= N; ++n) mass += std::abs(coef(n));
  KernelBank bank(kind, sig, 0.25 * tol / std::max(mass, 1e-300));
  TruncatedSum out;
  CompensatedSum<cplx> acc;
  for (long n = 1; n <= N; ++n) {
    cplx c = coef(n);
    if (c == cplx(0.0, 0.0)) continue;
    KernelValue kv = bank(ladder(n) * scale);
    acc.add(c * kv.value);
    out.error += std::abs(c) * kv.error;
  }
  out.value = acc.value();
  out.terms = N;
  out.tail = tail[N];
  return out;
}

// ===========================================================================
// Modular relation
// ===========================================================================

// sum a_n Z(lambda_n x) = P(x) + omega (xQ)^{-delta} sum conj(b_n) Zbar(mu_n / (Q^2 x)).
// a_P is the strip parameter of the residual function (default: two units past
// the identity abscissa; candidate poles that do not survive are discarded).
[[nodiscard]] inline IdentityReport modular_report(const FunctionalEquationData& fe, real x, real tol,
                                                   std::optional<real> a_P = {}) {
  if (!(x > 0.0)) throw ConfigError("modular_report: x must be positive");
  if (!(tol > 0.0)) throw ConfigError("modular_report: tol must be positive");
  IdentityReport r;
  r.identity = IdentityTag::modular;
  r.x = x;
  r.a = a_P.value_or(default_identity_abscissa(fe) + 2.0);
  r.tol = tol;
  r.tol_abs = tol;
  const auto& sp = fe.series;
  auto lhs = decaying_kernel_sum(
      KernelKind::Z(), fe.sig, [&](long n) { return sp.a(n); }, [&](long n) { return sp.lambda(n); }, sp.n_max(),
      x, 0.5 * tol);
  cplx pref = fe.omega * std::exp(-fe.delta * std::log(x * fe.bigQ));
  real ap = std::abs(pref);
  auto rhs = decaying_kernel_sum(
      KernelKind::Z(), fe.sig_conj, [&](long n) { return std::conj(sp.b(n)); }, [&](long n) { return sp.mu(n); },
      sp.n_max(), 1.0 / (fe.bigQ * fe.bigQ * x), 0.5 * tol / ap);
  cplx P = residual_P(fe, x, r.a);
  r.lhs = lhs.value;
  r.rhs = P + pref * rhs.value;
  r.terms_lhs = lhs.terms;
  r.terms_rhs = rhs.terms;
  r.truncation_estimate = lhs.tail + lhs.error + ap * (rhs.tail + rhs.error);
  detail::finalize(r);
  return r;
}

// ===========================================================================
// Auxiliary modular relation
// ===========================================================================

// Line of the X kernel and of P_1. Left of delta when the conjugate series still
// converges absolutely there; otherwise past delta, between two poles of Gamma(delta - s).
[[nodiscard]] inline real aux_abscissa(const FunctionalEquationData& fe) {
  if (fe.sigma_b + 0.5 < fe.delta) return std::max(fe.sigma_b, 0.0) + 0.25;
  real k = std::max(0.0, std::ceil(fe.sigma_b + 2.5 - fe.delta));
  return fe.delta + k + 0.5;
}

// sum a_n Y(lambda_n x) = P_1(x) + omega (xQ)^{-delta} sum conj(b_n) X(mu_n / (Q^2 x)).
[[nodiscard]] inline IdentityReport aux_modular_report(const FunctionalEquationData& fe, real x, real tol,
                                                       std::optional<real> a = {}) {
  if (!(x > 0.0)) throw ConfigError("aux_modular_report: x must be positive");
  if (!(tol > 0.0)) throw ConfigError("aux_modular_report: tol must be positive");
  IdentityReport r;
  r.identity = IdentityTag::aux_modular;
  r.x = x;
  r.a = a.value_or(aux_abscissa(fe));
  r.tol = tol;
  r.tol_abs = tol;
  if (!(r.a > fe.sigma_b)) throw ConfigError("aux_modular_report: line must lie right of sigma_b");
  const auto& sp = fe.series;
  auto lhs = decaying_kernel_sum(
      KernelKind::Y(), fe.sig, [&](long n) { return sp.a(n); }, [&](long n) { return sp.lambda(n); }, sp.n_max(),
      x, 0.5 * tol);
  cplx pref = fe.omega * std::exp(-fe.delta * std::log(x * fe.bigQ));
  real ap = std::abs(pref);

  // X(xi) on Re s = a decays like xi^{-p}; the next pole of Gamma(delta - s) sets the constant.
  real shift = r.a > fe.delta ? std::ceil(r.a - fe.delta) : 0.0;
  real p = fe.delta + shift;
  real C = std::exp(log_gamma_product(fe.sig_conj, cplx(p, 0.0), 0.0).real() - std::lgamma(shift + 1.0));
  real scale = 1.0 / (fe.bigQ * fe.bigQ * x);
  long n_max = sp.n_max();
  std::vector<real> tail(n_max + 1, 0.0);
  for (long n = n_max - 1; n >= 0; --n)
    tail[n] = tail[n + 1] + 2.0 * C * std::abs(sp.b(n + 1)) * std::pow(sp.mu(n + 1) * scale, -p);
  real rtol = 0.5 * tol / ap;
  if (!(2.0 * C * std::abs(sp.b(n_max)) * std::pow(sp.mu(n_max) * scale, -p) < 1e-3 * rtol))
    throw RangeError("aux_modular_report: X-side truncation infeasible within the generated range");
  long N = 1;
  while (N < n_max && !(tail[N] < 0.25 * rtol)) ++N;
  real mass = 0.0;
  for (long n = 1; n <= N; ++n) mass += std::abs(sp.b(n));
  KernelBank bank(KernelKind::X(fe.delta), fe.sig_conj, 0.25 * rtol / std::max(mass, 1e-300), r.a);
  CompensatedSum<cplx> acc;
  real err = 0.0;
  for (long n = 1; n <= N; ++n) {
    cplx c = std::conj(sp.b(n));
    if (c == cplx(0.0, 0.0)) continue;
    KernelValue kv = bank(sp.mu(n) * scale);
    acc.add(c * kv.value);
    err += std::abs(c) * kv.error;
  }
  cplx P1 = residual_P1(fe, x, r.a);
  r.lhs = lhs.value;
  r.rhs = P1 + pref * acc.value();
  r.terms_lhs = lhs.terms;
  r.terms_rhs = N;
  r.truncation_estimate = lhs.tail + lhs.error + ap * (tail[N] + err);
  detail::finalize(r);
  return r;
}

// ===========================================================================
// Riesz sums
// ===========================================================================

// (1/Gamma(rho+1)) sum' a_n (x - lambda_n)^rho; the boundary term has weight 1/2 when rho = 0.
[[nodiscard]] inline cplx riesz_lhs_direct(const FunctionalEquationData& fe, real x, real rho) {
  if (!(x > 0.0)) throw ConfigError("riesz_lhs_direct: x must be positive");
  if (!(rho >= 0.0)) throw ConfigError("riesz_lhs_direct: rho must be >= 0");
  const auto& sp = fe.series;
  if (sp.lambda(sp.n_max()) <= x) throw RangeError("riesz_lhs_direct: x beyond the generated ladder");
  CompensatedSum<cplx> acc;
  for (long n = 1; n <= sp.n_max() && sp.lambda(n) <= x; ++n) {
    real d = x - sp.lambda(n);
    if (d == 0.0) {
      if (rho == 0.0) acc.add(0.5 * sp.a(n));
      continue;
    }
    acc.add(sp.a(n) * (rho == 0.0 ? 1.0 : std::pow(d, rho)));
  }
  return acc.value() / std::tgamma(rho + 1.0);
}

// Perron integral (1/2 pi i) int phi(s) Gamma(s) x^{s+rho} / Gamma(s+rho+1) ds on Re s = a.
// |t| <= T uses the continuation of phi when available. Beyond T each Dirichlet
// term is integrated on its own ray, bent towards the side where (x/lambda_n)^s
// decays. Without a continuation every term is integrated separately; terms with
// lambda_n > x vanish identically (the contour closes to the right).
struct PerronOptions {
  std::optional<real> a;     // default max(0, sigma_a) + 1.5
  real T = 300.0;
  int nodes_per_panel = 24;
  real term_floor = 1e-18;   // per-term bound below which a ray is not integrated
};

class PerronEvaluator {
 public:
  PerronEvaluator(const FunctionalEquationData& fe, real rho, const PerronOptions& opt = {})
      : fe_(fe), rho_(rho), opt_(opt) {
    if (!(rho >= 1.0)) throw ConfigError("riesz_lhs_perron: rho >= 1 required for absolute convergence");
    a_ = opt.a.value_or(std::max(0.0, fe.sigma_a) + 1.5);
    if (!(a_ > std::max(0.0, fe.sigma_a))) throw ConfigError("riesz_lhs_perron: a must exceed max(0, sigma_a)");
    if (!(opt.T > 1.0)) throw ConfigError("riesz_lhs_perron: T must exceed 1");
    symmetric_ = detail::real_coefficients(fe.series);
    real d = fe.sig.dprime;
    real omega = 10.0 + 2.0 * d * std::log(opt.T / (2.0 * pi) + 1.0) + 2.0;
    int half = opt.nodes_per_panel / 2;
    real w_cap = half * 2.0 * pi / (8.0 * omega);
    auto edges = geometric_edges(opt.T, std::min(w_cap, 0.5 * a_), 1.5, w_cap);
    path_ = vertical_path(a_, edges, opt.nodes_per_panel, symmetric_);
    auto tab = [&](const std::vector<cplx>& nodes, std::vector<cplx>& out) {
      out.reserve(nodes.size());
      for (auto z : nodes) out.push_back(fe_.phi ? fe_.phi(z) * kernel(z) : kernel(z));
    };
    tab(path_.s, vf_);
    tab(path_.s_half, vh_);
    log_kT_ = -(rho_ + 1.0) * std::log(std::hypot(a_, opt_.T));
    // Shared ray panels: geometric widths keep every term resolved up to its own
    // cut-off, since the width at distance r is about 0.15 r.
    real r = 0.0, w = 0.05;
    ray_edges_.push_back(0.0);
    while (r < ray_max) {
      r += w;
      w *= 1.15;
      ray_edges_.push_back(r);
    }
    const GaussRule& full = gauss_legendre(opt_.nodes_per_panel);
    const GaussRule& hr = gauss_legendre(half);
    cplx top(a_, opt_.T);
    for (int side = 0; side < 2; ++side) {
      cplx dir = std::polar(1.0, side == 0 ? 0.75 * pi : 0.25 * pi);
      auto& R = rays_[side];
      for (std::size_t k = 0; k + 1 < ray_edges_.size(); ++k) {
        real c = 0.5 * (ray_edges_[k] + ray_edges_[k + 1]), h = 0.5 * (ray_edges_[k + 1] - ray_edges_[k]);
        for (std::size_t i = 0; i < full.x.size(); ++i) {
          cplx z = top + (c + h * full.x[i]) * dir;
          R.s.push_back(z);
          R.w.push_back(full.w[i] * h * dir * kernel(z));
        }
        for (std::size_t i = 0; i < hr.x.size(); ++i) {
          cplx z = top + (c + h * hr.x[i]) * dir;
          R.s_half.push_back(z);
          R.w_half.push_back(hr.w[i] * h * dir * kernel(z));
        }
      }
    }
  }

  [[nodiscard]] real line() const { return a_; }

  [[nodiscard]] QuadResult operator()(real x) const {
    if (!(x > 0.0)) throw ConfigError("riesz_lhs_perron: x must be positive");
    const auto& sp = fe_.series;
    real lx = std::log(x);
    if (!fe_.phi && sp.lambda(sp.n_max()) <= x) throw RangeError("riesz_lhs_perron: x beyond the generated ladder");
    CompensatedSum<cplx> acc;
    real err = 0.0;
    if (fe_.phi) {
      auto q = vertical(lx, 0.0);
      acc.add(q.value);
      err += q.error;
    }
    // tails, and without phi whole terms; terms past the ladder are bounded only
    for (long n = 1; n <= sp.n_max(); ++n) {
      real ln = sp.lambda(n);
      if (!fe_.phi && ln >= x) break;
      real lr = lx - std::log(ln);
      if (lr == 0.0) throw ConfigError("riesz_lhs_perron: x on the ladder; use riesz_lhs_direct");
      cplx c = sp.a(n);
      if (c == cplx(0.0, 0.0)) continue;
      real rate = std::abs(lr) / std::sqrt(2.0);
      real bound = std::abs(c) * std::exp(a_ * lr + rho_ * lx + log_kT_) / (pi * rate);
      if (fe_.phi && bound < opt_.term_floor) {
        err += bound;
        continue;
      }
      if (!fe_.phi) {
        auto q = vertical(lx, std::log(ln));
        acc.add(c * q.value);
        err += std::abs(c) * q.error;
      }
      real L = std::log(std::max(bound, opt_.term_floor) / opt_.term_floor) / rate + 1.0 / rate;
      auto q = ray(lr, rho_ * lx, std::min(L, ray_max));
      acc.add(c * q.value);
      err += std::abs(c) * q.error;
    }
    return {acc.value(), err, path_.s.size()};
  }

 private:
  static constexpr real ray_max = 1e5;

  cplx kernel(cplx z) const { return std::exp(log_gamma(z) - log_gamma(z + rho_ + 1.0)); }

  // Vertical part: tabulated values times x^rho (x/lambda)^s; lambda = 1 when phi is used.
  QuadResult vertical(real lx, real ll) const {
    std::vector<cplx> fv(vf_.size()), fh(vh_.size());
    for (std::size_t j = 0; j < fv.size(); ++j) fv[j] = vf_[j] * std::exp(path_.s[j] * (lx - ll) + rho_ * lx);
    for (std::size_t j = 0; j < fh.size(); ++j) fh[j] = vh_[j] * std::exp(path_.s_half[j] * (lx - ll) + rho_ * lx);
    return reduce_path(path_, fv, fh);
  }

  // (1/2 pi i) over |t| > T of K(s) e^{s lr + c0} along rays bent to the decaying
  // side, cut at length L. K is real on the real axis, so the lower ray reuses
  // the upper tabulation by conjugation.
  QuadResult ray(real lr, real c0, real L) const {
    const auto& R = rays_[lr > 0 ? 0 : 1];
    std::size_t per = static_cast<std::size_t>(opt_.nodes_per_panel), per_h = per / 2;
    CompensatedSum<cplx> up, up_h, down, down_h;
    for (std::size_t k = 0; k + 1 < ray_edges_.size() && ray_edges_[k] < L; ++k) {
      for (std::size_t i = k * per; i < (k + 1) * per; ++i) {
        up.add(R.w[i] * std::exp(R.s[i] * lr + c0));
        if (!symmetric_) down.add(std::conj(R.w[i]) * std::exp(std::conj(R.s[i]) * lr + c0));
      }
      for (std::size_t i = k * per_h; i < (k + 1) * per_h; ++i) {
        up_h.add(R.w_half[i] * std::exp(R.s_half[i] * lr + c0));
        if (!symmetric_) down_h.add(std::conj(R.w_half[i]) * std::exp(std::conj(R.s_half[i]) * lr + c0));
      }
    }
    QuadResult q;
    if (symmetric_) {
      q.value = up.value().imag() / pi;
      q.error = std::abs(up.value().imag() - up_h.value().imag()) / pi;
    } else {
      q.value = (up.value() - down.value()) / (2.0 * pi * I);
      q.error = std::abs((up.value() - down.value()) - (up_h.value() - down_h.value())) / (2.0 * pi);
    }
    return q;
  }

  struct RayTable {
    std::vector<cplx> s, w, s_half, w_half;  // weights include ds and the kernel
  };

  const FunctionalEquationData& fe_;
  real rho_;
  PerronOptions opt_;
  real a_ = 2.0;
  real log_kT_ = 0.0;
  bool symmetric_ = true;
  PathRule path_;
  std::vector<cplx> vf_, vh_;
  std::vector<real> ray_edges_;
  RayTable rays_[2];  // 0: towards the left (lambda < x), 1: towards the right
};

[[nodiscard]] inline QuadResult riesz_lhs_perron(const FunctionalEquationData& fe, real x, real rho,
                                                 const PerronOptions& opt = {}) {
  return PerronEvaluator(fe, rho, opt)(x);
}

// Right side of the Riesz identity
//   Q_rho(x) + omega x^{delta+rho} Q^{-delta} sum conj(b_n) I(mu_n x / Q^2).
// The residues of the I-integrand at real poles right of the line give terms
// c_p y^{-p}; their sum over n is taken in closed form through the dual series
// (sum conj(b_n) mu_n^{-p} = conj psi(p)) when its continuation is available, so
// the remaining series is purely oscillatory.
struct RieszOptions {
  long n_cap = 2000;
  long n_min = 16;
  IRhoOptions irho;
};

struct RieszRhs {
  cplx value{0.0, 0.0};
  cplx residual_part{0.0, 0.0};     // Q_rho(x)
  cplx closed_form_part{0.0, 0.0};  // summed non-oscillatory terms
  cplx series_part{0.0, 0.0};
  long terms = 0;
  real truncation_estimate = 0.0;
  bool capped = false;
};

[[nodiscard]] inline real riesz_rho_floor(const FunctionalEquationData& fe) {
  return (2.0 * fe.sigma_b - fe.delta) * fe.sig.dprime - 0.5;
}

[[nodiscard]] inline RieszRhs riesz_rhs(const FunctionalEquationData& fe, real x, real rho, real a, real tol_abs,
                                        const RieszOptions& opt = {}) {
  if (!(x > 0.0)) throw ConfigError("riesz_rhs: x must be positive");
  if (!(rho > riesz_rho_floor(fe)))
    throw ConfigError("riesz identity requires rho > " + std::to_string(riesz_rho_floor(fe)));
  IRhoEvaluator ev(fe, rho, a, opt.irho);
  const auto& sp = fe.series;
  RieszRhs out;
  out.residual_part = residual_Q_rho(fe, x, rho, a);
  real Q2 = fe.bigQ * fe.bigQ;
  cplx pref = fe.omega * std::exp((fe.delta + rho) * std::log(x) - fe.delta * std::log(fe.bigQ));
  real ap = std::abs(pref);
  bool split = fe.psi && !ev.poles_right().empty();
  if (split) {
    CompensatedSum<cplx> acc;
    for (const auto& p : ev.poles_right())
      acc.add(p.minus_residue * std::exp(-p.location * std::log(x / Q2)) * std::conj(fe.psi(cplx(p.location, 0.0))));
    out.closed_form_part = pref * acc.value();
  }
  auto c = asymptotic_constants(fe, rho);
  real env_pow = (c.omega_p - 0.5) / (2.0 * c.dprime) - rho - fe.delta;
  real absA0 = std::abs(c.A0);
  real d2 = 2.0 * c.dprime;
  long cap = std::min(opt.n_cap, sp.n_max());
  std::vector<cplx> partial;
  CompensatedSum<cplx> acc;
  real qerr = 0.0;
  long N = 0;
  for (long n = 1; n <= cap; ++n) {
    real y = sp.mu(n) * x / Q2;
    cplx b = std::conj(sp.b(n));
    N = n;
    if (b != cplx(0.0, 0.0)) {
      QuadResult q = ev(y);
      cplx v = split ? q.value - ev.nonoscillatory(y) : q.value;
      acc.add(b * v);
      qerr += std::abs(b) * q.error;
    }
    partial.push_back(acc.value());
    // tail of an oscillating series: amplitude over the phase increment per term,
    // with |b_n| replaced by its largest value over [n/2, n]
    real bmax = 0.0;
    for (long m = std::max(1L, n / 2); m <= n; ++m) bmax = std::max(bmax, std::abs(sp.b(m)));
    real phase_step = std::exp(std::log(y / c.h) / d2) / (d2 * n);
    real env = ap * bmax * absA0 * std::exp(env_pow * std::log(y)) / std::min(1.0, phase_step);
    if (n >= opt.n_min && env < 0.125 * tol_abs) break;
  }
  out.capped = (N == cap);
  out.series_part = pref * acc.value();
  out.terms = N;
  real spread = 0.0;
  for (long n = N / 2; n < N; ++n) spread = std::max(spread, std::abs(partial[n - 1] - partial[N - 1]));
  out.truncation_estimate = ap * (spread + qerr);
  out.value = out.residual_part + out.closed_form_part + out.series_part;
  return out;
}

// tol is relative to max(1, |lhs|).
[[nodiscard]] inline IdentityReport riesz_report(const FunctionalEquationData& fe, real x, real rho,
                                                 std::optional<real> a, real tol, const RieszOptions& opt = {}) {
  if (!(tol > 0.0)) throw ConfigError("riesz_report: tol must be positive");
  IdentityReport r;
  r.identity = IdentityTag::riesz;
  r.x = x;
  r.rho = rho;
  r.a = a.value_or(default_identity_abscissa(fe));
  r.tol = tol;
  r.lhs = riesz_lhs_direct(fe, x, rho);
  r.tol_abs = tol * std::max(1.0, std::abs(r.lhs));
  RieszRhs rhs = riesz_rhs(fe, x, rho, r.a, r.tol_abs, opt);
  r.rhs = rhs.value;
  long nl = 0;
  while (nl < fe.series.n_max() && fe.series.lambda(nl + 1) <= x) ++nl;
  r.terms_lhs = nl;
  r.terms_rhs = rhs.terms;
  r.truncation_estimate = rhs.truncation_estimate;
  detail::finalize(r);
  return r;
}

// ===========================================================================
// Reconstruction of the completed function
// ===========================================================================

// Q^s F(s) = Q^s [ int_0^c P(x) x^{s-1} dx + int_c^inf Phi(x) x^{s-1} dx
//                  + int_{1/c}^inf Psi(u) u^{-s-1} du ],
// Phi(x) = sum a_n Z(lambda_n x), Psi(u) = omega Q^{-delta} u^delta sum conj(b_n) Zbar(mu_n u / Q^2).
// The P piece is integrated term by term in closed form.
struct Reconstruction {
  cplx value{0.0, 0.0};
  real error = 0.0;
  long terms = 0;
};

namespace detail {

// int_0^c x^{w-1} (log x)^m dx = c^w sum_j C(m,j) (log c)^{m-j} (-1)^j j! / w^{j+1}
inline cplx monomial_mellin(cplx w, int m, real c) {
  if (std::abs(w) < 1e-12) throw PoleError("reconstruction: s hits an exponent of the residual function");
  real lc = std::log(c);
  cplx acc = 0.0;
  real binom = 1.0, fact = 1.0;
  for (int j = 0; j <= m; ++j) {
    if (j > 0) {
      binom *= static_cast<real>(m - j + 1) / j;
      fact *= j;
    }
    real sign = (j % 2) ? -1.0 : 1.0;
    acc += binom * std::pow(lc, m - j) * sign * fact / std::pow(w, j + 1);
  }
  return std::exp(w * lc) * acc;
}

// int_{lo}^inf g(x) x^{e} dx where g decays at least like the kernel bound.
template <class G>
inline QuadResult half_line(G&& g, cplx e, real lo, real tol) {
  const GaussRule& full = gauss_legendre(24);
  const GaussRule& half = gauss_legendre(12);
  CompensatedSum<cplx> acc;
  real err = 0.0;
  real x0 = lo, peak = 0.0;
  std::size_t nodes = 0;
  for (int it = 0; it < 100000; ++it) {
    real w = 0.25 * std::max(1.0, x0 / 4.0);
    real c = x0 + 0.5 * w, h = 0.5 * w;
    CompensatedSum<cplx> pf, ph;
    real mx = 0.0;
    for (std::size_t i = 0; i < full.x.size(); ++i) {
      real x = c + h * full.x[i];
      cplx v = g(x) * std::exp(e * std::log(x));
      mx = std::max(mx, std::abs(v));
      pf.add(full.w[i] * v);
    }
    for (std::size_t i = 0; i < half.x.size(); ++i) {
      real x = c + h * half.x[i];
      ph.add(half.w[i] * g(x) * std::exp(e * std::log(x)));
    }
    cplx vf = pf.value() * h, vh = ph.value() * h;
    acc.add(vf);
    err += std::abs(vf - vh);
    nodes += full.x.size() + half.x.size();
    peak = std::max(peak, mx);
    x0 += w;
    if (mx * w < 1e-3 * tol && mx <= 1e-12 * peak) break;
    if (!std::isfinite(x0) || !std::isfinite(mx)) throw ConvergenceError("reconstruction: integrand does not decay");
  }
  return {acc.value(), err, nodes};
}

}  // namespace detail

[[nodiscard]] inline Reconstruction reconstruct_completed_function(const FunctionalEquationData& fe, cplx s,
                                                                   real split = 1.0, real tol = 1e-10) {
  if (!(split > 0.0)) throw ConfigError("reconstruction: split must be positive");
  const auto& sp = fe.series;
  Reconstruction out;
  // P piece
  auto P = residual_terms(fe, default_identity_abscissa(fe) + 2.0, ResidualKind::P);
  cplx mp = 0.0;
  for (const auto& t : P.terms) mp += t.coefficient * detail::monomial_mellin(s + t.exponent, t.logpower, split);
  // Phi piece
  DecayBound Bz = cached_decay_bound(fe.sig, KernelKind::Z());
  DecayBound Bc = cached_decay_bound(fe.sig_conj, KernelKind::Z());
  KernelBank bank(KernelKind::Z(), fe.sig, 1e-3 * tol);
  real psi_scale = std::exp(-fe.delta * std::log(fe.bigQ)) * std::max(1.0, std::exp(-fe.delta * std::log(split)));
  KernelBank bank_c(KernelKind::Z(), fe.sig_conj, 1e-3 * tol / psi_scale);
  long used = 0;
  auto series_at = [&](KernelBank& kb, const DecayBound& B, auto coef, auto ladder, real scale, real weight) {
    CompensatedSum<cplx> acc;
    real tail_tol = 1e-3 * tol / weight;
    for (long n = 1; n <= sp.n_max(); ++n) {
      real xi = ladder(n) * scale;
      cplx c = coef(n);
      if (xi >= 1.0) {
        // remaining terms: n times the largest coefficient in [n, 2n] times the bound
        real bx = B(xi);
        real cmax = 0.0;
        for (long m = n; m <= std::min(2 * n, sp.n_max()); ++m) cmax = std::max(cmax, std::abs(coef(m)));
        if (n * cmax * bx < tail_tol) {
          used = std::max(used, n);
          break;
        }
        if (std::abs(c) * bx < 1e-6 * tail_tol) continue;
      }
      if (c != cplx(0.0, 0.0)) acc.add(c * kb(xi).value);
    }
    return acc.value();
  };
  auto phi_fn = [&](real x) {
    return series_at(bank, Bz, [&](long n) { return sp.a(n); }, [&](long n) { return sp.lambda(n); }, x, 1.0);
  };
  real Q2 = fe.bigQ * fe.bigQ;
  cplx psi_pref = fe.omega * std::exp(-fe.delta * std::log(fe.bigQ));
  auto psi_fn = [&](real u) {
    cplx w = psi_pref * std::exp(fe.delta * std::log(u));
    return w * series_at(bank_c, Bc, [&](long n) { return std::conj(sp.b(n)); }, [&](long n) { return sp.mu(n); },
                         u / Q2, std::abs(w));
  };
  auto q1 = detail::half_line(phi_fn, s - 1.0, split, tol);
  auto q2 = detail::half_line(psi_fn, -s - 1.0, 1.0 / split, tol);
  cplx Qs = std::exp(s * std::log(fe.bigQ));
  out.value = Qs * (mp + q1.value + q2.value);
  out.error = std::abs(Qs) * (q1.error + q2.error);
  out.terms = used;
  return out;
}

// Q^s phi(s) prod Gamma(alpha_i s + beta_i) from the continuation of the series.
[[nodiscard]] inline cplx completed_function_direct(const FunctionalEquationData& fe, cplx s) {
  if (!fe.phi) throw ConfigError("direct evaluation needs the continuation of the series");
  return std::exp(s * std::log(fe.bigQ) + log_gamma_product(fe.sig, s)) * fe.phi(s);
}

// Q^s F(s) against omega Q^{delta-s} conj(G(delta - conj s)), both sides reconstructed.
[[nodiscard]] inline IdentityReport functional_equation_report(const FunctionalEquationData& fe, cplx s, real tol,
                                                               real split = 1.0) {
  if (!(tol > 0.0)) throw ConfigError("functional_equation_report: tol must be positive");
  IdentityReport r;
  r.identity = IdentityTag::functional_eq;
  r.s = s;
  r.tol = tol;
  r.tol_abs = tol;
  auto L = reconstruct_completed_function(fe, s, split, 1e-3 * tol);
  FunctionalEquationData d = fe.dual();
  auto R = reconstruct_completed_function(d, fe.delta - std::conj(s), split, 1e-3 * tol);
  r.lhs = L.value;
  r.rhs = fe.omega * std::conj(R.value);
  r.terms_lhs = L.terms;
  r.terms_rhs = R.terms;
  r.truncation_estimate = L.error + R.error;
  detail::finalize(r);
  return r;
}

}  // namespace vlab

#endif
