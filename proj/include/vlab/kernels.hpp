#ifndef VLAB_KERNELS_HPP
#define VLAB_KERNELS_HPP

// Inverse-Mellin kernels Z, Y, X on vertical lines, the nested-integral oracle
// for Y, calibrated decay bounds and the Gamma-cosine line transform.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vlab/gamma.hpp"
#include "vlab/path.hpp"

namespace vlab {

enum class KernelVariant { Z, Y, X };

struct KernelKind {
  KernelVariant variant = KernelVariant::Z;
  real delta = 0.0;  // used by X only

  [[nodiscard]] static KernelKind Z() { return {KernelVariant::Z, 0.0}; }
  [[nodiscard]] static KernelKind Y() { return {KernelVariant::Y, 0.0}; }
  [[nodiscard]] static KernelKind X(real delta) {
    if (!(delta > 0.0)) throw ConfigError("KernelKind X requires delta > 0");
    return {KernelVariant::X, delta};
  }
};

[[nodiscard]] inline std::string to_string(KernelVariant v) {
  switch (v) {
    case KernelVariant::Z: return "Z";
    case KernelVariant::Y: return "Y";
    case KernelVariant::X: return "X";
  }
  return "?";
}

struct ContourSpec {
  real a = 1.0;
  real t_max = 30.0;
  int panels = 1;
  int nodes_per_panel = 24;
  real tol = 1e-12;
  real first_width = 0.5;  // geometric panel layout on [0, t_max]
  real max_width = 1.0;
  real growth = 1.5;

  [[nodiscard]] std::vector<real> edges() const {
    return geometric_edges(t_max, first_width, growth, max_width);
  }
};

struct KernelValue {
  cplx value{0.0, 0.0};
  real error = 0.0;
};

namespace detail {

// Signature whose factorwise magnitudes match the full kernel integrand on the line Re s = a.
inline GammaSignature effective_signature(const KernelKind& kind, const GammaSignature& sig, real a) {
  std::vector<real> al = sig.alphas;
  std::vector<cplx> be = sig.betas;
  if (kind.variant == KernelVariant::Y) {
    al.push_back(1.0);
    be.push_back(0.0);
  } else if (kind.variant == KernelVariant::X) {
    // |Gamma(delta - a - it)| = |Gamma(1*a + (delta - 2a) + it)|
    al.push_back(1.0);
    be.push_back(kind.delta - 2.0 * a);
  }
  return GammaSignature::make(std::move(al), std::move(be), true);
}

inline void validate_line(const KernelKind& kind, const GammaSignature& sig, real a) {
  if (!(a > 0.0)) throw ConfigError("kernel contour requires a > 0");
  for (std::size_t i = 0; i < sig.r(); ++i)
    if (!(sig.alphas[i] * a + sig.betas[i].real() > 0.0))
      throw PoleError("kernel contour: line passes left of a Gamma-block pole", static_cast<int>(i));
  if (kind.variant == KernelVariant::X) {
    real d = a - kind.delta;
    if (d >= -default_pole_guard) {
      real k = std::round(d);
      if (std::abs(d - k) < 1e-6)
        throw PoleError("kernel contour: line hits a pole of Gamma(delta - s)");
    }
  }
}

// Distance in t from the line to the nearest pole of the integrand.
inline real pole_distance(const KernelKind& kind, const GammaSignature& sig, real a) {
  real d = 1e300;
  for (std::size_t i = 0; i < sig.r(); ++i)
    d = std::min(d, (sig.alphas[i] * a + sig.betas[i].real()) / sig.alphas[i]);
  if (kind.variant == KernelVariant::Y) d = std::min(d, a);
  if (kind.variant == KernelVariant::X) {
    real f = a - kind.delta;
    d = std::min(d, f < 0 ? -f : std::min(f - std::floor(f), std::ceil(f) - f));
  }
  return d;
}

inline cplx kernel_log_integrand(const KernelKind& kind, const GammaSignature& sig, cplx s) {
  cplx L = log_gamma_product(sig, s);
  if (kind.variant == KernelVariant::Y) L += log_gamma(s);
  if (kind.variant == KernelVariant::X) L += log_gamma(kind.delta - s);
  return L;
}

// d/d|t| of -log|integrand| at s = a + it: sum of alpha_i |arg(alpha_i s + beta_i)|.
inline real decay_rate(const KernelKind& kind, const GammaSignature& sig, real a, real t) {
  cplx s(a, t);
  real r = 0.0;
  for (std::size_t i = 0; i < sig.r(); ++i)
    r += sig.alphas[i] * std::abs(std::arg(sig.alphas[i] * s + sig.betas[i]));
  if (kind.variant == KernelVariant::Y) r += std::abs(std::arg(s));
  if (kind.variant == KernelVariant::X) r += std::abs(std::arg(kind.delta - s));
  return r;
}

// Bound on (1/2 pi) * integral_{|t| > T} |integrand| dt for the x-free integrand.
// log|Gamma(sigma + it)| is concave in t, so the tail from T is at most
// |f(T)| / rate(T).
inline real tail_bound(const KernelKind& kind, const GammaSignature& sig, real a, real T) {
  real total = 0.0;
  for (real t : {T, -T}) {
    real rate = decay_rate(kind, sig, a, t);
    if (rate <= 1e-3) return 1e300;
    real lm = kernel_log_integrand(kind, sig, cplx(a, t)).real();
    total += std::exp(lm) / rate;
  }
  return 2.0 * total / (2.0 * pi);
}

// Abscissa near the saddle of |integrand| x^{-a}, so large arguments do not
// suffer cancellation; solves sum alpha_i log(alpha_i a + Re beta_i) [+ log a] = log x.
inline real saddle_abscissa(const KernelKind& kind, const GammaSignature& sig, real x) {
  auto g = [&](real a) {
    real v = 0.0;
    for (std::size_t i = 0; i < sig.r(); ++i)
      v += sig.alphas[i] * std::log(sig.alphas[i] * a + sig.betas[i].real());
    if (kind.variant == KernelVariant::Y) v += std::log(a);
    return v - std::log(x);
  };
  real lo = 1e-6, hi = 1.0;
  for (std::size_t i = 0; i < sig.r(); ++i)
    lo = std::max(lo, (1e-6 - sig.betas[i].real()) / sig.alphas[i]);
  hi = std::max(hi, lo + 1.0);
  while (g(hi) < 0) hi *= 2.0;
  if (g(lo) > 0) return lo;
  for (int it = 0; it < 100; ++it) {
    real m = 0.5 * (lo + hi);
    (g(m) < 0 ? lo : hi) = m;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

// Default abscissa: keeps every Gamma argument's real part near 1 while a > 0
// (and a < delta for X when the block allows it).
[[nodiscard]] inline real default_abscissa(const KernelKind& kind, const GammaSignature& sig) {
  real a = 0.5;
  for (std::size_t i = 0; i < sig.r(); ++i)
    a = std::max(a, (1.0 - sig.betas[i].real()) / sig.alphas[i]);
  if (kind.variant == KernelVariant::Y) a = std::max(a, 1.0);
  if (kind.variant == KernelVariant::X) {
    real lo = std::max(0.0, sig.rightmost_pole());
    if (a >= kind.delta) a = 0.5 * (lo + kind.delta);
  }
  return a;
}

// Pick t_max from the Stirling tail (< tol/4) and panel widths giving at least
// 8 half-rule nodes per period of x^{-it} for |log x| <= log_x_max.
[[nodiscard]] inline ContourSpec choose_truncation(const GammaSignature& sig, const KernelKind& kind,
                                                   real a, real tol, real log_x_max = 7.0,
                                                   int nodes_per_panel = 24) {
  if (!(tol > 0.0)) throw ConfigError("choose_truncation: tol must be positive");
  detail::validate_line(kind, sig, a);
  real T = 1.0;
  while (detail::tail_bound(kind, sig, a, T) >= 0.25 * tol) {
    T += std::max(0.25, 0.05 * T);
    if (T > 1e5) throw ConvergenceError("choose_truncation: tail bound does not fall below tol");
  }
  GammaSignature eff = detail::effective_signature(kind, sig, a);
  ContourSpec c;
  c.a = a;
  c.t_max = T;
  c.tol = tol;
  c.nodes_per_panel = nodes_per_panel;
  real omega = std::abs(log_x_max) + 1.0;
  for (std::size_t i = 0; i < eff.r(); ++i)
    omega += eff.alphas[i] * std::abs(std::log(eff.alphas[i] * T + std::abs(eff.betas[i]) + 1.0));
  int half = std::max(1, nodes_per_panel / 2);
  c.max_width = half * 2.0 * pi / (8.0 * omega);
  c.first_width = std::min(c.max_width, detail::pole_distance(kind, sig, a));
  c.growth = 1.5;
  c.panels = static_cast<int>(c.edges().size()) - 1;
  std::size_t need = static_cast<std::size_t>(c.panels) * (nodes_per_panel + half) * 2;
  if (need > node_budget())
    throw ConfigError("choose_truncation: node budget exceeded (" + std::to_string(need) + " nodes)");
  return c;
}

// Kernel sums share one node set: the x-free integrand is tabulated once and
// each argument costs one complex exponential per node.
class KernelEvaluator {
 public:
  KernelEvaluator(const KernelKind& kind, const GammaSignature& sig, const ContourSpec& c)
      : kind_(kind), sig_(sig), contour_(c) {
    detail::validate_line(kind, sig, c.a);
    symmetric_ = sig.real_betas();
    path_ = vertical_path(c.a, c.edges(), c.nodes_per_panel, symmetric_);
    lf_.reserve(path_.s.size());
    for (auto s : path_.s) lf_.push_back(detail::kernel_log_integrand(kind, sig, s));
    for (auto s : path_.s_half) lh_.push_back(detail::kernel_log_integrand(kind, sig, s));
    tail_ = detail::tail_bound(kind, sig, c.a, c.t_max);
  }

  [[nodiscard]] KernelValue operator()(real x) const {
    if (!(x > 0.0)) throw ConfigError("kernel argument must be positive");
    real lx = std::log(x);
    std::vector<cplx> fv(lf_.size()), fh(lh_.size());
    for (std::size_t j = 0; j < lf_.size(); ++j) fv[j] = std::exp(lf_[j] - path_.s[j] * lx);
    for (std::size_t j = 0; j < lh_.size(); ++j) fh[j] = std::exp(lh_[j] - path_.s_half[j] * lx);
    QuadResult q = reduce_path(path_, fv, fh);
    real scale = std::exp(-contour_.a * lx);
    cplx v = q.value;
    if (symmetric_) v = cplx(v.real(), 0.0);
    return {v, std::max(q.error, tail_ * scale)};
  }

  [[nodiscard]] real tail_bound() const { return tail_; }
  [[nodiscard]] const ContourSpec& contour() const { return contour_; }
  [[nodiscard]] std::size_t nodes() const { return path_.s.size() + path_.s_half.size(); }

 private:
  KernelKind kind_;
  GammaSignature sig_;
  ContourSpec contour_;
  bool symmetric_ = true;
  PathRule path_;
  std::vector<cplx> lf_, lh_;
  real tail_ = 0.0;
};

[[nodiscard]] inline KernelValue eval_kernel(const KernelKind& kind, const GammaSignature& sig, real x,
                                             const ContourSpec& contour) {
  if (detail::tail_bound(kind, sig, contour.a, contour.t_max) > contour.tol)
    throw ConvergenceError("eval_kernel: t_max too small for the requested tolerance");
  return KernelEvaluator(kind, sig, contour)(x);
}

// Convenience: absolute tolerance tol on the kernel value at x.
[[nodiscard]] inline KernelValue eval_kernel(const KernelKind& kind, const GammaSignature& sig, real x,
                                             real tol = 1e-13) {
  real a = default_abscissa(kind, sig);
  if (kind.variant != KernelVariant::X && x > 1.0) a = std::max(a, detail::saddle_abscissa(kind, sig, x));
  real rel = std::clamp(std::exp(std::log(tol) + a * std::log(x)), 1e-300, 1e-3);
  ContourSpec c = choose_truncation(sig, kind, a, rel, std::abs(std::log(x)) + 1.0);
  return eval_kernel(kind, sig, x, c);
}

// Kernel values over a wide argument range. Arguments are grouped in
// half-octave bands; each band gets its own line (near the saddle for Z and Y,
// so large arguments avoid cancellation) and node set. X keeps one line because
// the kernel depends on it.
class KernelBank {
 public:
  KernelBank(const KernelKind& kind, const GammaSignature& sig, real tol_abs, std::optional<real> line = {})
      : kind_(kind), sig_(sig), tol_(tol_abs), line_(line) {
    if (!(tol_abs > 0.0)) throw ConfigError("KernelBank: tolerance must be positive");
    if (kind.variant == KernelVariant::X && !line) line_ = default_abscissa(kind, sig);
  }

  [[nodiscard]] KernelValue operator()(real x) {
    if (!(x > 0.0)) throw ConfigError("kernel argument must be positive");
    int band = static_cast<int>(std::floor(2.0 * std::log2(x)));
    auto it = bank_.find(band);
    if (it == bank_.end()) it = bank_.emplace(band, make(band)).first;
    return it->second(x);
  }

  [[nodiscard]] std::size_t bands() const { return bank_.size(); }

 private:
  KernelEvaluator make(int band) const {
    real lo = std::exp2(0.5 * band), hi = std::exp2(0.5 * (band + 1));
    real a;
    if (line_) {
      a = *line_;
    } else {
      a = default_abscissa(kind_, sig_);
      if (lo > 1.0) a = std::max(a, detail::saddle_abscissa(kind_, sig_, std::sqrt(lo * hi)));
    }
    real rel = std::clamp(std::exp(std::log(tol_) + a * std::log(lo)), 1e-300, 1e-3);
    real lxm = std::max(std::abs(std::log(lo)), std::abs(std::log(hi))) + 1.0;
    return KernelEvaluator(kind_, sig_, choose_truncation(sig_, kind_, a, rel, lxm));
  }

  KernelKind kind_;
  GammaSignature sig_;
  real tol_;
  std::optional<real> line_;
  std::map<int, KernelEvaluator> bank_;
};

// ===========================================================================
// Nested-integral oracle for Y (at most three factors)
// ===========================================================================

namespace detail {

// integral over v in R of g(v) by the trapezoid rule, walking outward from the
// peak until terms stay negligible.
inline cplx trapezoid_line(const std::function<cplx(real)>& g, real center, real h, real tol) {
  CompensatedSum<cplx> acc;
  cplx g0 = g(center);
  acc.add(g0);
  real peak = std::abs(g0);
  for (int dir : {1, -1}) {
    int quiet = 0;
    for (int k = 1; k < 200000; ++k) {
      cplx v = g(center + dir * k * h);
      acc.add(v);
      peak = std::max(peak, std::abs(v));
      if (std::abs(v) < tol * 1e-3 * std::max(peak, 1e-300) || std::abs(v) < 1e-300)
        ++quiet;
      else
        quiet = 0;
      if (quiet >= 8) break;
    }
  }
  return acc.value() * h;
}

inline cplx nested_level(const GammaSignature& sig, std::size_t level, real x, real h, real tol) {
  // level 0: exp(-x)
  if (level == 0) return std::exp(-x);
  real al = sig.alphas[level - 1];
  cplx be = sig.betas[level - 1];
  auto g = [&](real v) -> cplx {
    real u = std::exp(v);
    cplx f = f_alpha_beta(al, be, u);
    if (f == cplx(0.0, 0.0)) return 0.0;
    return f * nested_level(sig, level - 1, x / u, h, tol);
  };
  // centre near the balance point of exp(-u^{1/alpha}) and the inner decay
  real center = std::min(0.0, al * std::log(1.0 + std::log1p(x)));
  return trapezoid_line(g, center, h, tol);
}

}  // namespace detail

[[nodiscard]] inline cplx eval_kernel_nested(const GammaSignature& sig, real x, real inner_tol = 1e-12) {
  if (sig.r() > 3) throw ConfigError("eval_kernel_nested: dimension limit r <= 3 exceeded");
  if (!(x > 0.0)) throw ConfigError("eval_kernel_nested: x must be positive");
  real amin = *std::min_element(sig.alphas.begin(), sig.alphas.end());
  // trapezoid error ~ exp(-2 pi d / h) with analyticity half-width d = (pi/2) min(alpha, 1)
  real d = 0.5 * pi * std::min(amin, 1.0);
  real h = 2.0 * pi * d / (std::log(1.0 / inner_tol) + 10.0);
  h = std::min(h, 0.1);
  return detail::nested_level(sig, sig.r(), x, h, inner_tol);
}

// ===========================================================================
// Decay bound C exp(-c x^{1/D})
// ===========================================================================

struct DecayBound {
  real C = 0.0;
  real c = 0.0;
  real D = 1.0;
  [[nodiscard]] real operator()(real x) const { return C * std::exp(-c * std::pow(x, 1.0 / D)); }
};

// Fit from the kernel at x0 = 4^{d'} and 2 x0, prefactor 1.5x, then lower c if
// needed so the bound dominates on a validation grid over [1, 64 x0], cut where
// the kernel underflows.
[[nodiscard]] inline DecayBound calibrate_decay_bound(const GammaSignature& sig, const KernelKind& kind) {
  if (kind.variant == KernelVariant::X) throw ConfigError("kernel_decay_bound: only Z and Y kernels");
  DecayBound b;
  b.D = kind.variant == KernelVariant::Z ? sig.dprime : 1.0 + sig.dprime;
  real x0 = std::pow(4.0, sig.dprime);
  real k0 = std::abs(eval_kernel(kind, sig, x0, 1e-14 * std::exp(-std::pow(x0, 1.0 / b.D))).value);
  real k1 = std::abs(eval_kernel(kind, sig, 2.0 * x0, 1e-14 * std::exp(-std::pow(2.0 * x0, 1.0 / b.D))).value);
  if (!(k0 > 0.0) || !(k1 > 0.0) || !std::isfinite(std::log(k0 / k1)))
    throw ConvergenceError("kernel_decay_bound: calibration points underflow");
  real p0 = std::pow(x0, 1.0 / b.D), p1 = std::pow(2.0 * x0, 1.0 / b.D);
  b.c = std::log(k0 / k1) / (p1 - p0);
  b.C = 1.5 * k0 * std::exp(b.c * p0);
  const int grid = 24;
  // stop before the kernel underflows
  real x_hi = std::min(64.0 * x0, std::pow(600.0, b.D));
  for (int k = 0; k < grid; ++k) {
    real x = std::exp(std::log(x_hi) * k / (grid - 1));
    real kv = std::abs(eval_kernel(kind, sig, x, 1e-14 * std::exp(-std::pow(x, 1.0 / b.D))).value);
    if (!(kv > 0.0)) continue;
    real px = std::pow(x, 1.0 / b.D);
    real cmax = (std::log(b.C) - std::log(kv) - 1e-9) / px;  // strict margin against rounding
    if (cmax < b.c) b.c = cmax;
  }
  if (b.c < 0.0) b.c = 0.0;
  return b;
}

[[nodiscard]] inline real kernel_decay_bound(const GammaSignature& sig, const KernelKind& kind, real x) {
  if (!(x >= 1.0)) throw ConfigError("kernel_decay_bound: x must be >= 1");
  return calibrate_decay_bound(sig, kind)(x);
}

// ===========================================================================
// Gamma-cosine line transform on Re s = c < -1/2
// ===========================================================================

namespace detail {

inline cplx log_cos(cplx w) {
  if (w.imag() >= 0.0) return -I * w + std::log(0.5 * (1.0 + std::exp(2.0 * I * w)));
  return I * w + std::log(0.5 * (1.0 + std::exp(-2.0 * I * w)));
}

}  // namespace detail

[[nodiscard]] inline KernelValue gamma_cos_calibration(real c, real angle, real x) {
  if (!(c < -0.5)) throw ConfigError("gamma_cos_calibration: c must be < -1/2");
  if (std::abs(c - std::round(c)) < 1e-9) throw ConfigError("gamma_cos_calibration: c must not be an integer");
  if (!(x > 0.0)) throw ConfigError("gamma_cos_calibration: x must be positive");
  real lx = std::log(x);
  real T = 3.0 * x + 12.0;
  real omega = std::abs(lx) + std::log(T + 2.0) + 2.0;
  real w = std::min(0.5, 12.0 * 2.0 * pi / (8.0 * omega));
  real dpole = std::abs(c - std::round(c));
  std::vector<real> edges = geometric_edges(T, std::min(w, dpole), 1.5, w);
  PathRule p = vertical_path(c, edges, 24, true);
  // decay rate along the ray is about 0.7 log(T/x)
  real rate = 0.7 * std::log(T / x);
  real len = 60.0 / std::max(rate, 0.1);
  append_rays(p, c, T, std::polar(1.0, 0.75 * pi), geometric_edges(len, 0.5, 1.3, 2.0), 24);
  auto f = [&](cplx s) {
    return std::exp(log_gamma(s) + detail::log_cos(0.5 * pi * s + angle) - s * lx);
  };
  QuadResult q = apply_path(p, f);
  return {cplx(q.value.real(), 0.0), q.error};
}

// Elementary right-hand side of the Gamma-cosine transform.
[[nodiscard]] inline real gamma_cos_closed_form(real c, real angle, real x) {
  real v = std::cos(x + angle);
  real term = 1.0;  // x^n / n!
  for (int n = 0; n < -c; ++n) {
    if (n > 0) term *= x / n;
    v -= ((n % 2) ? -1.0 : 1.0) * term * std::cos(angle - 0.5 * pi * n);
  }
  return v;
}

}  // namespace vlab

#endif
