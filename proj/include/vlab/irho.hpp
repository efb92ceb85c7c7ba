#ifndef VLAB_IRHO_HPP
#define VLAB_IRHO_HPP

// The conjugate-side integral of the Riesz identity
//   I(y) = (1/2 pi i) * integral G_rho(s) y^{-s} ds,
//   G_rho(s) = Gamma(delta - s) prod Gamma(alpha_i s + conj beta_i)
//              / [Gamma(1 + delta - s + rho) prod Gamma(alpha_i (delta - s) + beta_i)],
// and its large-y expansion.
//
// On Re s = a the integrand only decays algebraically and oscillates until the
// stationary height t* = (y / prod alpha_i^{2 alpha_i})^{1/(2d')}. For small t*
// the line is followed to beyond t* and bent into rays at 135 degrees. For large
// t* the path leaves the line at a small height, runs through the region right of
// the line where the integrand is exponentially small, enters the saddle from the
// lower right and leaves along the steepest-descent ray. Only the real-axis poles
// lie between these paths and the line.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "vlab/quadrature.hpp"
#include "vlab/series.hpp"

namespace vlab {

struct IRhoOptions {
  int nodes_per_panel = 24;
  real negligible = 45.0;       // panels below max|f| e^{-negligible} are skipped
  real saddle_threshold = 20.0;  // t* above which the saddle path is used
};

class IRhoEvaluator {
 public:
  IRhoEvaluator(const FunctionalEquationData& fe, real rho, real a, IRhoOptions opt = {})
      : delta_(fe.delta), rho_(rho), a_(a), sig_(fe.sig), sigc_(fe.sig_conj), opt_(opt) {
    if (!(rho >= 0.0)) throw ConfigError("I_rho: rho must be >= 0");
    if (!(a > sigc_.rightmost_pole())) throw PoleError("I_rho: line left of a Gamma-block pole");
    real f = a - delta_;
    if (f > -default_pole_guard && std::abs(f - std::round(f)) < 1e-6)
      throw PoleError("I_rho: line passes through a pole of Gamma(delta - s)");
    real need = (2.0 * a - delta_) * sig_.dprime - 1.0;
    if (!(rho > need))
      throw ConfigError("I_rho: decay condition rho > (2a - delta) d' - 1 = " + std::to_string(need) + " violated");
    symmetric_ = sig_.real_betas();
    real c = 0.0;
    for (std::size_t i = 0; i < sig_.r(); ++i) c += sig_.alphas[i] * std::log(sig_.alphas[i]);
    two_alpha_log_alpha_ = 2.0 * c;
    locate_poles();
  }

  // Simple poles s = delta + k of G_rho right of the line that survive the zeros
  // of 1/Gamma(1 + delta - s + rho) and 1/Gamma(alpha_i (delta - s) + beta_i).
  struct RealPole {
    long k = 0;
    real location = 0.0;
    cplx minus_residue{0.0, 0.0};  // -Res G_rho at the pole (without y^{-s})
  };

  [[nodiscard]] const std::vector<RealPole>& poles_right() const { return poles_; }

  // Non-oscillatory part R(y) = sum over poles_right of -Res(G_rho y^{-s}):
  // I(y) - R(y) is the same integral on a line right of those poles.
  [[nodiscard]] cplx nonoscillatory(real y) const {
    CompensatedSum<cplx> acc;
    for (const auto& p : poles_) acc.add(p.minus_residue * std::exp(-p.location * std::log(y)));
    return acc.value();
  }

  // Pole-free interval of the real axis containing the line.
  [[nodiscard]] std::pair<real, real> free_interval() const { return {free_lo_, free_hi_}; }

  // Line used for argument y: the minimiser of |G_rho(sigma) y^{-sigma}| inside the
  // pole-free interval, which keeps the integrand scale close to the result.
  [[nodiscard]] real line_for(real y) const {
    real lo = free_lo_, hi = free_hi_;
    real m = std::min(0.25, 0.25 * (hi - lo));
    lo += m;
    hi -= m;
    if (!(hi > lo)) return a_;
    real ly = std::log(y), best = a_, bv = log_integrand(cplx(a_, 0.0), ly).real();
    const int grid = 48;
    for (int j = 0; j <= grid; ++j) {
      real s = lo + (hi - lo) * j / grid;
      real v = log_integrand(cplx(s, 0.0), ly).real();
      if (v < bv) {
        bv = v;
        best = s;
      }
    }
    return best;
  }

  [[nodiscard]] real stationary_height(real y) const {
    return std::exp((std::log(y) - two_alpha_log_alpha_) / (2.0 * sig_.dprime));
  }

  // log G_rho(s) - s log y; -inf at zeros of G_rho.
  [[nodiscard]] cplx log_integrand(cplx s, real ly) const {
    cplx L = -s * ly;
    try {
      L += log_gamma(delta_ - s, 0.0) - log_gamma(1.0 + delta_ - s + rho_, 0.0);
      L += log_gamma_product(sigc_, s, 0.0);
      for (std::size_t i = 0; i < sig_.r(); ++i) L -= log_gamma(sig_.alphas[i] * (delta_ - s) + sig_.betas[i], 0.0);
    } catch (const PoleError&) {
      return {-std::numeric_limits<real>::infinity(), 0.0};
    }
    return L;
  }

  [[nodiscard]] QuadResult operator()(real y) const {
    if (!(y > 0.0)) throw ConfigError("I_rho: y must be positive");
    real ly = std::log(y);
    real ts = stationary_height(y);
    real a = line_for(y);
    Walker w{*this, ly};
    if (ts < opt_.saddle_threshold) {
      real T = 1.3 * ts + 10.0;
      w.segment(cplx(a, 0.0), cplx(a, T));
      w.ray(cplx(a, T), std::polar(1.0, 0.75 * pi), 0.0);
    } else {
      real h0 = 1.0;
      cplx S(a, ts);
      real D = 0.5 * ts;
      cplx C = S + D * std::polar(1.0, -0.25 * pi);
      w.segment(cplx(a, 0.0), cplx(a, h0));
      w.segment(cplx(a, h0), C);
      w.ray(C, std::polar(1.0, 0.75 * pi), D);
    }
    cplx v;
    if (symmetric_) {
      v = w.up.value().imag() / pi;
    } else {
      v = (w.up.value() - w.down.value()) / (2.0 * pi * I);
    }
    real err = (w.err + w.skipped) / (symmetric_ ? pi : 2.0 * pi);
    return {v, err, w.nodes};
  }

  [[nodiscard]] real rho() const { return rho_; }
  [[nodiscard]] real line() const { return a_; }

 private:
  [[nodiscard]] bool rho_integer() const { return std::abs(rho_ - std::round(rho_)) < 1e-12; }

  // Order of the zero of 1/prod Gamma(alpha_i (delta - s) + beta_i) at s = delta + k.
  [[nodiscard]] int block_zero_order(long k) const {
    int z = 0;
    for (std::size_t i = 0; i < sig_.r(); ++i) {
      cplx w = -sig_.alphas[i] * static_cast<real>(k) + sig_.betas[i];
      if (std::abs(w.imag()) < 1e-12 && w.real() < 1e-12 && std::abs(w.real() - std::round(w.real())) < 1e-12) ++z;
    }
    return z;
  }

  [[nodiscard]] bool is_pole(long k) const {
    if (rho_integer() && k > std::lround(rho_)) return false;
    return block_zero_order(k) == 0;
  }

  void locate_poles() {
    // Poles left of the line bound the pole-free interval from below.
    free_lo_ = sigc_.rightmost_pole();
    for (long k = 0; delta_ + k < a_; ++k)
      if (is_pole(k)) free_lo_ = std::max(free_lo_, delta_ + k);
    free_hi_ = 0.5 * ((rho_ + 1.0) / sig_.dprime + delta_) - 1e-3;  // decay condition
    long k_first = std::max(0L, static_cast<long>(std::ceil(a_ - delta_)));
    // With non-integer rho the poles continue; keep those up to an absolute-convergence margin.
    real cap = std::max(a_, delta_ + std::max(rho_, 0.0)) + 3.0;
    bool first = true;
    for (long k = k_first; delta_ + k <= cap; ++k) {
      if (!is_pole(k)) continue;
      real p = delta_ + k;
      if (first) {
        free_hi_ = std::min(free_hi_, p);
        first = false;
      }
      RealPole rp;
      rp.k = k;
      rp.location = p;
      // -Res Gamma(delta - s) at delta + k is (-1)^k / k!
      cplx L = -log_gamma(static_cast<real>(k + 1)) + log_gamma_product(sigc_, cplx(p, 0.0), 0.0);
      for (std::size_t i = 0; i < sig_.r(); ++i)
        L -= log_gamma(-sig_.alphas[i] * static_cast<real>(k) + sig_.betas[i], 0.0);
      cplx v = std::exp(L) * ((k % 2) ? -1.0 : 1.0);
      real g = 1.0 + rho_ - static_cast<real>(k);  // 1 / Gamma(g), g may be negative
      v /= std::tgamma(g);
      rp.minus_residue = v;
      poles_.push_back(rp);
    }
  }

  // Approximate d/ds of the log integrand (digamma ~ log); sets the local panel width.
  [[nodiscard]] cplx log_derivative(cplx s, real ly) const {
    cplx w = -ly - std::log(delta_ - s + 1.0) + std::log(delta_ - s + 2.0 + rho_);
    for (std::size_t i = 0; i < sig_.r(); ++i) {
      real al = sig_.alphas[i];
      w += al * (std::log(al * s + sigc_.betas[i] + 1.0) + std::log(al * (delta_ - s) + sig_.betas[i] + 1.0));
    }
    return w;
  }

  [[nodiscard]] real pole_distance(cplx s) const {
    real d = std::numeric_limits<real>::infinity();
    real k = std::max(0.0, std::round(s.real() - delta_));
    d = std::min(d, std::abs(s - (delta_ + k)));
    if (k > 0) d = std::min(d, std::abs(s - (delta_ + k - 1.0)));
    for (std::size_t i = 0; i < sigc_.r(); ++i) {
      real al = sigc_.alphas[i];
      cplx b = sigc_.betas[i];
      real j = std::max(0.0, std::round(-(al * s.real() + b.real())));
      d = std::min(d, std::abs(s + (b + j) / al));
    }
    return d;
  }

  struct Walker {
    const IRhoEvaluator& ev;
    real ly;
    CompensatedSum<cplx> up, down;
    real err = 0.0, skipped = 0.0;
    real ref = -std::numeric_limits<real>::infinity();
    std::size_t nodes = 0;

    real width(cplx s) const {
      real cap = std::max(1.0, 0.5 * std::sqrt(std::abs(s) / (2.0 * ev.sig_.dprime)));
      real kappa = (ev.opt_.nodes_per_panel / 2) * 2.0 * pi / 8.0;
      real w = std::min(cap, kappa / (std::abs(ev.log_derivative(s, ly)) + 1e-3));
      return std::min(w, 0.5 * ev.pole_distance(s));
    }

    real logmag(cplx s) const { return ev.log_integrand(s, ly).real(); }

    // Integrate one panel [s0, s1] unless negligible; returns max log|f| at its probes.
    real panel(cplx s0, cplx s1) {
      real m = std::max({logmag(s0), logmag(0.5 * (s0 + s1)), logmag(s1)});
      if (!ev.symmetric_)
        m = std::max({m, logmag(std::conj(s0)), logmag(std::conj(0.5 * (s0 + s1))), logmag(std::conj(s1))});
      ref = std::max(ref, m);
      if (m < ref - ev.opt_.negligible) {
        skipped += std::abs(s1 - s0) * std::exp(m + 10.0);
        return m;
      }
      const GaussRule& full = gauss_legendre(ev.opt_.nodes_per_panel);
      const GaussRule& half = gauss_legendre(ev.opt_.nodes_per_panel / 2);
      cplx c = 0.5 * (s0 + s1), h = 0.5 * (s1 - s0);
      auto rule = [&](const GaussRule& g, bool lower) {
        CompensatedSum<cplx> acc;
        for (std::size_t i = 0; i < g.x.size(); ++i) {
          cplx s = c + h * g.x[i];
          if (lower) {
            acc.add(g.w[i] * std::conj(h) * std::exp(ev.log_integrand(std::conj(s), ly)));
          } else {
            acc.add(g.w[i] * h * std::exp(ev.log_integrand(s, ly)));
          }
        }
        return acc.value();
      };
      cplx vf = rule(full, false), vh = rule(half, false);
      up.add(vf);
      err += std::abs(vf - vh);
      nodes += full.x.size() + half.x.size();
      if (!ev.symmetric_) {
        cplx lf = rule(full, true), lh = rule(half, true);
        down.add(lf);
        err += std::abs(lf - lh);
        nodes += full.x.size() + half.x.size();
      }
      return m;
    }

    void segment(cplx from, cplx to) {
      real len = std::abs(to - from);
      cplx dir = (to - from) / len;
      real pos = 0.0;
      while (pos < len) {
        cplx s = from + pos * dir;
        real w = width(s);
        real next = std::min(len, pos + w);
        if (len - next < 0.25 * w) next = len;
        panel(s, from + next * dir);
        pos = next;
      }
    }

    // Ray from start in direction dir; after distance `past` the integrand is
    // decreasing and the walk stops once panels are negligible.
    void ray(cplx start, cplx dir, real past) {
      real pos = 0.0;
      for (int it = 0; it < 1000000; ++it) {
        cplx s = start + pos * dir;
        real w = width(s);
        real m = panel(s, s + w * dir);
        pos += w;
        if (pos > past && m < ref - ev.opt_.negligible &&
            (ev.log_derivative(start + pos * dir, ly) * dir).real() < 0.0)
          return;
      }
      throw ConvergenceError("I_rho: ray did not decay");
    }
  };

  real delta_, rho_, a_;
  GammaSignature sig_, sigc_;
  IRhoOptions opt_;
  bool symmetric_ = true;
  real two_alpha_log_alpha_ = 0.0;
  std::vector<RealPole> poles_;
  real free_lo_ = 0.0, free_hi_ = 0.0;
};

[[nodiscard]] inline QuadResult i_rho_quadrature(const FunctionalEquationData& fe, real rho, real a, real y,
                                                 const IRhoOptions& opt = {}) {
  return IRhoEvaluator(fe, rho, a, opt)(y);
}

// ---------------------------------------------------------------------------
// Large-y expansion of y^{rho + delta} I(y)
// ---------------------------------------------------------------------------

struct AsymptoticConstants {
  real nu = 0.0;       // sum Im beta_i
  real omega_p = 0.0;  // d' delta + (2d' - 1) rho
  real h = 1.0;
  cplx mu{0.0, 0.0};
  real gamma = 0.0;
  cplx k{0.0, 0.0};
  real dprime = 1.0;
  cplx A0{0.0, 0.0};
};

[[nodiscard]] inline AsymptoticConstants asymptotic_constants(const FunctionalEquationData& fe, real rho) {
  const auto& sg = fe.sig;
  AsymptoticConstants c;
  real d = sg.dprime;
  c.dprime = d;
  real sal = 0.0;
  cplx kl = 0.0;
  c.mu = 0.5;
  for (std::size_t i = 0; i < sg.r(); ++i) {
    real al = sg.alphas[i];
    c.nu += sg.betas[i].imag();
    sal += 2.0 * al * std::log(al);
    c.mu += sg.betas[i] - 0.5;
    kl -= (al * fe.delta + 2.0 * I * sg.betas[i].imag()) * std::log(al);
  }
  c.omega_p = d * fe.delta + (2.0 * d - 1.0) * rho;
  c.h = std::exp(sal - 2.0 * d * std::log(2.0 * d));
  c.gamma = -(0.5 * fe.delta + rho / (2.0 * d) + 1.0 / (4.0 * d));
  c.k = std::sqrt(2.0 * pi) * std::exp((-2.0 * d * c.gamma + 2.0 * I * c.nu + 0.5) * std::log(2.0 * d) + kl);
  c.A0 = c.k / (2.0 * pi * d) * std::exp((2.0 * I * c.nu / (2.0 * d) - c.gamma) * std::log(c.h));
  return c;
}

struct AsymptoticTerm {
  int n = 0;
  cplx A{0.0, 0.0};
  cplx exponent{0.0, 0.0};
  cplx phase{0.0, 0.0};
  cplx value{0.0, 0.0};
};

struct AsymptoticFit {
  cplx A1{0.0, 0.0}, A2{0.0, 0.0};
  real rms_residual = 0.0;
  real y_lo = 50.0, y_hi = 400.0;
};

struct AsymptoticResult {
  cplx value{0.0, 0.0};
  std::vector<AsymptoticTerm> terms;
};

inline constexpr int asymptotic_m_max = 2;

namespace detail {

inline AsymptoticTerm asymptotic_term(const AsymptoticConstants& c, int n, cplx A, real y) {
  AsymptoticTerm t;
  t.n = n;
  t.A = A;
  t.exponent = (c.omega_p - n - 2.0 * I * c.nu - 0.5) / (2.0 * c.dprime);
  t.phase = pi * (c.dprime * c.gamma + 0.5 * n + I * c.nu - c.mu);
  real freq = std::pow(y / c.h, 1.0 / (2.0 * c.dprime));
  t.value = A * std::exp(t.exponent * std::log(y)) * std::cos(freq + t.phase);
  return t;
}

}  // namespace detail

// Expansion up to order m of the oscillatory part y^{rho+delta} (I(y) - R(y)), with R
// the non-oscillatory residue terms; A_1, A_2 come from a fit.
[[nodiscard]] inline AsymptoticResult i_rho_asymptotic(const FunctionalEquationData& fe, real rho, real y, int m,
                                                       const AsymptoticFit* fit = nullptr,
                                                       real threshold = 1.0) {
  if (!(y >= threshold)) throw ConfigError("i_rho_asymptotic: y below the asymptotic threshold");
  if (m < 0 || m > asymptotic_m_max) throw ConfigError("i_rho_asymptotic: m out of range");
  if (m >= 1 && !fit) throw ConfigError("i_rho_asymptotic: A_n for n >= 1 need a calibration fit");
  auto c = asymptotic_constants(fe, rho);
  AsymptoticResult r;
  cplx A[3] = {c.A0, fit ? fit->A1 : 0.0, fit ? fit->A2 : 0.0};
  CompensatedSum<cplx> acc;
  for (int n = 0; n <= m; ++n) {
    r.terms.push_back(detail::asymptotic_term(c, n, A[n], y));
    acc.add(r.terms.back().value);
  }
  r.value = acc.value();
  return r;
}

// Least-squares fit of A_1, A_2 to the oscillatory part minus the leading term on [y_lo, y_hi].
[[nodiscard]] inline AsymptoticFit fit_asymptotic_coefficients(const FunctionalEquationData& fe, real rho, real a,
                                                               real y_lo = 50.0, real y_hi = 400.0,
                                                               int samples = 96) {
  IRhoEvaluator ev(fe, rho, a);
  auto c = asymptotic_constants(fe, rho);
  // normal equations for min sum |r - A1 p1 - A2 p2|^2
  cplx m11 = 0, m12 = 0, m22 = 0, v1 = 0, v2 = 0;
  std::vector<std::array<cplx, 3>> rows;
  for (int j = 0; j < samples; ++j) {
    real y = y_lo + (y_hi - y_lo) * j / (samples - 1);
    cplx q = std::exp((rho + fe.delta) * std::log(y)) * (ev(y).value - ev.nonoscillatory(y));
    cplx r = q - detail::asymptotic_term(c, 0, c.A0, y).value;
    cplx p1 = detail::asymptotic_term(c, 1, 1.0, y).value;
    cplx p2 = detail::asymptotic_term(c, 2, 1.0, y).value;
    rows.push_back({r, p1, p2});
    m11 += std::conj(p1) * p1;
    m12 += std::conj(p1) * p2;
    m22 += std::conj(p2) * p2;
    v1 += std::conj(p1) * r;
    v2 += std::conj(p2) * r;
  }
  cplx det = m11 * m22 - m12 * std::conj(m12);
  if (std::abs(det) < 1e-300) throw ConvergenceError("fit_asymptotic_coefficients: singular normal equations");
  AsymptoticFit f;
  f.A1 = (m22 * v1 - m12 * v2) / det;
  f.A2 = (m11 * v2 - std::conj(m12) * v1) / det;
  real ss = 0.0;
  for (auto& row : rows) ss += std::norm(row[0] - f.A1 * row[1] - f.A2 * row[2]);
  f.rms_residual = std::sqrt(ss / samples);
  f.y_lo = y_lo;
  f.y_hi = y_hi;
  return f;
}

// Error of the m-term expansion against the quadrature oscillatory part over one period
// starting at y: max |expansion - quadrature| / max |quadrature|.
[[nodiscard]] inline real asymptotic_window_error(const FunctionalEquationData& fe, real rho, real a, real y, int m,
                                                  const AsymptoticFit* fit = nullptr, int samples = 32) {
  IRhoEvaluator ev(fe, rho, a);
  auto c = asymptotic_constants(fe, rho);
  real freq = std::pow(y / c.h, 1.0 / (2.0 * c.dprime));
  real period = 2.0 * pi * 2.0 * c.dprime * y / freq;
  real num = 0.0, den = 0.0;
  for (int j = 0; j < samples; ++j) {
    real yj = y + period * j / samples;
    cplx q = std::exp((rho + fe.delta) * std::log(yj)) * (ev(yj).value - ev.nonoscillatory(yj));
    cplx e = i_rho_asymptotic(fe, rho, yj, m, fit).value;
    num = std::max(num, std::abs(e - q));
    den = std::max(den, std::abs(q));
  }
  return num / den;
}

}  // namespace vlab

#endif
