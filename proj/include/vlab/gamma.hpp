#ifndef VLAB_GAMMA_HPP
#define VLAB_GAMMA_HPP

// Complex log-gamma, overflow-safe gamma products, the elementary Mellin
// pair f_{alpha,beta} and Stirling magnitude estimates.

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "vlab/numeric.hpp"

namespace vlab {

inline constexpr real default_pole_guard = 1e-8;

namespace detail {

// Lanczos g = 7, n = 9.
inline constexpr std::array<real, 9> lanczos_coeffs = {
    0.99999999999980993,     676.5203681218851,      -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,    12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6,  1.5056327351493116e-7};
inline constexpr real lanczos_g = 7.0;

// B_{2n} for n = 1..10.
inline constexpr std::array<real, 10> bernoulli_even = {
    1.0 / 6.0,       -1.0 / 30.0,        1.0 / 42.0,     -1.0 / 30.0,    5.0 / 66.0,
    -691.0 / 2730.0, 7.0 / 6.0,          -3617.0 / 510.0, 43867.0 / 798.0,
    -174611.0 / 330.0};

inline constexpr real shift_threshold = 10.0;
inline constexpr real scheme_switch_imag = 20.0;

}  // namespace detail

// Coefficient C_n = B_{2n} / (2n(2n-1)) of z^{1-2n} in the Stirling series, n = 1..10.
[[nodiscard]] inline real stirling_coefficient(int n) {
  if (n < 1 || n > 10) throw ConfigError("stirling_coefficient: n must be in 1..10");
  return detail::bernoulli_even[n - 1] / (2.0 * n * (2.0 * n - 1.0));
}

// Correction sum  sum_{n=1}^{m} C_n z^{1-2n}.
[[nodiscard]] inline cplx stirling_tail(cplx z, int m = 10) {
  cplx zi = 1.0 / z;
  cplx z2 = zi * zi;
  cplx p = zi;
  cplx acc = 0.0;
  for (int n = 1; n <= m; ++n) {
    acc += stirling_coefficient(n) * p;
    p *= z2;
  }
  return acc;
}

// Stirling series with m correction terms; accurate for large |z| off the negative axis.
[[nodiscard]] inline cplx log_gamma_stirling(cplx z, int m = 10) {
  return (z - 0.5) * std::log(z) - z + 0.5 * log_2pi + stirling_tail(z, m);
}

// Lanczos approximation; intended for Re z >= 1/2.
[[nodiscard]] inline cplx log_gamma_lanczos(cplx z) {
  cplx w = z - 1.0;
  cplx acc = detail::lanczos_coeffs[0];
  for (std::size_t k = 1; k < detail::lanczos_coeffs.size(); ++k)
    acc += detail::lanczos_coeffs[k] / (w + static_cast<real>(k));
  cplx t = w + detail::lanczos_g + 0.5;
  return 0.5 * log_2pi + (w + 0.5) * std::log(t) - t + std::log(acc);
}

// Principal branch of log Gamma on C minus (-inf, 0]. Other arguments with small real
// part are shifted to Re z >= 10 by the recurrence with principal logarithms,
// which stays on the principal branch by analytic continuation.
[[nodiscard]] inline cplx log_gamma(cplx z, real guard = default_pole_guard) {
  long k = 0;
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw RangeError("log_gamma: non-finite argument");
  if (near_nonpositive_integer(z, guard, &k))
    throw PoleError("log_gamma: argument within guard radius of pole at -" + std::to_string(k));
  // Large |z| away from the negative axis: the Stirling series is accurate
  // directly (error below 1e-20 for |z| >= 50, |arg z| <= 0.8 pi).
  if (z.real() < detail::shift_threshold && std::abs(z) >= 50.0 && std::abs(std::arg(z)) <= 0.8 * pi)
    return log_gamma_stirling(z);
  cplx shift_sum = 0.0;
  if (z.real() < detail::shift_threshold) {
    int n = static_cast<int>(std::ceil(detail::shift_threshold - z.real()));
    CompensatedSum<cplx> s;
    for (int j = 0; j < n; ++j) s.add(std::log(z + static_cast<real>(j)));
    shift_sum = s.value();
    z += static_cast<real>(n);
  }
  cplx core = std::abs(z.imag()) > detail::scheme_switch_imag ? log_gamma_stirling(z)
                                                               : log_gamma_lanczos(z);
  return core - shift_sum;
}

[[nodiscard]] inline real log_gamma(real x, real guard = default_pole_guard) {
  return log_gamma(cplx(x, 0.0), guard).real();
}

[[nodiscard]] inline cplx gamma(cplx z, real guard = default_pole_guard) {
  return std::exp(log_gamma(z, guard));
}

// ===========================================================================
// ScaledComplex: mantissa (modulus in [1,2) or zero) times 2^exponent2
// ===========================================================================

class ScaledComplex {
 public:
  ScaledComplex() = default;
  ScaledComplex(cplx mantissa, long exponent2) : m_(mantissa), e_(exponent2) { normalize(); }

  [[nodiscard]] static ScaledComplex from_log(cplx L) {
    if (!std::isfinite(L.real())) {
      if (L.real() < 0) return {};
      throw RangeError("ScaledComplex: infinite magnitude");
    }
    real q = L.real() / std::numbers::ln2;
    real e = std::floor(q);
    real mag = std::exp2(q - e);
    ScaledComplex r;
    r.m_ = std::polar(mag, L.imag());
    r.e_ = static_cast<long>(e);
    r.normalize();
    return r;
  }

  [[nodiscard]] static ScaledComplex from_complex(cplx v) { return ScaledComplex(v, 0); }

  [[nodiscard]] cplx mantissa() const { return m_; }
  [[nodiscard]] long exponent2() const { return e_; }
  [[nodiscard]] bool is_zero() const { return m_ == cplx(0.0, 0.0); }

  [[nodiscard]] real log_abs() const {
    if (is_zero()) return -std::numeric_limits<real>::infinity();
    return std::log(std::abs(m_)) + static_cast<real>(e_) * std::numbers::ln2;
  }
  [[nodiscard]] cplx log() const { return {log_abs(), std::arg(m_)}; }

  // Saturating conversion: overflow is an explicit range error, underflow gives 0.
  [[nodiscard]] cplx to_complex() const {
    if (is_zero()) return 0.0;
    if (e_ > 1023) throw RangeError("ScaledComplex: value exceeds double range");
    if (e_ < -1100) return 0.0;
    int e = static_cast<int>(e_);
    return {std::ldexp(m_.real(), e), std::ldexp(m_.imag(), e)};
  }

  ScaledComplex operator*(const ScaledComplex& o) const { return {m_ * o.m_, e_ + o.e_}; }
  ScaledComplex operator/(const ScaledComplex& o) const {
    if (o.is_zero()) throw RangeError("ScaledComplex: division by zero");
    return {m_ / o.m_, e_ - o.e_};
  }
  ScaledComplex operator*(cplx c) const { return {m_ * c, e_}; }

 private:
  void normalize() {
    real a = std::abs(m_);
    if (a == 0.0 || !std::isfinite(a)) {
      if (!std::isfinite(a)) throw RangeError("ScaledComplex: non-finite mantissa");
      m_ = 0.0;
      e_ = 0;
      return;
    }
    int ex = 0;
    std::frexp(a, &ex);  // a = f * 2^ex with f in [0.5, 1)
    ex -= 1;             // want modulus in [1, 2)
    m_ = {std::ldexp(m_.real(), -ex), std::ldexp(m_.imag(), -ex)};
    e_ += ex;
  }

  cplx m_{0.0, 0.0};
  long e_ = 0;
};

// ===========================================================================
// Gamma signature and products
// ===========================================================================

struct GammaSignature {
  std::vector<real> alphas;
  std::vector<cplx> betas;
  real dprime = 0.0;
  bool relaxed = false;  // true when Re(beta_i) < 0 was explicitly permitted

  [[nodiscard]] static GammaSignature make(std::vector<real> a, std::vector<cplx> b,
                                           bool allow_negative_beta = false) {
    if (a.empty()) throw ConfigError("GammaSignature: r must be >= 1");
    if (a.size() != b.size()) throw ConfigError("GammaSignature: alphas and betas differ in length");
    GammaSignature s;
    CompensatedSum<real> d;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!(a[i] > 0.0) || !std::isfinite(a[i]))
        throw ConfigError("GammaSignature: alpha_" + std::to_string(i) + " must be positive");
      if (b[i].real() < 0.0 && !allow_negative_beta)
        throw ConfigError("GammaSignature: Re(beta_" + std::to_string(i) + ") must be >= 0");
      if (b[i].real() < 0.0) s.relaxed = true;
      d.add(a[i]);
    }
    s.alphas = std::move(a);
    s.betas = std::move(b);
    s.dprime = d.value();
    return s;
  }

  [[nodiscard]] std::size_t r() const { return alphas.size(); }

  [[nodiscard]] GammaSignature conjugate() const {
    GammaSignature c = *this;
    for (auto& b : c.betas) b = std::conj(b);
    return c;
  }

  [[nodiscard]] bool real_betas() const {
    for (auto& b : betas)
      if (b.imag() != 0.0) return false;
    return true;
  }

  // Smallest abscissa strictly right of every Gamma-block pole.
  [[nodiscard]] real rightmost_pole() const {
    real m = -std::numeric_limits<real>::infinity();
    for (std::size_t i = 0; i < r(); ++i) m = std::max(m, -betas[i].real() / alphas[i]);
    return m;
  }
};

// Sum of log Gamma(alpha_i s + beta_i), i ascending.
[[nodiscard]] inline cplx log_gamma_product(const GammaSignature& sig, cplx s,
                                            real guard = default_pole_guard) {
  cplx acc = 0.0;
  for (std::size_t i = 0; i < sig.r(); ++i) {
    cplx z = sig.alphas[i] * s + sig.betas[i];
    try {
      acc += log_gamma(z, guard);
    } catch (const PoleError& e) {
      throw PoleError(std::string("gamma_product factor ") + std::to_string(i) + ": " + e.what(),
                      static_cast<int>(i));
    }
  }
  return acc;
}

[[nodiscard]] inline ScaledComplex gamma_product(const GammaSignature& sig, cplx s,
                                                 real guard = default_pole_guard) {
  return ScaledComplex::from_log(log_gamma_product(sig, s, guard));
}

// f_{alpha,beta}(x) = x^{beta/alpha} exp(-x^{1/alpha}) / alpha, whose Mellin transform is Gamma(alpha s + beta).
[[nodiscard]] inline cplx f_alpha_beta(real alpha, cplx beta, real x, bool* underflow = nullptr) {
  if (!(x > 0.0)) throw ConfigError("f_alpha_beta: x must be positive");
  if (!(alpha > 0.0)) throw ConfigError("f_alpha_beta: alpha must be positive");
  real lx = std::log(x);
  cplx L = -std::exp(lx / alpha) + (beta / alpha) * lx;
  cplx v = std::exp(L) / alpha;
  if (underflow) *underflow = (v == cplx(0.0, 0.0));
  return v;
}

// log of the factorwise Stirling magnitude
//   prod_i sqrt(2 pi) |u_i|^{sigma_i - 1/2} exp(-pi |u_i| / 2),
// u_i = alpha_i t + Im beta_i, sigma_i = alpha_i a + Re beta_i.
// Within a factor 2 of |prod Gamma| whenever every |u_i| >= threshold >= 2(sigma_i^2 + 1).
[[nodiscard]] inline real log_gamma_magnitude_estimate(const GammaSignature& sig, real a, real t,
                                                       real threshold = 10.0) {
  real acc = 0.0;
  for (std::size_t i = 0; i < sig.r(); ++i) {
    real u = std::abs(sig.alphas[i] * t + sig.betas[i].imag());
    if (u < threshold)
      throw ConfigError("gamma_magnitude_estimate: |t| below asymptotic threshold");
    real sigma = sig.alphas[i] * a + sig.betas[i].real();
    acc += 0.5 * log_2pi + (sigma - 0.5) * std::log(u) - 0.5 * pi * u;
  }
  return acc;
}

[[nodiscard]] inline real gamma_magnitude_estimate(const GammaSignature& sig, real a, real t,
                                                   real threshold = 10.0) {
  return std::exp(log_gamma_magnitude_estimate(sig, a, t, threshold));
}

}  // namespace vlab

#endif
