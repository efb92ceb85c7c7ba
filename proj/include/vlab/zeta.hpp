#ifndef VLAB_ZETA_HPP
#define VLAB_ZETA_HPP

// Riemann zeta, Hurwitz zeta and the Dirichlet beta function on the complex
// plane. Alternating series with Borwein acceleration near the real axis,
// Euler-Maclaurin summation everywhere else.

#include <array>
#include <cmath>

#include "vlab/gamma.hpp"

namespace vlab {

namespace detail {

// Borwein weights d_k for the n-term accelerated alternating sum.
template <int N>
struct BorweinWeights {
  std::array<real, N + 1> d{};
  BorweinWeights() {
    real term = 1.0 / N;  // n (n+k-1)! 4^k / ((n-k)! (2k)!) at k = 0
    real acc = 0.0;
    for (int k = 0; k <= N; ++k) {
      if (k > 0) term *= static_cast<real>(N + k - 1) * 4.0 * (N - k + 1) / ((2.0 * k - 1.0) * (2.0 * k));
      acc += N * term;
      d[k] = acc;
    }
  }
};

inline constexpr int borwein_terms = 48;

inline const BorweinWeights<borwein_terms>& borwein() {
  static const BorweinWeights<borwein_terms> w;
  return w;
}

// sum_{k>=0} (-1)^k (c k + c0)^{-s}, accelerated.
inline cplx alternating_sum(cplx s, real c, real c0) {
  const auto& d = borwein().d;
  constexpr int n = borwein_terms;
  CompensatedSum<cplx> acc;
  for (int k = 0; k < n; ++k) {
    real sign = (k % 2) ? -1.0 : 1.0;
    acc.add(sign * (d[k] - d[n]) * std::exp(-s * std::log(c * k + c0)));
  }
  return -acc.value() / d[n];
}

inline bool borwein_region(cplx s) { return std::abs(s.imag()) <= 5.0 && s.real() >= -0.5; }

}  // namespace detail

// Hurwitz zeta(s, q) for q > 0, s != 1, by Euler-Maclaurin with N >= |s| + 20.
[[nodiscard]] inline cplx hurwitz_zeta(cplx s, real q) {
  if (!(q > 0.0)) throw ConfigError("hurwitz_zeta: q must be positive");
  if (std::abs(s - 1.0) < default_pole_guard) throw PoleError("hurwitz_zeta: pole at s = 1");
  const int K = 10;
  int N = static_cast<int>(std::ceil(std::abs(s) + 20.0));
  CompensatedSum<cplx> acc;
  for (int k = 0; k < N; ++k) acc.add(std::exp(-s * std::log(q + k)));
  real qn = q + N;
  real lq = std::log(qn);
  cplx pw = std::exp(-s * lq);  // (q+N)^{-s}
  acc.add(pw * qn / (s - 1.0));
  acc.add(0.5 * pw);
  // B_{2j}/(2j)! * s(s+1)...(s+2j-2) * (q+N)^{-s-2j+1}
  cplx rising = s;
  cplx p = pw / qn;
  real fact = 2.0;
  for (int j = 1; j <= K; ++j) {
    acc.add(detail::bernoulli_even[j - 1] / fact * rising * p);
    rising *= (s + (2.0 * j - 1.0)) * (s + 2.0 * j);
    p /= qn * qn;
    fact *= (2.0 * j + 1.0) * (2.0 * j + 2.0);
  }
  return acc.value();
}

[[nodiscard]] inline cplx zeta_euler_maclaurin(cplx s) { return hurwitz_zeta(s, 1.0); }

// zeta via the accelerated eta series; valid in the Borwein region away from s = 1.
[[nodiscard]] inline cplx zeta_alternating(cplx s) {
  if (std::abs(s - 1.0) < default_pole_guard) throw PoleError("zeta: pole at s = 1");
  cplx eta = detail::alternating_sum(s, 1.0, 1.0);
  return eta / (1.0 - std::exp((1.0 - s) * std::log(2.0)));
}

[[nodiscard]] inline cplx zeta(cplx s) {
  if (detail::borwein_region(s) && std::abs(s - 1.0) > 1e-3) return zeta_alternating(s);
  if (s.real() < -0.5) {
    // zeta(s) = 2^s pi^{s-1} sin(pi s / 2) Gamma(1 - s) zeta(1 - s)
    cplx l = s * std::log(2.0) + (s - 1.0) * std::log(pi) + log_gamma(1.0 - s);
    return std::exp(l) * std::sin(0.5 * pi * s) * zeta_euler_maclaurin(1.0 - s);
  }
  return zeta_euler_maclaurin(s);
}

[[nodiscard]] inline cplx dirichlet_beta_euler_maclaurin(cplx s) {
  cplx f = std::exp(-s * std::log(4.0));
  return f * (hurwitz_zeta(s, 0.25) - hurwitz_zeta(s, 0.75));
}

[[nodiscard]] inline cplx dirichlet_beta_alternating(cplx s) { return detail::alternating_sum(s, 2.0, 1.0); }

// Dirichlet L-function of the non-principal character mod 4 (entire).
[[nodiscard]] inline cplx dirichlet_beta(cplx s) {
  if (detail::borwein_region(s)) return dirichlet_beta_alternating(s);
  if (s.real() < -0.5) {
    // beta(s) = (2/pi)^{1-s} cos(pi s / 2) Gamma(1 - s) beta(1 - s)
    cplx l = (1.0 - s) * std::log(2.0 / pi) + log_gamma(1.0 - s);
    return std::exp(l) * std::cos(0.5 * pi * s) * dirichlet_beta_euler_maclaurin(1.0 - s);
  }
  return dirichlet_beta_euler_maclaurin(s);
}

}  // namespace vlab

#endif
