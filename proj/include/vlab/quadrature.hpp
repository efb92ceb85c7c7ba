#ifndef VLAB_QUADRATURE_HPP
#define VLAB_QUADRATURE_HPP

// Gauss-Legendre rules and panel integration with a half-node error estimate.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "vlab/numeric.hpp"

namespace vlab {

struct GaussRule {
  std::vector<real> x;  // nodes on [-1, 1]
  std::vector<real> w;
};

namespace detail {

inline GaussRule compute_gauss_legendre(int n) {
  GaussRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    real z = std::cos(pi * (i + 0.75) / (n + 0.5));
    real dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      real p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        real p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      real dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // recompute derivative at the converged node
    real p0 = 1.0, p1 = 0.0;
    for (int k = 1; k <= n; ++k) {
      real p2 = p1;
      p1 = p0;
      p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0);
    r.x[i] = -z;
    r.x[n - 1 - i] = z;
    r.w[i] = r.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return r;
}

inline constexpr int max_gauss_order = 64;

}  // namespace detail

// Thread-safe, computed once on first use.
[[nodiscard]] inline const GaussRule& gauss_legendre(int n) {
  static const std::array<GaussRule, detail::max_gauss_order + 1> table = [] {
    std::array<GaussRule, detail::max_gauss_order + 1> t;
    for (int k = 1; k <= detail::max_gauss_order; ++k) t[k] = detail::compute_gauss_legendre(k);
    return t;
  }();
  if (n < 1 || n > detail::max_gauss_order)
    throw ConfigError("gauss_legendre: order must be in 1.." + std::to_string(detail::max_gauss_order));
  return table[n];
}

// Global quadrature node cap, overridable through VLAB_NODE_BUDGET.
[[nodiscard]] inline std::size_t node_budget() {
  if (const char* env = std::getenv("VLAB_NODE_BUDGET")) {
    char* end = nullptr;
    long long v = std::strtoll(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  return 4'000'000;
}

struct QuadResult {
  cplx value{0.0, 0.0};
  real error = 0.0;  // |full - half-node| summed over panels
  std::size_t nodes = 0;
};

// Integrate f over consecutive panels [edges[k], edges[k+1]] with an n-point rule,
// comparing against the n/2-point rule for the error estimate. Panels are reduced
// in ascending order with compensated summation.
template <class F>
[[nodiscard]] QuadResult integrate_panels(F&& f, const std::vector<real>& edges, int n) {
  const GaussRule& full = gauss_legendre(n);
  const GaussRule& half = gauss_legendre(std::max(1, n / 2));
  CompensatedSum<cplx> acc;
  real err = 0.0;
  std::size_t used = 0;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    real lo = edges[k], hi = edges[k + 1];
    real c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    CompensatedSum<cplx> pf, ph;
    for (int i = 0; i < n; ++i) pf.add(full.w[i] * f(c + h * full.x[i]));
    for (std::size_t i = 0; i < half.x.size(); ++i) ph.add(half.w[i] * f(c + h * half.x[i]));
    cplx vf = pf.value() * h, vh = ph.value() * h;
    acc.add(vf);
    err += std::abs(vf - vh);
    used += n + half.x.size();
  }
  return {acc.value(), err, used};
}

// Geometric panel edges on [0, t_max]: first width h0, ratio g, widths capped at w_cap.
[[nodiscard]] inline std::vector<real> geometric_edges(real t_max, real h0, real g, real w_cap) {
  std::vector<real> e{0.0};
  real w = std::min(h0, w_cap);
  while (e.back() < t_max) {
    real next = e.back() + w;
    if (next > t_max || t_max - next < 0.25 * w) next = t_max;
    e.push_back(next);
    w = std::min(w * g, w_cap);
  }
  return e;
}

}  // namespace vlab

#endif
