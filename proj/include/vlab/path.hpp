#ifndef VLAB_PATH_HPP
#define VLAB_PATH_HPP

// Node sets for (1/2 pi i) * integral over a vertical line, optionally bent
// into two rays above height T. Paths symmetric under conjugation store only
// the upper half and fold with Im(.)/pi.

#include <vector>

#include "vlab/quadrature.hpp"

namespace vlab {

struct PathRule {
  std::vector<cplx> s, w;            // full-order nodes and ds-weights
  std::vector<cplx> s_half, w_half;  // half-order companion rule
  bool symmetric = true;
  [[nodiscard]] std::size_t size() const { return s.size(); }
};

namespace detail {

inline void append_segment(PathRule& p, cplx start, cplx dir, real lo, real hi, int n) {
  const GaussRule& full = gauss_legendre(n);
  const GaussRule& half = gauss_legendre(std::max(1, n / 2));
  real c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
  for (int i = 0; i < n; ++i) {
    p.s.push_back(start + dir * (c + h * full.x[i]));
    p.w.push_back(dir * (h * full.w[i]));
  }
  for (std::size_t i = 0; i < half.x.size(); ++i) {
    p.s_half.push_back(start + dir * (c + h * half.x[i]));
    p.w_half.push_back(dir * (h * half.w[i]));
  }
}

}  // namespace detail

// Vertical line Re s = a on |t| <= edges.back(), panels given by non-negative edges.
[[nodiscard]] inline PathRule vertical_path(real a, const std::vector<real>& edges, int n,
                                            bool symmetric) {
  PathRule p;
  p.symmetric = symmetric;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    detail::append_segment(p, cplx(a, 0.0), I, edges[k], edges[k + 1], n);
    if (!symmetric) detail::append_segment(p, cplx(a, 0.0), -I, edges[k], edges[k + 1], n);
  }
  if (!symmetric) {
    // lower half traversed upward: ds = -(-i dt) handled by flipping weight sign
    for (std::size_t j = 0; j < p.s.size(); ++j)
      if (p.s[j].imag() < 0 || (p.w[j].imag() < 0)) p.w[j] = -p.w[j];
    for (std::size_t j = 0; j < p.s_half.size(); ++j)
      if (p.w_half[j].imag() < 0) p.w_half[j] = -p.w_half[j];
  }
  return p;
}

// Append rays leaving a + iT in direction up_dir (and a - iT in conj(up_dir)).
inline void append_rays(PathRule& p, real a, real T, cplx up_dir, const std::vector<real>& ray_edges,
                        int n) {
  PathRule up;
  for (std::size_t k = 0; k + 1 < ray_edges.size(); ++k)
    detail::append_segment(up, cplx(a, T), up_dir, ray_edges[k], ray_edges[k + 1], n);
  auto push = [&](const PathRule& src, real sign_flip, bool conj_path) {
    for (std::size_t j = 0; j < src.s.size(); ++j) {
      p.s.push_back(conj_path ? std::conj(src.s[j]) : src.s[j]);
      p.w.push_back(conj_path ? -std::conj(src.w[j]) * sign_flip : src.w[j]);
    }
    for (std::size_t j = 0; j < src.s_half.size(); ++j) {
      p.s_half.push_back(conj_path ? std::conj(src.s_half[j]) : src.s_half[j]);
      p.w_half.push_back(conj_path ? -std::conj(src.w_half[j]) * sign_flip : src.w_half[j]);
    }
  };
  push(up, 1.0, false);
  // The lower ray runs from infinity into a - iT; as a parametrised segment
  // s = a - iT + r conj(up_dir) its orientation is reversed, hence the minus sign.
  if (!p.symmetric) push(up, 1.0, true);
}

// Evaluate (1/2 pi i) * integral of f along the path, with half-rule error estimate.
template <class F>
[[nodiscard]] QuadResult apply_path(const PathRule& p, F&& f) {
  CompensatedSum<cplx> full, half;
  for (std::size_t j = 0; j < p.s.size(); ++j) full.add(p.w[j] * f(p.s[j]));
  for (std::size_t j = 0; j < p.s_half.size(); ++j) half.add(p.w_half[j] * f(p.s_half[j]));
  cplx vf, vh;
  if (p.symmetric) {
    vf = full.value().imag() / pi;
    vh = half.value().imag() / pi;
  } else {
    vf = full.value() / (2.0 * pi * I);
    vh = half.value() / (2.0 * pi * I);
  }
  return {vf, std::abs(vf - vh), p.s.size() + p.s_half.size()};
}

// Same reduction for precomputed integrand values on the full and half nodes.
[[nodiscard]] inline QuadResult reduce_path(const PathRule& p, const std::vector<cplx>& fv,
                                            const std::vector<cplx>& fh) {
  CompensatedSum<cplx> full, half;
  for (std::size_t j = 0; j < p.s.size(); ++j) full.add(p.w[j] * fv[j]);
  for (std::size_t j = 0; j < p.s_half.size(); ++j) half.add(p.w_half[j] * fh[j]);
  cplx vf, vh;
  if (p.symmetric) {
    vf = full.value().imag() / pi;
    vh = half.value().imag() / pi;
  } else {
    vf = full.value() / (2.0 * pi * I);
    vh = half.value() / (2.0 * pi * I);
  }
  return {vf, std::abs(vf - vh), p.s.size() + p.s_half.size()};
}

}  // namespace vlab

#endif
