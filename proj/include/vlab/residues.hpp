#ifndef VLAB_RESIDUES_HPP
#define VLAB_RESIDUES_HPP

// Pole enumeration, Laurent principal parts by circle quadrature, and the
// residual functions P, Q_rho and P_1 as finite sums c x^e (log x)^m.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "vlab/series.hpp"

namespace vlab {

enum class ResidualKind { P, Q_rho, P1 };

[[nodiscard]] inline std::string to_string(ResidualKind k) {
  switch (k) {
    case ResidualKind::P: return "P";
    case ResidualKind::Q_rho: return "Q_rho";
    case ResidualKind::P1: return "P1";
  }
  return "?";
}

struct ResidualTerm {
  cplx exponent{0.0, 0.0};
  int logpower = 0;
  cplx coefficient{0.0, 0.0};
};

// sum coefficient * x^exponent * (log x)^logpower
struct ResidualTermSum {
  std::vector<ResidualTerm> terms;
  std::vector<PoleSpec> poles;  // poles that contributed, with resolved orders

  [[nodiscard]] cplx operator()(real x) const {
    if (!(x > 0.0)) throw ConfigError("ResidualTermSum: x must be positive");
    real lx = std::log(x);
    CompensatedSum<cplx> acc;
    for (const auto& t : terms) acc.add(t.coefficient * std::exp(t.exponent * lx) * std::pow(lx, t.logpower));
    return acc.value();
  }

  // Sort by (Re exponent desc, logpower desc) and merge equal monomials.
  void normalize() {
    std::vector<ResidualTerm> out;
    for (const auto& t : terms) {
      bool merged = false;
      for (auto& o : out)
        if (o.logpower == t.logpower && std::abs(o.exponent - t.exponent) < 1e-12) {
          o.coefficient += t.coefficient;
          merged = true;
          break;
        }
      if (!merged) out.push_back(t);
    }
    std::stable_sort(out.begin(), out.end(), [](const ResidualTerm& a, const ResidualTerm& b) {
      if (a.exponent.real() != b.exponent.real()) return a.exponent.real() > b.exponent.real();
      if (a.logpower != b.logpower) return a.logpower > b.logpower;
      return a.exponent.imag() > b.exponent.imag();
    });
    terms = std::move(out);
  }

  // Term-by-term d/dx.
  [[nodiscard]] ResidualTermSum derivative() const {
    ResidualTermSum d;
    d.poles = poles;
    for (const auto& t : terms) {
      if (std::abs(t.exponent) > 0.0) d.terms.push_back({t.exponent - 1.0, t.logpower, t.coefficient * t.exponent});
      if (t.logpower > 0)
        d.terms.push_back({t.exponent - 1.0, t.logpower - 1, t.coefficient * static_cast<real>(t.logpower)});
    }
    d.normalize();
    return d;
  }

  // Analytic continuation of integral_0^1 (this)(x) x^{s-1} dx.
  [[nodiscard]] cplx mellin_unit_interval(cplx s) const {
    CompensatedSum<cplx> acc;
    for (const auto& t : terms) {
      real fact = 1.0;
      for (int j = 2; j <= t.logpower; ++j) fact *= j;
      real sign = (t.logpower % 2) ? -1.0 : 1.0;
      acc.add(t.coefficient * sign * fact / std::pow(s + t.exponent, t.logpower + 1));
    }
    return acc.value();
  }
};

// ===========================================================================
// Circle quadrature
// ===========================================================================

inline constexpr int residue_max_points = 4096;
inline constexpr int max_pole_order = 4;

// (1/2 pi i) * contour integral of g over |s - center| = radius, trapezoid rule
// with N doubled from 16 until successive values agree to tol (relative to max |g| r).
[[nodiscard]] inline cplx residue_numeric(const std::function<cplx(cplx)>& g, const PoleSpec& pole, real radius,
                                          real tol = 1e-13) {
  if (!(radius > 0.0)) throw ConfigError("residue_numeric: radius must be positive");
  cplx prev = 0.0;
  real gmax = 0.0;
  for (int N = 16; N <= residue_max_points; N *= 2) {
    CompensatedSum<cplx> acc;
    for (int k = 0; k < N; ++k) {
      cplx e = std::polar(radius, 2.0 * pi * (k + 0.5) / N);
      cplx v = g(pole.location + e);
      gmax = std::max(gmax, std::abs(v));
      acc.add(v * e);
    }
    cplx cur = acc.value() / static_cast<real>(N);
    if (N > 16 && std::abs(cur - prev) <= tol * std::max(gmax * radius, 1e-300)) return cur;
    prev = cur;
  }
  throw ConvergenceError("residue_numeric: no convergence; a singularity may lie near the circle");
}

struct LaurentPrincipal {
  std::vector<cplx> coeff;  // coeff[j-1] = c_{-j}
  int order = 0;            // 0 when the point is regular
};

// Principal part of h at p up to max_pole_order from one set of circle samples.
[[nodiscard]] inline LaurentPrincipal laurent_principal(const std::function<cplx(cplx)>& h, cplx p, real radius,
                                                        real tol = 1e-13) {
  std::vector<cplx> prev(max_pole_order, 0.0);
  for (int N = 16; N <= residue_max_points; N *= 2) {
    std::vector<CompensatedSum<cplx>> acc(max_pole_order);
    real hmax = 0.0;
    for (int k = 0; k < N; ++k) {
      cplx e = std::polar(radius, 2.0 * pi * (k + 0.5) / N);
      cplx v = h(p + e);
      hmax = std::max(hmax, std::abs(v));
      cplx w = v;
      for (int j = 0; j < max_pole_order; ++j) {
        w *= e;
        acc[j].add(w);
      }
    }
    std::vector<cplx> cur(max_pole_order);
    real change = 0.0;
    for (int j = 0; j < max_pole_order; ++j) {
      cur[j] = acc[j].value() / static_cast<real>(N);
      change = std::max(change, std::abs(cur[j] - prev[j]) / std::pow(radius, j + 1));
    }
    if (N > 16 && change <= tol * std::max(hmax, 1e-300)) {
      LaurentPrincipal L;
      L.coeff = cur;
      // normalised coefficients are bounded by max |h| on the circle
      for (int j = max_pole_order; j >= 1; --j)
        if (std::abs(cur[j - 1]) / std::pow(radius, j) > 1e-9 * hmax) {
          L.order = j;
          break;
        }
      L.coeff.resize(L.order);
      return L;
    }
    prev = cur;
  }
  throw ConvergenceError("laurent_principal: no convergence; pole order may exceed the cap");
}

// ===========================================================================
// Pole enumeration
// ===========================================================================

namespace detail {

inline void add_candidate(std::vector<PoleSpec>& v, const PoleSpec& p) {
  for (auto& q : v)
    if (std::abs(q.location - p.location) < 1e-9) {
      q.order += p.order;
      return;
    }
  v.push_back(p);
}

inline void check_boundary(cplx loc, real lo, real hi) {
  if (std::abs(loc.real() - lo) < default_pole_guard || std::abs(loc.real() - hi) < default_pole_guard)
    throw PoleError("enumerate_poles: pole on the strip boundary at Re s = " + std::to_string(loc.real()));
}

inline std::vector<PoleSpec> candidates(const FunctionalEquationData& fe, real lo, real hi, ResidualKind kind,
                                        bool check) {
  std::vector<PoleSpec> v;
  auto inside = [&](cplx loc) {
    if (check) check_boundary(loc, lo, hi);
    return loc.real() > lo && loc.real() < hi;
  };
  for (const auto& p : fe.declared_poles)
    if (inside(p.location)) add_candidate(v, p);
  if (kind != ResidualKind::Q_rho) {
    for (std::size_t i = 0; i < fe.sig.r(); ++i)
      for (long k = 0;; ++k) {
        cplx loc = -(fe.sig.betas[i] + static_cast<real>(k)) / fe.sig.alphas[i];
        if (loc.real() <= lo - 1.0) break;
        if (inside(loc)) add_candidate(v, {loc, 1, PoleSource::gamma_factor, static_cast<int>(i), k});
      }
  }
  if (kind != ResidualKind::P) {
    for (long k = 0;; ++k) {
      cplx loc = -static_cast<real>(k);
      if (loc.real() <= lo - 1.0) break;
      if (inside(loc)) add_candidate(v, {loc, 1, PoleSource::extra_gamma, -1, k});
    }
  }
  std::stable_sort(v.begin(), v.end(), [](const PoleSpec& a, const PoleSpec& b) {
    return a.location.real() > b.location.real();
  });
  return v;
}

}  // namespace detail

// Candidate poles in lo < Re s < hi with orders summed over sources. Cancellations
// by zeros of phi are resolved later by the order probe.
[[nodiscard]] inline std::vector<PoleSpec> enumerate_poles(const FunctionalEquationData& fe, real lo, real hi,
                                                           ResidualKind kind) {
  if (!(lo < hi)) throw ConfigError("enumerate_poles: empty strip");
  return detail::candidates(fe, lo, hi, kind, true);
}

// x-free part of the residual integrand for each kind.
[[nodiscard]] inline std::function<cplx(cplx)> residual_integrand(const FunctionalEquationData& fe, ResidualKind kind,
                                                                  real rho = 0.0) {
  if (!fe.phi) throw ConfigError("residual function needs the analytic continuation of the series");
  switch (kind) {
    case ResidualKind::P:
      return [&fe](cplx s) { return fe.phi(s) * std::exp(log_gamma_product(fe.sig, s, 0.0)); };
    case ResidualKind::Q_rho:
      return [&fe, rho](cplx s) { return fe.phi(s) * std::exp(log_gamma(s, 0.0) - log_gamma(s + rho + 1.0, 0.0)); };
    case ResidualKind::P1:
      return [&fe](cplx s) {
        return fe.phi(s) * std::exp(log_gamma(s, 0.0) + log_gamma_product(fe.sig, s, 0.0));
      };
  }
  return {};
}

// Residual function of the given kind over the strip (delta - a, a) as a term list.
[[nodiscard]] inline ResidualTermSum residual_terms(const FunctionalEquationData& fe, real a, ResidualKind kind,
                                                    real rho = 0.0) {
  real lo = fe.delta - a, hi = a;
  if (lo > hi) std::swap(lo, hi);
  auto cand = enumerate_poles(fe, lo, hi, kind);
  ResidualTermSum out;
  if (cand.empty()) return out;
  // circle radius: half the gap to every nearby candidate, including those just outside the strip
  auto wide = detail::candidates(fe, lo - 1.0, hi + 1.0, kind, false);
  auto h = residual_integrand(fe, kind, rho);
  for (auto p : cand) {
    real gap = 0.2;
    for (const auto& q : wide)
      if (std::abs(q.location - p.location) > 1e-9) gap = std::min(gap, std::abs(q.location - p.location));
    real radius = std::min(0.1, 0.5 * gap);
    LaurentPrincipal L = laurent_principal(h, p.location, radius);
    if (L.order == 0) continue;
    p.order = L.order;
    out.poles.push_back(p);
    real fact = 1.0;
    for (int j = 1; j <= L.order; ++j) {
      if (j > 1) fact *= (j - 1);
      cplx c = L.coeff[j - 1] / fact;
      if (kind == ResidualKind::Q_rho) {
        out.terms.push_back({p.location + rho, j - 1, c});
      } else {
        real sign = ((j - 1) % 2) ? -1.0 : 1.0;
        out.terms.push_back({-p.location, j - 1, sign * c});
      }
    }
  }
  out.normalize();
  return out;
}

[[nodiscard]] inline cplx residual_P(const FunctionalEquationData& fe, real x, real a) {
  return residual_terms(fe, a, ResidualKind::P)(x);
}

[[nodiscard]] inline ResidualTermSum residual_Q_rho_terms(const FunctionalEquationData& fe, real rho, real a) {
  if (!(rho >= 0.0)) throw ConfigError("residual_Q_rho: rho must be >= 0");
  return residual_terms(fe, a, ResidualKind::Q_rho, rho);
}

[[nodiscard]] inline cplx residual_Q_rho(const FunctionalEquationData& fe, real x, real rho, real a) {
  return residual_Q_rho_terms(fe, rho, a)(x);
}

[[nodiscard]] inline cplx residual_P1(const FunctionalEquationData& fe, real x, real a) {
  return residual_terms(fe, a, ResidualKind::P1)(x);
}

}  // namespace vlab

#endif
