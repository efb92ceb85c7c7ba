#ifndef VLAB_CATALOG_HPP
#define VLAB_CATALOG_HPP

// Arithmetic coefficient generators and the shipped functional-equation presets.

#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "vlab/series.hpp"
#include "vlab/zeta.hpp"

namespace vlab {

using int128 = __int128;

// d(n) by trial division up to sqrt(n).
[[nodiscard]] inline long coeff_divisor(long n) {
  if (n < 1) throw ConfigError("coeff_divisor: n must be >= 1");
  long c = 0;
  for (long d = 1; d * d <= n; ++d)
    if (n % d == 0) c += (d * d == n) ? 1 : 2;
  return c;
}

// r_2(n) = 4 sum_{d | n} chi_4(d).
[[nodiscard]] inline long coeff_r2(long n) {
  if (n < 1) throw ConfigError("coeff_r2: n must be >= 1");
  long c = 0;
  for (long d = 1; d * d <= n; ++d) {
    if (n % d) continue;
    auto chi = [](long m) { return (m % 2 == 0) ? 0 : ((m % 4 == 1) ? 1 : -1); };
    c += chi(d);
    if (d * d != n) c += chi(n / d);
  }
  return 4 * c;
}

// sigma^{(k)}_z(n) = sum over d with d^k | n of d^z.
[[nodiscard]] inline cplx coeff_sigma_zk(long n, cplx z, int k) {
  if (n < 1) throw ConfigError("coeff_sigma_zk: n must be >= 1");
  if (k < 1) throw ConfigError("coeff_sigma_zk: k must be >= 1");
  CompensatedSum<cplx> acc;
  if (k == 1) {
    for (long d = 1; d * d <= n; ++d) {
      if (n % d) continue;
      acc.add(std::exp(z * std::log(static_cast<real>(d))));
      if (d * d != n) acc.add(std::exp(z * std::log(static_cast<real>(n / d))));
    }
    return acc.value();
  }
  for (long d = 1;; ++d) {
    long dk = 1;
    bool over = false;
    for (int j = 0; j < k; ++j) {
      if (dk > n / d) {
        over = true;
        break;
      }
      dk *= d;
    }
    if (over || dk > n) break;
    if (n % dk == 0) acc.add(std::exp(z * std::log(static_cast<real>(d))));
  }
  return acc.value();
}

// tau(1..n_max) from z prod (1 - z^n)^24. The pentagonal expansion E(z) of
// prod (1 - z^n) gives P = E^24 through the recurrence
//   n p_n = sum_{k >= 1} e_k (25 k - n) p_{n-k},
// which follows from P' E = 24 P E'. Exact 128-bit arithmetic with overflow checks.
[[nodiscard]] inline std::vector<int128> coeff_tau(long n_max) {
  if (n_max < 1 || n_max > 100000) throw ConfigError("coeff_tau: n_max must be in 1..100000");
  std::vector<std::pair<long, int>> e;  // nonzero (k, e_k), k >= 1
  for (long j = 1;; ++j) {
    long k1 = j * (3 * j - 1) / 2, k2 = j * (3 * j + 1) / 2;
    if (k1 > n_max) break;
    int sign = (j % 2) ? -1 : 1;
    e.emplace_back(k1, sign);
    if (k2 <= n_max) e.emplace_back(k2, sign);
  }
  std::vector<int128> p(n_max, 0);
  p[0] = 1;
  for (long n = 1; n < n_max; ++n) {
    int128 acc = 0;
    for (auto [k, ek] : e) {
      if (k > n) break;
      int128 term;
      if (__builtin_mul_overflow(static_cast<int128>(ek) * (25 * k - n), p[n - k], &term) ||
          __builtin_add_overflow(acc, term, &acc))
        throw RangeError("coeff_tau: 128-bit overflow");
    }
    if (acc % n != 0) throw RangeError("coeff_tau: inexact division (internal error)");
    p[n] = acc / n;
  }
  return p;  // p[n - 1] = tau(n)
}

// ===========================================================================
// Presets
// ===========================================================================

struct PresetParams {
  real z = -0.5;    // sigma-z
  int k = 2;        // sigma-k
  long n_max = 0;   // 0: preset default
};

struct SeriesPreset {
  std::string name;
  FunctionalEquationData fe;
  std::string lattice;
  std::vector<std::string> oracle_tags;
  std::vector<PoleSpec> expected_poles;  // poles of F after cancellations
  real riesz_rho = 2.0;                   // identity-closure choice
  real riesz_tol = 1e-5;                  // relative
};

namespace detail {

inline ArithmeticSeriesPair self_dual_series(const std::vector<cplx>& a) {
  std::vector<real> lam(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) lam[i] = static_cast<real>(i + 1);
  return ArithmeticSeriesPair(lam, a, lam, a);
}

inline PoleSpec declared(cplx at, int order) { return {at, order, PoleSource::series_declared, -1, -1}; }

inline std::vector<PoleSpec> merge_declared(std::vector<PoleSpec> v) {
  std::vector<PoleSpec> out;
  for (auto& p : v) {
    bool merged = false;
    for (auto& q : out)
      if (std::abs(q.location - p.location) < 1e-12) {
        q.order += p.order;
        merged = true;
      }
    if (!merged) out.push_back(p);
  }
  return out;
}

inline SeriesPreset make_theta_zeta(long n_max) {
  SeriesPreset p;
  p.name = "theta-zeta";
  p.lattice = "lambda_n = mu_n = n";
  p.oracle_tags = {"theta-sum", "completed-zeta"};
  std::vector<cplx> a(n_max, 1.0);
  auto& fe = p.fe;
  fe.delta = 1.0;
  fe.bigQ = 1.0 / std::sqrt(pi);
  fe.sig = GammaSignature::make({0.5}, {0.0});
  fe.sig_conj = fe.sig.conjugate();
  fe.series = self_dual_series(a);
  fe.declared_poles = {declared(1.0, 1)};
  fe.dual_declared_poles = fe.declared_poles;
  fe.phi = [](cplx s) { return zeta(s); };
  fe.psi = fe.phi;
  fe.sigma_a = fe.sigma_b = 1.0;
  p.expected_poles = {declared(1.0, 1), {0.0, 1, PoleSource::gamma_factor, 0, 0}};
  p.riesz_rho = 3.0;
  p.riesz_tol = 1e-6;
  return p;
}

inline SeriesPreset make_sigma_z(real z, long n_max, const std::string& name) {
  if (!(z <= 0.0) || !(z > -1.0))
    throw ConfigError("sigma-z preset: z must be real with -1 < z <= 0 (Re beta >= 0 and delta > 0)");
  SeriesPreset p;
  p.name = name;
  p.lattice = "lambda_n = mu_n = n";
  p.oracle_tags = {"divisor-brute-force"};
  real scale = std::pow(pi, 0.5 * z);
  std::vector<cplx> a(n_max);
  for (long n = 1; n <= n_max; ++n) a[n - 1] = scale * coeff_sigma_zk(n, z, 1);
  auto& fe = p.fe;
  fe.delta = z + 1.0;
  fe.bigQ = 1.0 / pi;
  fe.sig = GammaSignature::make({0.5, 0.5}, {0.0, -0.5 * z});
  fe.sig_conj = fe.sig.conjugate();
  fe.series = self_dual_series(a);
  fe.declared_poles = merge_declared({declared(1.0, 1), declared(1.0 + z, 1)});
  fe.dual_declared_poles = fe.declared_poles;
  fe.phi = [z, scale](cplx s) { return scale * zeta(s) * zeta(s - z); };
  fe.psi = fe.phi;
  fe.sigma_a = fe.sigma_b = 1.0;
  if (z == 0.0) {
    p.expected_poles = {declared(1.0, 2), {0.0, 2, PoleSource::gamma_factor, 0, 0}};
  } else {
    p.expected_poles = {declared(1.0, 1), declared(1.0 + z, 1), {0.0, 1, PoleSource::gamma_factor, 0, 0},
                        {z, 1, PoleSource::gamma_factor, 1, 0}};
  }
  p.riesz_rho = 3.0;
  p.riesz_tol = 1e-5;
  return p;
}

inline SeriesPreset make_sigma_k(int k, long n_max) {
  if (k < 1) throw ConfigError("sigma-k preset: k must be >= 1");
  SeriesPreset p;
  p.name = "sigma-k";
  p.lattice = "lambda_n = mu_n = n";
  p.oracle_tags = {"divisor-brute-force"};
  real z = 0.5 * (k - 1);
  real scale = std::pow(pi, 0.25 * (k - 1));
  std::vector<cplx> a(n_max);
  for (long n = 1; n <= n_max; ++n) a[n - 1] = scale * coeff_sigma_zk(n, z, k);
  auto& fe = p.fe;
  fe.delta = 1.0;
  fe.bigQ = std::pow(pi, -0.5 * (k + 1));
  fe.sig = GammaSignature::make({0.5, 0.5 * k}, {0.0, -0.25 * (k - 1)}, true);
  fe.sig_conj = fe.sig.conjugate();
  fe.series = self_dual_series(a);
  real p2 = (k + 1.0) / (2.0 * k);
  fe.declared_poles = merge_declared({declared(1.0, 1), declared(p2, 1)});
  fe.dual_declared_poles = fe.declared_poles;
  fe.phi = [k, z, scale](cplx s) { return scale * zeta(s) * zeta(static_cast<real>(k) * s - z); };
  fe.psi = fe.phi;
  fe.sigma_a = fe.sigma_b = 1.0;
  if (k == 1) {
    p.expected_poles = {declared(1.0, 2), {0.0, 2, PoleSource::gamma_factor, 0, 0}};
  } else {
    p.expected_poles = {declared(1.0, 1), declared(p2, 1),
                        {(k - 1.0) / (2.0 * k), 1, PoleSource::gamma_factor, 1, 0},
                        {0.0, 1, PoleSource::gamma_factor, 0, 0}};
  }
  p.riesz_rho = 5.0;
  p.riesz_tol = 1e-5;
  return p;
}

inline SeriesPreset make_r2(long n_max) {
  SeriesPreset p;
  p.name = "r2";
  p.lattice = "lambda_n = mu_n = n";
  p.oracle_tags = {"lattice-count", "bessel-j"};
  std::vector<cplx> a(n_max);
  for (long n = 1; n <= n_max; ++n) a[n - 1] = static_cast<real>(coeff_r2(n));
  auto& fe = p.fe;
  fe.delta = 1.0;
  fe.bigQ = 1.0 / pi;
  fe.sig = GammaSignature::make({1.0}, {0.0});
  fe.sig_conj = fe.sig.conjugate();
  fe.series = self_dual_series(a);
  fe.declared_poles = {declared(1.0, 1)};
  fe.dual_declared_poles = fe.declared_poles;
  fe.phi = [](cplx s) { return 4.0 * zeta(s) * dirichlet_beta(s); };
  fe.psi = fe.phi;
  fe.sigma_a = fe.sigma_b = 1.0;
  p.expected_poles = {declared(1.0, 1), {0.0, 1, PoleSource::gamma_factor, 0, 0}};
  p.riesz_rho = 3.0;
  p.riesz_tol = 1e-5;
  return p;
}

inline SeriesPreset make_tau(long n_max) {
  SeriesPreset p;
  p.name = "ramanujan-tau";
  p.lattice = "lambda_n = mu_n = n";
  p.oracle_tags = {"wilton-bessel"};
  auto t = coeff_tau(n_max);
  std::vector<cplx> a(n_max);
  for (long n = 0; n < n_max; ++n) a[n] = static_cast<real>(t[n]);
  auto& fe = p.fe;
  fe.delta = 12.0;
  fe.bigQ = 1.0 / (2.0 * pi);
  fe.sig = GammaSignature::make({1.0}, {0.0});
  fe.sig_conj = fe.sig.conjugate();
  fe.series = self_dual_series(a);
  // L(Delta, s) is entire; no continuation is shipped, Perron uses the Dirichlet polynomial.
  fe.sigma_a = fe.sigma_b = 6.5;
  p.riesz_rho = 3.0;
  p.riesz_tol = 1e-5;
  return p;
}

}  // namespace detail

[[nodiscard]] inline std::vector<std::string> preset_names() {
  return {"theta-zeta", "divisor", "sigma-z", "sigma-k", "r2", "ramanujan-tau"};
}

// Presets are cached per (name, parameters); the cache is write-once per key.
[[nodiscard]] inline SeriesPreset preset(const std::string& name, const PresetParams& prm = {}) {
  static std::mutex mu;
  static std::map<std::string, SeriesPreset> cache;
  std::string key = name + "|" + std::to_string(prm.z) + "|" + std::to_string(prm.k) + "|" +
                    std::to_string(prm.n_max);
  std::lock_guard<std::mutex> lock(mu);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  auto nm = [&](long def) { return prm.n_max > 0 ? prm.n_max : def; };
  SeriesPreset p;
  if (name == "theta-zeta")
    p = detail::make_theta_zeta(nm(20000));
  else if (name == "divisor")
    p = detail::make_sigma_z(0.0, nm(20000), "divisor");
  else if (name == "sigma-z")
    p = detail::make_sigma_z(prm.z, nm(20000), "sigma-z");
  else if (name == "sigma-k")
    p = detail::make_sigma_k(prm.k, nm(20000));
  else if (name == "r2")
    p = detail::make_r2(nm(20000));
  else if (name == "ramanujan-tau")
    p = detail::make_tau(nm(20000));
  else
    throw ConfigError("unknown preset: " + name);
  p.fe.validate();
  cache.emplace(key, p);
  return p;
}

}  // namespace vlab

#endif
