// Randomized property suites, 100 cases each, fixed seeds.
#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "vlab/catalog.hpp"
#include "vlab/identities.hpp"
#include "vlab/report_io.hpp"

using namespace vlab;

namespace {

constexpr int cases = 100;

struct Rng {
  std::mt19937_64 eng;
  explicit Rng(std::uint64_t seed) : eng(seed) {}
  real uniform(real lo, real hi) { return std::uniform_real_distribution<real>(lo, hi)(eng); }
  real log_uniform(real lo, real hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
  long integer(long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(eng); }
  template <class T>
  const T& pick(const std::vector<T>& v) { return v[static_cast<std::size_t>(integer(0, static_cast<long>(v.size()) - 1))]; }
};

const SeriesPreset& get(const std::string& name) {
  static std::map<std::string, SeriesPreset> cache;
  auto it = cache.find(name);
  if (it == cache.end()) it = cache.emplace(name, preset(name)).first;
  return it->second;
}

real distance_to_pole(cplx z) {
  if (z.real() > 0.5) return 1.0;
  return std::abs(z - std::round(z.real()));
}

GammaSignature random_signature(Rng& rng, int max_r) {
  int r = static_cast<int>(rng.integer(1, max_r));
  std::vector<real> al;
  std::vector<cplx> be;
  for (int i = 0; i < r; ++i) {
    al.push_back(rng.pick(std::vector<real>{0.5, 1.0, 1.5}));
    be.push_back(rng.uniform(0.0, 1.0));
  }
  return GammaSignature::make(al, be);
}

}  // namespace

// ---------------------------------------------------------------------------
// core math
// ---------------------------------------------------------------------------

TEST(CoreMathProperty, Reflection) {
  Rng rng(1);
  for (int i = 0; i < cases; ++i) {
    cplx z(rng.uniform(0.01, 0.99), rng.uniform(-10.0, 10.0));
    cplx ref = pi / std::sin(pi * z);
    cplx got = std::exp(log_gamma(z) + log_gamma(1.0 - z));
    EXPECT_LT(std::abs(got - ref), 1e-10 * std::abs(ref)) << z;
  }
}

TEST(CoreMathProperty, Recurrence) {
  Rng rng(2);
  int done = 0;
  while (done < cases) {
    cplx z(rng.uniform(-20.0, 20.0), rng.uniform(-20.0, 20.0));
    if (std::abs(z) > 20.0 || distance_to_pole(z) < 0.05 || distance_to_pole(z + 1.0) < 0.05) continue;
    cplx lhs = std::exp(log_gamma(z + 1.0));
    cplx rhs = z * std::exp(log_gamma(z));
    EXPECT_LT(std::abs(lhs - rhs), 1e-12 * std::abs(rhs)) << z;
    ++done;
  }
}

TEST(CoreMathProperty, ConjugateSymmetry) {
  Rng rng(3);
  int done = 0;
  while (done < cases) {
    cplx z(rng.uniform(-15.0, 30.0), rng.uniform(-40.0, 40.0));
    if (distance_to_pole(z) < 0.05) continue;
    cplx a = log_gamma(std::conj(z)), b = std::conj(log_gamma(z));
    EXPECT_LT(std::abs(a - b), 1e-14 * std::max(1.0, std::abs(b))) << z;
    ++done;
  }
}

TEST(CoreMathProperty, SingleGammaProductMatchesLogGamma) {
  Rng rng(4);
  auto sig = GammaSignature::make({1.0}, {0.0});
  for (int i = 0; i < cases; ++i) {
    cplx s(rng.uniform(0.1, 40.0), rng.uniform(-40.0, 40.0));
    cplx lg = log_gamma(s);
    ScaledComplex g = gamma_product(sig, s);
    EXPECT_NEAR(g.log_abs(), lg.real(), 1e-13 * std::max(1.0, std::abs(lg.real()))) << s;
    cplx unit = g.mantissa() / std::abs(g.mantissa());
    EXPECT_LT(std::abs(unit - std::exp(cplx(0.0, lg.imag()))), 1e-13) << s;
  }
}

// ---------------------------------------------------------------------------
// kernels
// ---------------------------------------------------------------------------

TEST(KernelProperty, SingleFactorClosedForm) {
  Rng rng(5);
  for (int i = 0; i < cases; ++i) {
    real al = rng.uniform(0.5, 2.0), be = rng.uniform(0.0, 1.5), x = rng.log_uniform(0.1, 10.0);
    auto v = eval_kernel(KernelKind::Z(), GammaSignature::make({al}, {be}), x);
    EXPECT_LT(std::abs(v.value - f_alpha_beta(al, be, x)), 1e-9) << al << " " << be << " " << x;
  }
}

TEST(KernelProperty, NestedOracleOnCatalogSignatures) {
  std::vector<GammaSignature> sigs;
  for (const auto& name : preset_names()) {
    const auto& sig = get(name).fe.sig;
    if (sig.r() <= 2) sigs.push_back(sig);
  }
  Rng rng(6);
  for (int i = 0; i < cases; ++i) {
    const auto& sig = rng.pick(sigs);
    real x = rng.log_uniform(0.1, 10.0);
    EXPECT_LT(std::abs(eval_kernel(KernelKind::Y(), sig, x).value - eval_kernel_nested(sig, x)), 1e-8) << x;
  }
}

TEST(KernelProperty, LineIndependence) {
  Rng rng(7);
  for (int i = 0; i < cases; ++i) {
    auto sig = random_signature(rng, 2);
    real x = rng.log_uniform(0.2, 5.0);
    auto v1 = eval_kernel(KernelKind::Z(), sig, x, choose_truncation(sig, KernelKind::Z(), 1.0, 1e-12));
    auto v2 = eval_kernel(KernelKind::Z(), sig, x, choose_truncation(sig, KernelKind::Z(), 2.0, 1e-12));
    EXPECT_LT(std::abs(v1.value - v2.value), 2.0 * std::max(v1.error, v2.error) + 1e-15) << x;
  }
}

TEST(KernelProperty, RealnessForRealBetas) {
  Rng rng(8);
  for (int i = 0; i < cases; ++i) {
    auto sig = random_signature(rng, 3);
    auto kind = rng.integer(0, 1) ? KernelKind::Z() : KernelKind::Y();
    auto v = eval_kernel(kind, sig, rng.log_uniform(0.1, 10.0));
    EXPECT_LE(std::abs(v.value.imag()), v.error);
  }
}

TEST(KernelProperty, DecayBoundSound) {
  struct Entry {
    GammaSignature sig;
    KernelKind kind;
    DecayBound bound;
    real x_hi;
  };
  std::vector<Entry> entries;
  for (const auto& name : preset_names()) {
    const auto& sig = get(name).fe.sig;
    for (auto kind : {KernelKind::Z(), KernelKind::Y()}) {
      auto b = calibrate_decay_bound(sig, kind);
      entries.push_back({sig, kind, b, std::min(64.0 * std::pow(4.0, sig.dprime), std::pow(600.0, b.D))});
    }
  }
  Rng rng(9);
  for (int i = 0; i < cases; ++i) {
    const auto& e = rng.pick(entries);
    real x = rng.log_uniform(1.0, e.x_hi);
    real kv = std::abs(eval_kernel(e.kind, e.sig, x).value);
    EXPECT_LE(kv, e.bound(x)) << x;
  }
}

// ---------------------------------------------------------------------------
// residues
// ---------------------------------------------------------------------------

TEST(ResidueProperty, AbscissaInvariance) {
  Rng rng(10);
  for (int i = 0; i < cases; ++i) {
    const auto& fe = get(rng.integer(0, 1) ? "theta-zeta" : "divisor").fe;
    real x = rng.log_uniform(0.2, 5.0);
    EXPECT_LT(std::abs(residual_P(fe, x, 3.1) - residual_P(fe, x, 5.1)), 1e-10 * std::max(1.0, x)) << x;
  }
}

TEST(ResidueProperty, DerivativeLadder) {
  Rng rng(11);
  for (int i = 0; i < cases; ++i) {
    const auto& fe = get(rng.integer(0, 1) ? "theta-zeta" : "divisor").fe;
    real rho = rng.uniform(1.0, 3.0);
    real x = rng.log_uniform(0.2, 5.0);
    auto d = residual_Q_rho_terms(fe, rho, 3.4).derivative();
    auto lower = residual_Q_rho_terms(fe, rho - 1.0, 3.4);
    EXPECT_LT(std::abs(d(x) - lower(x)), 1e-10 * std::max(1.0, std::abs(lower(x)))) << rho << " " << x;
  }
}

// ---------------------------------------------------------------------------
// identities
// ---------------------------------------------------------------------------

TEST(IdentityProperty, ModularRelationAtRandomPoints) {
  Rng rng(12);
  auto names = preset_names();
  for (int i = 0; i < cases; ++i) {
    const auto& name = rng.pick(names);
    real x = rng.log_uniform(0.5, 2.0);
    auto r = modular_report(get(name).fe, x, 1e-7);
    EXPECT_TRUE(r.passed) << name << " x=" << x << " residual " << r.residual;
    EXPECT_FALSE(r.genuine_failure);
  }
}

TEST(IdentityProperty, DashConventionAtLatticePoints) {
  Rng rng(13);
  const auto& fe = get("divisor").fe;
  for (int i = 0; i < cases; ++i) {
    long n = rng.integer(1, 500);
    long full = 0;
    for (long m = 1; m < n; ++m) full += coeff_divisor(m);
    real expect = static_cast<real>(full) + 0.5 * static_cast<real>(coeff_divisor(n));
    EXPECT_EQ(riesz_lhs_direct(fe, static_cast<real>(n), 0.0).real(), expect) << n;
  }
}

TEST(IdentityProperty, ReportJsonRoundTrip) {
  Rng rng(14);
  std::vector<IdentityTag> tags{IdentityTag::modular, IdentityTag::aux_modular, IdentityTag::riesz,
                                IdentityTag::functional_eq};
  for (int i = 0; i < cases; ++i) {
    IdentityReport r;
    r.identity = rng.pick(tags);
    r.x = rng.log_uniform(1e-3, 1e3);
    r.s = cplx(rng.uniform(-5.0, 5.0), rng.uniform(-50.0, 50.0));
    r.rho = rng.uniform(0.0, 6.0);
    r.a = rng.uniform(0.5, 13.0);
    r.lhs = cplx(rng.uniform(-1e6, 1e6), rng.uniform(-1.0, 1.0) * 1e-300);
    r.rhs = cplx(rng.log_uniform(1e-300, 1e300), -rng.uniform(0.0, 1.0));
    r.residual = std::abs(r.lhs - r.rhs);
    r.tol = rng.log_uniform(1e-14, 1e-2);
    r.tol_abs = r.tol * rng.uniform(1.0, 10.0);
    r.terms_lhs = rng.integer(0, 100000);
    r.terms_rhs = rng.integer(0, 100000);
    r.truncation_estimate = rng.log_uniform(1e-20, 1.0);
    r.passed = rng.integer(0, 1);
    r.genuine_failure = rng.integer(0, 1);
    auto text = to_json(r).dump();
    EXPECT_EQ(report_from_json(nlohmann::json::parse(text)), r);
  }
}

// ---------------------------------------------------------------------------
// catalog
// ---------------------------------------------------------------------------

TEST(CatalogProperty, TauMultiplicativity) {
  auto t = coeff_tau(10000);
  Rng rng(15);
  int done = 0;
  while (done < cases) {
    long m = rng.integer(2, 100), n = rng.integer(2, 100);
    if (std::gcd(m, n) != 1) continue;
    EXPECT_TRUE(t[m * n - 1] == static_cast<int128>(t[m - 1]) * t[n - 1]) << m << " " << n;
    ++done;
  }
}

TEST(CatalogProperty, DivisorMultiplicativity) {
  Rng rng(16);
  int done = 0;
  while (done < cases) {
    long m = rng.integer(1, 3000), n = rng.integer(1, 3000);
    if (std::gcd(m, n) != 1) continue;
    EXPECT_EQ(coeff_divisor(m * n), coeff_divisor(m) * coeff_divisor(n));
    // r_2 / 4 is multiplicative
    EXPECT_EQ(4 * coeff_r2(m * n), coeff_r2(m) * coeff_r2(n));
    ++done;
  }
}
