#include <gtest/gtest.h>

#include <boost/math/special_functions/bessel.hpp>

#include "vlab/catalog.hpp"
#include "vlab/kernels.hpp"

using namespace vlab;

namespace {

constexpr real euler_gamma = 0.57721566490153286061;

// K_0 by its ascending series for z <= 8, Hankel asymptotic series beyond.
real k0_oracle(real z) {
  if (z <= 8.0) {
    real q = 0.25 * z * z, term = 1.0, harmonic = 0.0, i0 = 1.0, tail = 0.0;
    for (int k = 1; k < 200; ++k) {
      term *= q / (static_cast<real>(k) * k);
      harmonic += 1.0 / k;
      i0 += term;
      tail += term * harmonic;
      if (term < 1e-20) break;
    }
    return -(std::log(0.5 * z) + euler_gamma) * i0 + tail;
  }
  real acc = 1.0, term = 1.0;
  for (int k = 1; k < 40; ++k) {
    real next = term * -((2.0 * k - 1) * (2.0 * k - 1)) / (k * 8.0 * z);
    if (std::abs(next) > std::abs(term)) break;
    term = next;
    acc += term;
  }
  return std::sqrt(pi / (2.0 * z)) * std::exp(-z) * acc;
}

real y_single_oracle(real x) { return 2.0 * k0_oracle(2.0 * std::sqrt(x)); }

std::vector<real> log_grid(real lo, real hi, int n) {
  std::vector<real> v;
  for (int i = 0; i < n; ++i) v.push_back(lo * std::pow(hi / lo, static_cast<real>(i) / (n - 1)));
  return v;
}

}  // namespace

TEST(K0Oracle, MatchesBoost) {
  for (real z : {0.1, 1.0, 2.0, 4.0})
    EXPECT_NEAR(k0_oracle(z) / boost::math::cyl_bessel_k(0, z), 1.0, 1e-12) << z;
  // both branches lose accuracy near the switch
  for (real z : {7.9, 8.1, 15.0, 20.0})
    EXPECT_NEAR(k0_oracle(z) / boost::math::cyl_bessel_k(0, z), 1.0, 2e-8) << z;
}

TEST(KernelZ, SingleFactorExponential) {
  auto v = eval_kernel(KernelKind::Z(), GammaSignature::make({1.0}, {0.0}), 2.0);
  EXPECT_NEAR(v.value.real(), std::exp(-2.0), 1e-12);
  EXPECT_NEAR(v.value.imag(), 0.0, 1e-15);
}

TEST(KernelZ, DuplicationCollapse) {
  auto sig = GammaSignature::make({0.5, 0.5}, {0.0, 0.5});
  for (real x : {0.5, 1.0, 3.0}) {
    auto v = eval_kernel(KernelKind::Z(), sig, x);
    EXPECT_NEAR(v.value.real(), 2.0 * std::sqrt(pi) * std::exp(-2.0 * x), 1e-10) << x;
  }
}

TEST(KernelZ, SingleFactorClosedFormGrid) {
  for (real al : {0.5, 1.0, 2.0})
    for (cplx be : {cplx(0.0), cplx(0.5), cplx(0.3, 0.2)}) {
      auto sig = GammaSignature::make({al}, {be});
      for (real x : log_grid(0.1, 10.0, 20)) {
        auto v = eval_kernel(KernelKind::Z(), sig, x);
        EXPECT_LT(std::abs(v.value - f_alpha_beta(al, be, x)), 1e-9) << al << " " << be << " " << x;
      }
    }
}

TEST(KernelY, BesselK0) {
  auto sig = GammaSignature::make({1.0}, {0.0});
  for (real x : {0.25, 1.0, 4.0}) {
    auto v = eval_kernel(KernelKind::Y(), sig, x);
    EXPECT_NEAR(v.value.real(), y_single_oracle(x), 1e-10) << x;
  }
  EXPECT_NEAR(y_single_oracle(1.0), 0.2277877455, 1e-10);
}

TEST(KernelX, ContourWithinStrip) {
  auto sig = GammaSignature::make({1.0}, {0.0});
  // Gamma(1 - s) Gamma(s) x^{-s}: inverse Mellin is 1/(1 + x)
  for (real x : {0.3, 1.0, 2.5}) {
    auto v = eval_kernel(KernelKind::X(1.0), sig, x, choose_truncation(sig, KernelKind::X(1.0), 0.5, 1e-12));
    EXPECT_NEAR(v.value.real(), 1.0 / (1.0 + x), 1e-10) << x;
  }
  EXPECT_THROW((void)choose_truncation(sig, KernelKind::X(1.0), 1.0, 1e-10), PoleError);
}

TEST(KernelNested, SingleFactorK0) {
  auto sig = GammaSignature::make({1.0}, {0.0});
  EXPECT_NEAR(eval_kernel_nested(sig, 1.0).real(), y_single_oracle(1.0), 1e-10);
}

TEST(KernelNested, HalfFactorMatchesLineIntegral) {
  auto sig = GammaSignature::make({0.5}, {0.0});
  cplx nested = eval_kernel_nested(sig, 4.0);
  auto line = eval_kernel(KernelKind::Y(), sig, 4.0);
  EXPECT_LT(std::abs(nested - line.value), 1e-8);
}

TEST(KernelNested, LogarithmicGrowthAtZero) {
  auto sig = GammaSignature::make({1.0}, {0.0});
  real x = 1e-6;
  real v = eval_kernel_nested(sig, x).real();
  EXPECT_NEAR(v, y_single_oracle(x), 1e-8 * y_single_oracle(x));
  EXPECT_NEAR(v / -std::log(x), 1.0, 0.1);
}

TEST(KernelNested, DimensionLimit) {
  auto sig = GammaSignature::make({1.0, 1.0, 1.0, 1.0}, {0.0, 0.0, 0.0, 0.0});
  EXPECT_THROW((void)eval_kernel_nested(sig, 1.0), ConfigError);
}

TEST(DecayBound, ExponentialKernel) {
  auto sig = GammaSignature::make({1.0}, {0.0});
  auto b = calibrate_decay_bound(sig, KernelKind::Z());
  EXPECT_DOUBLE_EQ(b.D, 1.0);
  for (real x : {1.0, 5.0, 10.0}) EXPECT_GE(b(x), std::exp(-x));
}

TEST(DecayBound, DuplicationKernel) {
  auto sig = GammaSignature::make({0.5, 0.5}, {0.0, 0.5});
  auto b = calibrate_decay_bound(sig, KernelKind::Z());
  EXPECT_DOUBLE_EQ(b.D, 1.0);
  for (real x : log_grid(1.0, 20.0, 30)) EXPECT_GE(b(x), 2.0 * std::sqrt(pi) * std::exp(-2.0 * x)) << x;
}

TEST(DecayBound, BesselKernel) {
  auto sig = GammaSignature::make({1.0}, {0.0});
  auto b = calibrate_decay_bound(sig, KernelKind::Y());
  EXPECT_DOUBLE_EQ(b.D, 2.0);
  for (real x : log_grid(1.0, 100.0, 30)) EXPECT_GE(b(x), y_single_oracle(x)) << x;
}

TEST(DecayBound, RejectsSmallArgumentAndX) {
  auto sig = GammaSignature::make({1.0}, {0.0});
  EXPECT_THROW((void)kernel_decay_bound(sig, KernelKind::Z(), 0.5), ConfigError);
  EXPECT_THROW((void)calibrate_decay_bound(sig, KernelKind::X(1.0)), ConfigError);
}

TEST(GammaCosine, OneSubtractedTerm) {
  auto v = gamma_cos_calibration(-0.75, 0.0, 1.0);
  EXPECT_NEAR(v.value.real(), -0.45969769, 1e-8);
  EXPECT_NEAR(v.value.real(), gamma_cos_closed_form(-0.75, 0.0, 1.0), 1e-10);
}

TEST(GammaCosine, TwoSubtractedTerms) {
  auto v = gamma_cos_calibration(-1.5, 0.0, 2.0);
  EXPECT_NEAR(v.value.real(), std::cos(2.0) - 1.0, 1e-10);
  EXPECT_NEAR(gamma_cos_closed_form(-1.5, 0.0, 2.0), -1.41614684, 1e-8);
}

TEST(GammaCosine, CancellationNearZero) {
  auto v = gamma_cos_calibration(-0.75, 0.5 * pi, 1e-8);
  EXPECT_NEAR(v.value.real(), 0.0, 1e-6);
}

TEST(GammaCosine, RejectsIntegerAbscissa) {
  EXPECT_THROW((void)gamma_cos_calibration(-2.0, 0.0, 1.0), ConfigError);
  EXPECT_THROW((void)gamma_cos_calibration(-0.25, 0.0, 1.0), ConfigError);
}

TEST(Truncation, HeightForExponentialKernel) {
  auto sig = GammaSignature::make({1.0}, {0.0});
  auto c = choose_truncation(sig, KernelKind::Z(), 2.0, 1e-10);
  EXPECT_GE(c.t_max, 18.0);
  EXPECT_LE(c.t_max, 25.0);
  EXPECT_LE(static_cast<std::size_t>(c.panels * c.nodes_per_panel), node_budget());
}

TEST(Truncation, MonotoneInTolerance) {
  auto sig = GammaSignature::make({1.0}, {0.0});
  real prev = 0.0;
  for (real tol : {1e-4, 1e-6, 1e-8, 1e-10, 1e-12}) {
    real t = choose_truncation(sig, KernelKind::Z(), 2.0, tol).t_max;
    EXPECT_GE(t, prev);
    prev = t;
  }
}

TEST(Truncation, FasterDecayNoTaller) {
  auto one = GammaSignature::make({1.0}, {0.0});
  auto two = GammaSignature::make({1.0, 1.0}, {0.0, 0.0});
  for (real tol : {1e-6, 1e-10})
    EXPECT_LE(choose_truncation(two, KernelKind::Z(), 2.0, tol).t_max,
              choose_truncation(one, KernelKind::Z(), 2.0, tol).t_max);
}

TEST(Truncation, NodeBudget) {
  auto sig = GammaSignature::make({1.0}, {0.0});
  setenv("VLAB_NODE_BUDGET", "10", 1);
  EXPECT_THROW((void)choose_truncation(sig, KernelKind::Z(), 2.0, 1e-10), ConfigError);
  unsetenv("VLAB_NODE_BUDGET");
}

TEST(KernelProperties, LineIndependence) {
  auto sig = GammaSignature::make({0.5, 0.5}, {0.0, 0.5});
  for (real x : {0.3, 1.0, 4.0}) {
    auto c1 = choose_truncation(sig, KernelKind::Z(), 1.0, 1e-12);
    auto c2 = choose_truncation(sig, KernelKind::Z(), 2.0, 1e-12);
    auto v1 = eval_kernel(KernelKind::Z(), sig, x, c1);
    auto v2 = eval_kernel(KernelKind::Z(), sig, x, c2);
    EXPECT_LT(std::abs(v1.value - v2.value), 2.0 * std::max(v1.error, v2.error) + 1e-15) << x;
  }
}

TEST(KernelProperties, RealnessForRealBetas) {
  auto sig = GammaSignature::make({0.5, 1.0}, {0.0, 0.25});
  for (auto kind : {KernelKind::Z(), KernelKind::Y()})
    for (real x : {0.2, 1.0, 5.0}) {
      auto v = eval_kernel(kind, sig, x);
      EXPECT_LE(std::abs(v.value.imag()), v.error);
    }
}

TEST(KernelProperties, NestedOracleOnCatalogSignatures) {
  for (const auto& name : preset_names()) {
    auto p = preset(name, {.n_max = 10});
    const auto& sig = p.fe.sig;
    if (sig.r() > 2) continue;
    for (real x : log_grid(0.1, 10.0, 7)) {
      auto line = eval_kernel(KernelKind::Y(), sig, x);
      cplx nested = eval_kernel_nested(sig, x);
      EXPECT_LT(std::abs(line.value - nested), 1e-8) << name << " x=" << x;
    }
  }
}

TEST(KernelProperties, DecayBoundSoundOnCatalog) {
  for (const auto& name : preset_names()) {
    auto p = preset(name, {.n_max = 10});
    for (auto kind : {KernelKind::Z(), KernelKind::Y()}) {
      auto b = calibrate_decay_bound(p.fe.sig, kind);
      // the calibration's validation range
      real x_hi = std::min(64.0 * std::pow(4.0, p.fe.sig.dprime), std::pow(600.0, b.D));
      for (real x : log_grid(1.0, x_hi, 12)) {
        real kv = 0.0;
        try {
          kv = std::abs(eval_kernel(kind, p.fe.sig, x, 1e-14 * std::exp(-std::pow(x, 1.0 / b.D))).value);
        } catch (const ConfigError& e) {
          ADD_FAILURE() << name << " " << to_string(kind.variant) << " x=" << x << ": " << e.what();
        }
        EXPECT_LE(kv, b(x)) << name << " x=" << x;
      }
    }
  }
}
