#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "vlab/catalog.hpp"
#include "vlab/identities.hpp"

using namespace vlab;

namespace {

long divisors_brute(long n) {
  long c = 0;
  for (long d = 1; d <= n; ++d) c += (n % d == 0);
  return c;
}

long r2_lattice(long n) {
  long c = 0;
  long m = static_cast<long>(std::sqrt(static_cast<real>(n))) + 1;
  for (long x = -m; x <= m; ++x)
    for (long y = -m; y <= m; ++y) c += (x * x + y * y == n);
  return c;
}

// z prod_{n <= N} (1 - z^n)^24 by repeated polynomial multiplication, truncated at degree N.
std::vector<long long> tau_by_products(int N) {
  std::vector<long long> p(N + 1, 0);
  p[0] = 1;
  for (int n = 1; n <= N; ++n)
    for (int rep = 0; rep < 24; ++rep)
      for (int d = N; d >= n; --d) p[d] -= p[d - n];
  std::vector<long long> tau(N + 1, 0);
  for (int d = 1; d <= N; ++d) tau[d] = p[d - 1];
  return tau;
}

}  // namespace

TEST(Divisor, Examples) {
  EXPECT_EQ(coeff_divisor(1), 1);
  EXPECT_EQ(coeff_divisor(12), 6);
  EXPECT_EQ(coeff_divisor(9996), divisors_brute(9996));
  EXPECT_EQ(coeff_divisor(9996), 36);  // 2^2 * 3 * 7^2 * 17
}

TEST(SumOfTwoSquares, Examples) {
  EXPECT_EQ(coeff_r2(1), 4);
  EXPECT_EQ(coeff_r2(3), 0);
  EXPECT_EQ(coeff_r2(25), r2_lattice(25));
  EXPECT_EQ(coeff_r2(25), 12);
  for (long n = 1; n <= 300; ++n) EXPECT_EQ(coeff_r2(n), r2_lattice(n)) << n;
}

TEST(GeneralizedDivisor, Examples) {
  EXPECT_NEAR(coeff_sigma_zk(8, 1.0, 1).real(), 15.0, 1e-12);
  EXPECT_NEAR(coeff_sigma_zk(16, 0.0, 2).real(), 3.0, 1e-12);
  real brute = 0.0;
  for (long d = 1; d * d <= 720; ++d)
    if (720 % (d * d) == 0) brute += static_cast<real>(d * d);
  EXPECT_NEAR(coeff_sigma_zk(720, 2.0, 2).real(), brute, 1e-9);
}

TEST(Tau, AgainstPolynomialProduct) {
  auto t = coeff_tau(40);
  auto ref = tau_by_products(40);
  for (int n = 1; n <= 40; ++n) EXPECT_EQ(static_cast<long long>(t[n - 1]), ref[n]) << n;
  EXPECT_EQ(static_cast<long long>(t[0]), 1);
  EXPECT_EQ(static_cast<long long>(t[1]), -24);
  EXPECT_EQ(static_cast<long long>(t[2]), 252);
  EXPECT_EQ(static_cast<long long>(t[5]), -6048);
  EXPECT_EQ(t[5], t[1] * t[2]);
}

TEST(Tau, Limits) {
  EXPECT_THROW((void)coeff_tau(0), ConfigError);
  EXPECT_THROW((void)coeff_tau(100001), ConfigError);
}

TEST(CatalogProperties, GaussCircleBound) {
  long N = 10000, sum = 0;
  for (long n = 1; n <= N; ++n) sum += coeff_r2(n);
  // r_2 sums count lattice points except the origin
  EXPECT_LT(std::abs(static_cast<real>(sum + 1) - pi * N), 3.0 * std::sqrt(static_cast<real>(N)));
}

TEST(CatalogProperties, DirichletHyperbola) {
  long lhs = 0;
  for (long x = 1; x <= 10000; ++x) {
    lhs += coeff_divisor(x);
    if (x % 97 == 0 || x == 10000) {
      long rhs = 0;
      for (long m = 1; m <= x; ++m) rhs += x / m;
      EXPECT_EQ(lhs, rhs) << x;
    }
  }
}

TEST(CatalogProperties, Multiplicativity) {
  std::mt19937_64 rng(20261015);
  std::uniform_int_distribution<long> dist(1, 400);
  int checked = 0;
  while (checked < 100) {
    long m = dist(rng), n = dist(rng);
    if (std::gcd(m, n) != 1) continue;
    for (auto [z, k] : std::vector<std::pair<cplx, int>>{{0.0, 1}, {-0.5, 1}, {0.5, 2}, {cplx(0.3, 1.0), 3}}) {
      cplx a = coeff_sigma_zk(m * n, z, k), b = coeff_sigma_zk(m, z, k) * coeff_sigma_zk(n, z, k);
      EXPECT_LT(std::abs(a - b), 1e-10 * std::max(1.0, std::abs(a))) << m << " " << n;
    }
    ++checked;
  }
}

TEST(CatalogProperties, HeckeRecursion) {
  auto t = coeff_tau(49);
  for (long p : {2L, 3L, 5L, 7L}) {
    int128 tp = t[p - 1], tp2 = t[p * p - 1];
    int128 p11 = 1;
    for (int j = 0; j < 11; ++j) p11 *= p;
    EXPECT_TRUE(tp2 == tp * tp - p11) << p;
  }
}

TEST(Presets, PaperParameters) {
  EXPECT_DOUBLE_EQ(preset("divisor").fe.delta, 1.0);
  EXPECT_EQ(preset("sigma-k", {.k = 3}).fe.sig.alphas, (std::vector<real>{0.5, 1.5}));
  EXPECT_DOUBLE_EQ(preset("ramanujan-tau").fe.delta, 12.0);
  EXPECT_THROW((void)preset("nope"), ConfigError);
  EXPECT_THROW((void)preset("sigma-z", {.z = 0.5}), ConfigError);
}

TEST(Presets, WellFormed) {
  for (const auto& name : preset_names()) {
    auto p = preset(name, {.n_max = 100});
    EXPECT_NO_THROW(p.fe.validate()) << name;
    EXPECT_EQ(p.fe.series.n_max(), 100) << name;
    for (long n = 1; n <= 100; ++n) {
      EXPECT_DOUBLE_EQ(p.fe.series.lambda(n), static_cast<real>(n));
      EXPECT_EQ(p.fe.series.b(n), std::conj(p.fe.series.b(n))) << "real coefficients";
    }
  }
}

TEST(Presets, SelfTestModularRelation) {
  for (const auto& name : preset_names()) {
    auto p = preset(name);
    auto r = modular_report(p.fe, 1.0, 1e-6);
    EXPECT_TRUE(r.passed) << name << " residual " << r.residual;
    EXPECT_FALSE(r.genuine_failure) << name;
  }
}
