#ifndef VLAB_SERIES_HPP
#define VLAB_SERIES_HPP

// Coefficient ladders, pole declarations and the functional-equation descriptor.

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "vlab/gamma.hpp"

namespace vlab {

enum class PoleSource { gamma_factor, series_declared, extra_gamma };

[[nodiscard]] inline std::string to_string(PoleSource s) {
  switch (s) {
    case PoleSource::gamma_factor: return "gamma_factor";
    case PoleSource::series_declared: return "series_declared";
    case PoleSource::extra_gamma: return "extra_gamma";
  }
  return "?";
}

struct PoleSpec {
  cplx location{0.0, 0.0};
  int order = 1;
  PoleSource source = PoleSource::series_declared;
  int factor = -1;  // Gamma-block index for gamma_factor
  long k = -1;      // ladder index for gamma_factor / extra_gamma
};

// Sequences lambda_n, a_n (the F side) and mu_n, b_n (the G side), n = 1..n_max.
// Generated once; copies share the immutable cache.
class ArithmeticSeriesPair {
 public:
  using Ladder = std::function<real(long)>;
  using Coeffs = std::function<cplx(long)>;

  ArithmeticSeriesPair() = default;

  ArithmeticSeriesPair(const Ladder& lambda, const Coeffs& a, const Ladder& mu, const Coeffs& b, long n_max)
      : n_max_(n_max) {
    if (n_max < 1) throw ConfigError("ArithmeticSeriesPair: n_max must be >= 1");
    auto d = std::make_shared<Data>();
    d->lambda.reserve(n_max);
    d->mu.reserve(n_max);
    d->a.reserve(n_max);
    d->b.reserve(n_max);
    for (long n = 1; n <= n_max; ++n) {
      d->lambda.push_back(lambda(n));
      d->mu.push_back(mu(n));
      d->a.push_back(a(n));
      d->b.push_back(b(n));
    }
    data_ = std::move(d);
    validate();
  }

  // From explicit arrays (index 0 holds n = 1).
  ArithmeticSeriesPair(std::vector<real> lambda, std::vector<cplx> a, std::vector<real> mu, std::vector<cplx> b) {
    auto d = std::make_shared<Data>();
    d->lambda = std::move(lambda);
    d->a = std::move(a);
    d->mu = std::move(mu);
    d->b = std::move(b);
    n_max_ = static_cast<long>(std::min(d->lambda.size(), d->mu.size()));
    if (d->a.size() != d->lambda.size() || d->b.size() != d->mu.size() || n_max_ < 1)
      throw ConfigError("ArithmeticSeriesPair: ladder and coefficient arrays must match and be non-empty");
    data_ = std::move(d);
    validate();
  }

  [[nodiscard]] long n_max() const { return n_max_; }
  [[nodiscard]] real lambda(long n) const { return data_->lambda.at(n - 1); }
  [[nodiscard]] real mu(long n) const { return data_->mu.at(n - 1); }
  [[nodiscard]] cplx a(long n) const { return data_->a.at(n - 1); }
  [[nodiscard]] cplx b(long n) const { return data_->b.at(n - 1); }
  [[nodiscard]] std::size_t a_size() const { return data_->a.size(); }
  [[nodiscard]] std::size_t b_size() const { return data_->b.size(); }

  // Same data with the two sides exchanged.
  [[nodiscard]] ArithmeticSeriesPair swapped() const {
    ArithmeticSeriesPair s;
    auto d = std::make_shared<Data>();
    d->lambda = data_->mu;
    d->mu = data_->lambda;
    d->a = data_->b;
    d->b = data_->a;
    s.data_ = std::move(d);
    s.n_max_ = n_max_;
    return s;
  }

 private:
  struct Data {
    std::vector<real> lambda, mu;
    std::vector<cplx> a, b;
  };

  void validate() const {
    auto check = [](const std::vector<real>& l, const char* name) {
      for (std::size_t i = 0; i < l.size(); ++i) {
        if (!(l[i] > 0.0)) throw ConfigError(std::string(name) + " must be positive");
        if (i > 0 && !(l[i] > l[i - 1])) throw ConfigError(std::string(name) + " must be strictly increasing");
      }
    };
    check(data_->lambda, "lambda");
    check(data_->mu, "mu");
    auto nonzero = [](const std::vector<cplx>& c) {
      for (auto v : c)
        if (v != cplx(0.0, 0.0)) return true;
      return false;
    };
    if (!nonzero(data_->a) || !nonzero(data_->b)) throw ConfigError("coefficients identically zero");
  }

  std::shared_ptr<const Data> data_;
  long n_max_ = 0;
};

// Q^s F(s) = omega Q^{delta - s} conj(G(delta - conj s)),
// F(s) = phi(s) prod Gamma(alpha_i s + beta_i), G(s) = psi(s) prod Gamma(alpha_i s + beta_i).
struct FunctionalEquationData {
  real delta = 1.0;
  real bigQ = 1.0;
  cplx omega{1.0, 0.0};
  GammaSignature sig;
  GammaSignature sig_conj;
  ArithmeticSeriesPair series;
  std::vector<PoleSpec> declared_poles;       // poles of phi
  std::vector<PoleSpec> dual_declared_poles;  // poles of psi
  std::function<cplx(cplx)> phi;              // continuation of sum a_n lambda_n^{-s}, may be empty
  std::function<cplx(cplx)> psi;              // continuation of sum b_n mu_n^{-s}, may be empty
  real sigma_a = 1.0;
  real sigma_b = 1.0;

  void validate() const {
    if (!(delta > 0.0)) throw ConfigError("delta must be positive");
    if (!(bigQ > 0.0)) throw ConfigError("Q must be positive");
    if (std::abs(std::abs(omega) - 1.0) > 1e-12) throw ConfigError("|omega| must be 1");
    if (sig_conj.alphas != sig.alphas) throw ConfigError("conjugate signature alphas differ");
    for (std::size_t i = 0; i < sig.r(); ++i)
      if (sig_conj.betas[i] != std::conj(sig.betas[i])) throw ConfigError("conjugate signature betas differ");
  }

  // Dirichlet polynomial sum_{n <= N} a_n lambda_n^{-s}.
  [[nodiscard]] cplx phi_partial(cplx s, long N) const {
    CompensatedSum<cplx> acc;
    N = std::min(N, series.n_max());
    for (long n = 1; n <= N; ++n) acc.add(series.a(n) * std::exp(-s * std::log(series.lambda(n))));
    return acc.value();
  }

  // Descriptor of the dual relation Q^s G(s) = omega Q^{delta-s} conj(F(delta - conj s)).
  [[nodiscard]] FunctionalEquationData dual() const {
    FunctionalEquationData d = *this;
    d.series = series.swapped();
    std::swap(d.declared_poles, d.dual_declared_poles);
    std::swap(d.phi, d.psi);
    std::swap(d.sigma_a, d.sigma_b);
    return d;
  }
};

}  // namespace vlab

#endif
