#ifndef VLAB_NUMERIC_HPP
#define VLAB_NUMERIC_HPP

// Shared scalar types, error classes and compensated summation.

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <type_traits>
#include <string>
#include <vector>

namespace vlab {

using real = double;
using cplx = std::complex<double>;

inline constexpr real pi = std::numbers::pi;
inline constexpr real log_2pi = 1.8378770664093454835606594728112;
inline constexpr cplx I{0.0, 1.0};

// ===========================================================================
// Errors
// ===========================================================================

struct PoleError : std::domain_error {
  int factor = -1;
  explicit PoleError(const std::string& m, int f = -1) : std::domain_error(m), factor(f) {}
};

struct RangeError : std::range_error {
  using std::range_error::range_error;
};

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ===========================================================================
// Compensated summation (Neumaier variant of Kahan)
// ===========================================================================

template <class T>
class CompensatedSum {
 public:
  void add(const T& v) {
    if constexpr (std::is_same_v<T, cplx>) {
      re_.add(v.real());
      im_.add(v.imag());
    } else {
      T t = sum_ + v;
      if (std::abs(sum_) >= std::abs(v))
        comp_ += (sum_ - t) + v;
      else
        comp_ += (v - t) + sum_;
      sum_ = t;
    }
  }
  CompensatedSum& operator+=(const T& v) {
    add(v);
    return *this;
  }
  [[nodiscard]] T value() const {
    if constexpr (std::is_same_v<T, cplx>)
      return {re_.value(), im_.value()};
    else
      return sum_ + comp_;
  }

 private:
  struct Empty {};
  using Part = std::conditional_t<std::is_same_v<T, cplx>, CompensatedSum<real>, Empty>;
  T sum_{};
  T comp_{};
  Part re_{};
  Part im_{};
};

// Pairwise reduction of a fixed-order sequence; deterministic for a given input.
template <class T>
[[nodiscard]] T pairwise_sum(const T* v, std::size_t n) {
  if (n <= 16) {
    CompensatedSum<T> s;
    for (std::size_t i = 0; i < n; ++i) s.add(v[i]);
    return s.value();
  }
  std::size_t h = n / 2;
  return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

template <class T>
[[nodiscard]] T pairwise_sum(const std::vector<T>& v) {
  return pairwise_sum(v.data(), v.size());
}

[[nodiscard]] inline bool near_nonpositive_integer(cplx z, real guard, long* which = nullptr) {
  if (z.real() > guard) return false;
  real k = std::round(-z.real());
  if (k < 0) k = 0;
  if (std::abs(z + k) < guard) {
    if (which) *which = static_cast<long>(k);
    return true;
  }
  return false;
}

}  // namespace vlab

#endif
