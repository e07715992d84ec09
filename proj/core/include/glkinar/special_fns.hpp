#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace glkinar {

/// ln Γ(x) for x > 0.
///
/// Arguments below 15 are shifted upward with the recurrence Γ(x+1) = xΓ(x);
/// the shifted value is evaluated with the Stirling series
///   (x-1/2)ln x - x + ln(2π)/2 + Σ_{k=1}^{8} B_{2k} / (2k(2k-1) x^{2k-1}),
/// whose truncation error at x ≥ 15 is below 1e-17. Accuracy is about 1e-14
/// absolute near the roots at 1 and 2 and 1e-15 relative elsewhere.
/// Throws DomainError for non-positive or non-finite x.
double log_gamma(double x);

/// ln[(x)(x+1)...(x+k-1)], with (x)_0 = 1. Throws DomainError for x <= 0.
double log_rising_factorial(double x, std::int64_t k);

/// ln k! from a process-wide table for small k, log_gamma beyond it.
double log_factorial(std::int64_t k);

/// ln C(n, k) for 0 <= k <= n.
double log_binomial(std::int64_t n, std::int64_t k);

/// Binomial(n, p) probabilities for k = 0..min(k_max, n), computed in linear space
/// outward from the mode so that only negligible terms underflow. 0 < p < 1.
std::vector<double> binomial_pmf_window(std::int64_t n, double p, std::int64_t k_max);

/// ln Σ exp(v_i), computed against the maximum element.
/// All -inf input yields -inf. Throws DomainError on an empty sequence.
double log_sum_exp(std::span<const double> values);

__extension__ typedef __int128 StirlingInt;

/// Signed Stirling numbers of the first kind s(m,k) and Stirling numbers of
/// the second kind S(m,k), 0 <= k <= m <= max_order, in exact integer arithmetic.
class StirlingTable {
 public:
  static constexpr int kMaxSupportedOrder = 30;

  /// Throws ConfigError unless 1 <= max_order <= 30.
  explicit StirlingTable(int max_order);

  int max_order() const noexcept { return max_order_; }

  /// s(m,k); zero for k > m.
  StirlingInt first_kind(int m, int k) const;
  /// S(m,k); zero for k > m.
  StirlingInt second_kind(int m, int k) const;

 private:
  std::size_t index(int m, int k) const;

  int max_order_;
  std::vector<StirlingInt> first_;
  std::vector<StirlingInt> second_;
};

/// Builds a table up to max_order. Same contract as the constructor.
StirlingTable stirling_tables(int max_order);

/// Process-wide table of order 30, built on first use.
const StirlingTable& shared_stirling_table();

}  // namespace glkinar
