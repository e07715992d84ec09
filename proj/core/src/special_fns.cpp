#include "glkinar/special_fns.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "glkinar/error.hpp"

namespace glkinar {

namespace {

// zeta(k) - 1 for k = 2..40.
constexpr std::array<double, 39> kZetaMinusOne = {
    0.64493406684822643647,  0.2020569031595942854,   0.082323233711138191516,
    0.036927755143369926331, 0.017343061984449139715, 0.0083492773819228268398,
    0.0040773561979443393787, 0.0020083928260822144179, 0.00099457512781808533715,
    0.0004941886041194645587, 0.00024608655330804829864, 0.00012271334757848914675,
    6.1248135058704829259e-5, 3.0588236307020493552e-5, 1.5282259408651871733e-5,
    7.6371976378997622736e-6, 3.8172932649998398565e-6, 1.9082127165539389257e-6,
    9.5396203387279611315e-7, 4.7693298678780646312e-7, 2.3845050272773299e-7,
    1.1921992596531107307e-7, 5.9608189051259479612e-8, 2.9803503514652280186e-8,
    1.4901554828365041235e-8, 7.450711789835429492e-9,  3.7253340247884570548e-9,
    1.8626597235130490064e-9, 9.3132743241966818287e-10, 4.656629065033784073e-10,
    2.328311833676505492e-10, 1.1641550172700519776e-10, 5.8207720879027008893e-11,
    2.9103850444970996869e-11, 1.4551921891041984236e-11, 7.2759598350574810145e-12,
    3.6379795473786511902e-12, 1.8189896503070659477e-12, 9.0949478402638892829e-13,
};

constexpr double kEulerGamma = 0.5772156649015328606065;

// Σ_{k>=2} (-1)^k (zeta(k)-1) e^k / k, |e| <= 1/2. Terms fall like 4^-k.
double zeta_tail_series(double e) {
  double sum = 0.0;
  double power = e;
  for (std::size_t i = 0; i < kZetaMinusOne.size(); ++i) {
    power *= e;
    const int k = static_cast<int>(i) + 2;
    const double term = kZetaMinusOne[i] * power / k;
    sum += (k % 2 == 0) ? term : -term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

// B_{2k} / (2k(2k-1)), k = 1..8.
constexpr std::array<double, 8> kStirlingCoefficients = {
    1.0 / 12.0,       -1.0 / 360.0,        1.0 / 1260.0, -1.0 / 1680.0,
    1.0 / 1188.0,     -691.0 / 360360.0,   1.0 / 156.0,  -3617.0 / 122400.0,
};

constexpr double kStirlingThreshold = 15.0;

double stirling_series(double x) {
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double correction = 0.0;
  for (auto it = kStirlingCoefficients.rbegin(); it != kStirlingCoefficients.rend(); ++it) {
    correction = correction * inv2 + *it;
  }
  correction *= inv;
  constexpr double half_log_two_pi = 0.91893853320467274178;
  return (x - 0.5) * std::log(x) - x + half_log_two_pi + correction;
}

constexpr int kLogFactorialTableSize = 4096;

const std::array<double, kLogFactorialTableSize>& log_factorial_table() {
  static const auto table = [] {
    std::array<double, kLogFactorialTableSize> t{};
    t[0] = 0.0;
    for (int k = 1; k < kLogFactorialTableSize; ++k) t[k] = log_gamma(k + 1.0);
    return t;
  }();
  return table;
}

}  // namespace

double log_gamma(double x) {
  if (!std::isfinite(x) || x <= 0.0) {
    throw DomainError("log_gamma: argument must be positive and finite, got " +
                      std::to_string(x));
  }
  if (x >= 0.5 && x <= 1.5) {
    const double e = x - 1.0;
    return -std::log1p(e) + e * (1.0 - kEulerGamma) + zeta_tail_series(e);
  }
  if (x > 1.5 && x <= 2.5) {
    const double e = x - 2.0;
    return e * (1.0 - kEulerGamma) + zeta_tail_series(e);
  }
  if (x >= kStirlingThreshold) return stirling_series(x);

  // Shift into the Stirling range: Γ(x) = Γ(x+n) / (x (x+1) ... (x+n-1)).
  double shifted = x;
  double product = 1.0;
  while (shifted < kStirlingThreshold) {
    product *= shifted;
    shifted += 1.0;
  }
  return stirling_series(shifted) - std::log(product);
}

double log_rising_factorial(double x, std::int64_t k) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("log_rising_factorial: base must be positive, got " + std::to_string(x));
  }
  if (k < 0) throw DomainError("log_rising_factorial: negative length");
  if (k == 0) return 0.0;
  // Short products are exact enough directly and cheaper than two log_gamma calls.
  if (k <= 8) {
    double product = 1.0;
    for (std::int64_t i = 0; i < k; ++i) product *= x + static_cast<double>(i);
    return std::log(product);
  }
  return log_gamma(x + static_cast<double>(k)) - log_gamma(x);
}

double log_factorial(std::int64_t k) {
  if (k < 0) throw DomainError("log_factorial: negative argument");
  if (k < kLogFactorialTableSize) return log_factorial_table()[static_cast<std::size_t>(k)];
  return log_gamma(static_cast<double>(k) + 1.0);
}

double log_binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || n < 0 || k > n) throw DomainError("log_binomial: need 0 <= k <= n");
  return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

std::vector<double> binomial_pmf_window(std::int64_t n, double p, std::int64_t k_max) {
  if (n < 0 || k_max < 0) throw DomainError("binomial_pmf_window: negative size");
  if (!(p > 0.0 && p < 1.0)) throw DomainError("binomial_pmf_window: p must lie in (0, 1)");
  k_max = std::min(k_max, n);
  std::vector<double> w(static_cast<std::size_t>(k_max) + 1, 0.0);
  if (n == 0) {
    w[0] = 1.0;
    return w;
  }
  const double odds = p / (1.0 - p);
  const auto mode = std::min<std::int64_t>(
      k_max, static_cast<std::int64_t>(std::floor(static_cast<double>(n + 1) * p)));
  w[static_cast<std::size_t>(mode)] =
      std::exp(log_binomial(n, mode) + static_cast<double>(mode) * std::log(p) +
               static_cast<double>(n - mode) * std::log1p(-p));
  for (std::int64_t k = mode; k < k_max; ++k) {
    const auto next = static_cast<std::size_t>(k + 1);
    w[next] = w[next - 1] * static_cast<double>(n - k) / static_cast<double>(k + 1) * odds;
  }
  for (std::int64_t k = mode; k > 0; --k) {
    const auto prev = static_cast<std::size_t>(k - 1);
    w[prev] = w[prev + 1] * static_cast<double>(k) / static_cast<double>(n - k + 1) / odds;
  }
  return w;
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) throw DomainError("log_sum_exp: empty sequence");
  const double max = *std::max_element(values.begin(), values.end());
  if (max == -std::numeric_limits<double>::infinity()) return max;
  if (max == std::numeric_limits<double>::infinity()) return max;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - max);
  return max + std::log(sum);
}

StirlingTable::StirlingTable(int max_order) : max_order_(max_order) {
  if (max_order < 1 || max_order > kMaxSupportedOrder) {
    throw ConfigError("stirling_tables: max_order must lie in [1, 30], got " +
                      std::to_string(max_order));
  }
  const std::size_t n = static_cast<std::size_t>(max_order + 1);
  first_.assign(n * (n + 1) / 2, 0);
  second_.assign(n * (n + 1) / 2, 0);
  first_[index(0, 0)] = 1;
  second_[index(0, 0)] = 1;
  for (int m = 0; m < max_order; ++m) {
    for (int k = 1; k <= m + 1; ++k) {
      const StirlingInt s_prev = k - 1 <= m ? first_[index(m, k - 1)] : 0;
      const StirlingInt s_same = k <= m ? first_[index(m, k)] : 0;
      first_[index(m + 1, k)] = s_prev - static_cast<StirlingInt>(m) * s_same;

      const StirlingInt S_prev = k - 1 <= m ? second_[index(m, k - 1)] : 0;
      const StirlingInt S_same = k <= m ? second_[index(m, k)] : 0;
      second_[index(m + 1, k)] = S_prev + static_cast<StirlingInt>(k) * S_same;
    }
  }
}

std::size_t StirlingTable::index(int m, int k) const {
  return static_cast<std::size_t>(m) * (static_cast<std::size_t>(m) + 1) / 2 +
         static_cast<std::size_t>(k);
}

StirlingInt StirlingTable::first_kind(int m, int k) const {
  if (m < 0 || m > max_order_ || k < 0) throw DomainError("StirlingTable: index out of range");
  return k > m ? 0 : first_[index(m, k)];
}

StirlingInt StirlingTable::second_kind(int m, int k) const {
  if (m < 0 || m > max_order_ || k < 0) throw DomainError("StirlingTable: index out of range");
  return k > m ? 0 : second_[index(m, k)];
}

StirlingTable stirling_tables(int max_order) { return StirlingTable(max_order); }

const StirlingTable& shared_stirling_table() {
  static const StirlingTable table(StirlingTable::kMaxSupportedOrder);
  return table;
}

}  // namespace glkinar
