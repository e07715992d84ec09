#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"

#include "glkinar/error.hpp"
#include "glkinar/special_fns.hpp"

using namespace glkinar;

namespace {

// ln Γ(x) to 25 digits, computed with mpmath at 40-digit precision.
struct Reference {
  double x;
  double value;
};
const Reference kLogGamma[] = {
    {1e-8, 18.42068073818020890537531},   {0.001, 6.907178885383853682512345},
    {0.1, 2.252712651734205959869702},    {0.5, 0.5723649429247000870717137},
    {0.9999999, 5.772157471482402098744484e-8}, {1, 0.0},
    {1.5, -0.1207822376352452223455184},  {1.9999, -0.00004227520877215811359926715},
    {2, 0.0},                             {2.5, 0.2846828704729191596324947},
    {3.7, 1.428072326665387921872381},    {7.25, 7.052185450738539444925749},
    {14.999, 25.18854687054692642462416}, {15, 25.19122118273868150009343},
    {33.3, 82.60372358165495292832303},   {100, 359.134205369575398776044},
    {1234.5, 7550.550901077894895729836}, {1e6, 12815504.56914761165997697},
    {1e12, 26631021115915.65163619114},
};

}  // namespace

TEST_CASE("log_gamma against high-precision references") {
  for (const auto& r : kLogGamma) {
    CAPTURE(r.x);
    const double tol = std::max(1e-14, 1e-14 * std::abs(r.value));
    CHECK(std::abs(log_gamma(r.x) - r.value) <= tol);
  }
}

TEST_CASE("log_gamma product expansion at 10.5") {
  double prod = std::sqrt(std::acos(-1.0));
  for (double f = 0.5; f < 10.0; f += 1.0) prod *= f;
  CHECK(log_gamma(10.5) == doctest::Approx(std::log(prod)).epsilon(1e-14));
}

TEST_CASE("log_gamma rejects non-positive arguments") {
  CHECK_THROWS_AS(log_gamma(0.0), DomainError);
  CHECK_THROWS_AS(log_gamma(-1.5), DomainError);
  CHECK_THROWS_AS(log_gamma(std::numeric_limits<double>::quiet_NaN()), DomainError);
}

TEST_CASE("log_rising_factorial") {
  CHECK(log_rising_factorial(2.0, 0) == 0.0);
  CHECK(log_rising_factorial(2.0, 3) == doctest::Approx(std::log(24.0)).epsilon(1e-15));
  CHECK(log_rising_factorial(0.7, 5) ==
        doctest::Approx(std::log(0.7 * 1.7 * 2.7 * 3.7 * 4.7)).epsilon(1e-14));
  // against a log-sum of the factors, across both evaluation branches
  for (double x : {0.1, 0.9, 3.3, 47.0, 100.0}) {
    for (std::int64_t k : {1, 7, 8, 9, 50, 200}) {
      double direct = 0.0;
      for (std::int64_t i = 0; i < k; ++i) direct += std::log(x + static_cast<double>(i));
      CAPTURE(x);
      CAPTURE(k);
      CHECK(std::abs(log_rising_factorial(x, k) - direct) < 1e-10);
    }
  }
}

TEST_CASE("log_factorial and log_binomial") {
  CHECK(log_factorial(0) == 0.0);
  CHECK(log_factorial(5) == doctest::Approx(std::log(120.0)));
  CHECK(log_factorial(10000) == doctest::Approx(log_gamma(10001.0)).epsilon(1e-14));
  CHECK(std::exp(log_binomial(10, 3)) == doctest::Approx(120.0).epsilon(1e-13));
}

TEST_CASE("binomial_pmf_window matches direct terms") {
  for (double p : {0.05, 0.3, 0.93}) {
    const auto w = binomial_pmf_window(40, p, 40);
    REQUIRE(w.size() == 41);
    double sum = 0.0;
    for (std::int64_t k = 0; k <= 40; ++k) {
      const double direct = std::exp(log_binomial(40, k) + static_cast<double>(k) * std::log(p) +
                                     static_cast<double>(40 - k) * std::log1p(-p));
      CHECK(w[static_cast<std::size_t>(k)] == doctest::Approx(direct).epsilon(1e-12));
      sum += w[static_cast<std::size_t>(k)];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-13));
  }
  CHECK(binomial_pmf_window(10, 0.5, 3).size() == 4);
}

TEST_CASE("log_sum_exp") {
  const std::vector<double> one{0.0};
  CHECK(log_sum_exp(one) == 0.0);
  const std::vector<double> probs{std::log(0.25), std::log(0.25), std::log(0.5)};
  CHECK(std::abs(log_sum_exp(probs)) < 1e-15);
  const std::vector<double> tiny(1000, std::log(1e-300));
  CHECK(log_sum_exp(tiny) == doctest::Approx(std::log(1000.0) + std::log(1e-300)).epsilon(1e-14));
  const std::vector<double> none(3, -std::numeric_limits<double>::infinity());
  CHECK(log_sum_exp(none) == -std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(log_sum_exp(std::vector<double>{}), DomainError);
}

TEST_CASE("Stirling numbers") {
  const StirlingTable& t = shared_stirling_table();
  CHECK(t.second_kind(3, 2) == 3);
  CHECK(t.first_kind(3, 2) == -3);
  CHECK(t.second_kind(4, 2) == 7);
  CHECK(t.first_kind(4, 2) == 11);

  // Σ_k S(5,k) (3)_k falling = 3^5
  StirlingInt total = 0;
  for (int k = 0; k <= 5; ++k) {
    StirlingInt falling = 1;
    for (int i = 0; i < k; ++i) falling *= 3 - i;
    total += t.second_kind(5, k) * falling;
  }
  CHECK(total == 243);

  // the two kinds are inverse matrices
  for (int n = 0; n <= 12; ++n) {
    for (int m = 0; m <= 12; ++m) {
      StirlingInt s = 0;
      for (int k = 0; k <= 12; ++k) s += t.first_kind(n, k) * t.second_kind(k, m);
      CHECK(s == (n == m ? 1 : 0));
    }
  }

  // k! S(n,k) = Σ_j (-1)^j C(k,j) (k-j)^n, exact up to order 30
  for (int n : {10, 20, 30}) {
    for (int k : {1, 2, 5, 7}) {
      StirlingInt rhs = 0;
      StirlingInt binom = 1;
      for (int j = 0; j <= k; ++j) {
        StirlingInt power = 1;
        for (int i = 0; i < n; ++i) power *= k - j;
        rhs += (j % 2 ? -1 : 1) * binom * power;
        binom = binom * (k - j) / (j + 1);
      }
      StirlingInt fact = 1;
      for (int i = 2; i <= k; ++i) fact *= i;
      CHECK(fact * t.second_kind(n, k) == rhs);
    }
  }

  // Σ_k |s(n,k)| = n!
  StirlingInt abs_sum = 0;
  for (int k = 0; k <= 20; ++k) {
    const StirlingInt v = t.first_kind(20, k);
    abs_sum += v < 0 ? -v : v;
  }
  StirlingInt fact20 = 1;
  for (int i = 2; i <= 20; ++i) fact20 *= i;
  CHECK(abs_sum == fact20);

  CHECK_THROWS_AS(StirlingTable(31), ConfigError);
  CHECK_THROWS_AS(StirlingTable(0), ConfigError);
}
