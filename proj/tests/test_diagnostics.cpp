#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"

#include "glkinar/diagnostics.hpp"
#include "glkinar/error.hpp"

using namespace glkinar;

namespace {

std::vector<double> white_noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  std::vector<double> x(n);
  for (auto& v : x) v = z(rng);
  return x;
}

std::vector<double> ar1(std::size_t n, double phi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  std::vector<double> x(n);
  double state = z(rng) / std::sqrt(1 - phi * phi);
  for (auto& v : x) {
    state = phi * state + z(rng);
    v = state;
  }
  return x;
}

std::vector<double> every(const std::vector<double>& x, std::size_t k) {
  std::vector<double> out;
  for (std::size_t i = k - 1; i < x.size(); i += k) out.push_back(x[i]);
  return out;
}

}  // namespace

TEST_CASE("acf") {
  const auto noise = white_noise(100000, 1);
  const auto r = acf(noise, 3);
  CHECK(r[0] == 1.0);
  CHECK(std::abs(r[1]) < 0.02);
  const auto ar = acf(ar1(100000, 0.9, 2), 5);
  CHECK(std::abs(ar[5] - std::pow(0.9, 5)) < 0.05);
  CHECK_THROWS_AS(acf(std::vector<double>(50, 1.0), 1), DomainError);
  CHECK_THROWS_AS(acf(noise, noise.size()), DomainError);
}

TEST_CASE("inefficiency and effective sample size") {
  const EssIneff iid = ess_and_ineff(white_noise(100000, 3));
  CHECK(iid.ineff == doctest::Approx(1.0).epsilon(0.1));
  CHECK(iid.ess_ratio == doctest::Approx(1.0).epsilon(0.1));
  CHECK(iid.ess_ratio * iid.ineff == doctest::Approx(1.0).epsilon(1e-14));

  // AR(1): ineff = (1+φ)/(1-φ)
  for (double phi : {0.5, 0.9}) {
    const EssIneff e = ess_and_ineff(ar1(200000, phi, 4));
    CHECK(e.ineff == doctest::Approx((1 + phi) / (1 - phi)).epsilon(0.1));
    CHECK(e.ess_ratio * e.ineff == doctest::Approx(1.0).epsilon(1e-14));
  }
  const auto slow = ar1(400000, 0.93, 5);
  const EssIneff before = ess_and_ineff(slow);
  const EssIneff after = ess_and_ineff(every(slow, 10));
  CHECK(after.ineff < before.ineff);
  const double phi10 = std::pow(0.93, 10);
  CHECK(after.ineff == doctest::Approx((1 + phi10) / (1 - phi10)).epsilon(0.1));
  CHECK_THROWS_AS(ess_and_ineff(white_noise(99, 1)), DomainError);
}

TEST_CASE("numerical standard error") {
  const auto x = white_noise(10000, 6);
  CHECK(nse(x) == doctest::Approx(0.01).epsilon(0.2));
  std::vector<double> scaled(x);
  for (auto& v : scaled) v *= 10.0;
  CHECK(nse(scaled) == doctest::Approx(10.0 * nse(x)).epsilon(1e-12));
  // AR(1) rescaled to unit variance
  const double phi = 0.8;
  auto corr = ar1(10000, phi, 7);
  for (auto& v : corr) v *= std::sqrt(1 - phi * phi);
  CHECK(nse(corr) >= nse(x));
}

TEST_CASE("Geweke diagnostic") {
  int rejections = 0;
  for (std::uint64_t r = 0; r < 200; ++r) {
    if (geweke(white_noise(2000, 100 + r)).p_value < 0.05) ++rejections;
  }
  CHECK(rejections <= 20);

  auto trend = white_noise(2000, 8);
  for (std::size_t i = 0; i < trend.size(); ++i) trend[i] += 3.0 * static_cast<double>(i) / 2000.0;
  CHECK(geweke(trend).p_value < 0.01);

  const auto x = white_noise(1000, 9);
  const std::vector<double> reversed(x.rbegin(), x.rend());
  // window means swap exactly; the batch-means errors only approximately
  CHECK(geweke(reversed, 0.5, 0.1).z == doctest::Approx(-geweke(x, 0.1, 0.5).z).epsilon(0.05));
  const GewekeResult g = geweke(x);
  CHECK(g.p_value >= 0.0);
  CHECK(g.p_value <= 1.0);
  CHECK_THROWS_AS(geweke(x, 0.6, 0.5), ConfigError);
  CHECK_THROWS_AS(geweke(x, 0.0, 0.5), ConfigError);
}

TEST_CASE("diagnose and thinning") {
  Eigen::MatrixXd draws(1000, 2);
  const auto a = ar1(1000, 0.5, 10);
  for (Eigen::Index r = 0; r < 1000; ++r) {
    draws(r, 0) = a[static_cast<std::size_t>(r)];
    draws(r, 1) = 4.0;
  }
  const std::vector<std::size_t> lags{0, 1, 5};
  const ChainDiagnostics d = diagnose(draws, {"x", "stuck"}, lags);
  CHECK(d.at("x").acf.at(0) == 1.0);
  CHECK(d.at("x").ineff.has_value());
  CHECK(*d.at("x").ess_ratio * *d.at("x").ineff == 1.0);
  CHECK(d.at("stuck").constant);
  CHECK_FALSE(d.at("stuck").ineff.has_value());
  CHECK(d.at("stuck").acf.empty());
  const std::vector<std::size_t> too_far{1000};
  CHECK_THROWS_AS(diagnose(draws, {"x", "stuck"}, too_far), ConfigError);

  const Eigen::MatrixXd t = thin_rows(draws, 10);
  CHECK(t.rows() == 100);
  CHECK(t(0, 0) == draws(9, 0));
  CHECK(t(99, 0) == draws(999, 0));
}

TEST_CASE("DIC") {
  Rng rng(1);
  const InarModel truth = InarModel::nb(0.4, 2.0, 1.0, 0.4);
  const CountSeries data = simulate(truth, 200, StationaryWarmup{}, rng);
  const std::vector<double> theta0{0.4, 2.0, 1.0, 0.4};
  const double ll0 = log_likelihood(truth, data);

  PosteriorDraws degenerate;
  degenerate.variant = ModelVariant::Nb;
  degenerate.names = parameter_names(ModelVariant::Nb);
  degenerate.draws.resize(50, 4);
  for (Eigen::Index r = 0; r < 50; ++r) {
    for (Eigen::Index c = 0; c < 4; ++c) degenerate.draws(r, c) = theta0[static_cast<std::size_t>(c)];
  }
  degenerate.log_likelihoods.assign(50, ll0);
  degenerate.log_posteriors.assign(50, 0.0);
  const DicResult d = dic(degenerate, data);
  CHECK(d.dic == doctest::Approx(-2.0 * ll0).epsilon(1e-13));
  CHECK_FALSE(d.used_fallback);

  // Each draw has κ > 0 but their average does not.
  PosteriorDraws split;
  split.variant = ModelVariant::Glk;
  split.names = parameter_names(ModelVariant::Glk);
  split.draws.resize(2, 5);
  split.draws.row(0) << 0.4, 2.0, 9.0, 1.0, 0.09;
  split.draws.row(1) << 0.4, 2.0, 0.0001, 1.0, 0.9;
  split.log_likelihoods = {-500.0, -400.0};
  split.log_posteriors = {-510.0, -405.0};
  const DicResult f = dic(split, data);
  CHECK(f.used_fallback);
  CHECK(f.estimate[4] == 0.9);
}

TEST_CASE("Gelfand-Dey on a Beta-Binomial model") {
  const int n = 50, k = 17;
  const double s1 = 2.0, s2 = 3.0;
  auto log_beta = [](double x, double y) { return std::lgamma(x) + std::lgamma(y) - std::lgamma(x + y); };
  const double log_choose = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
  const double exact = log_choose + log_beta(k + s1, n - k + s2) - log_beta(s1, s2);

  // exact posterior draws, Beta(k+s1, n-k+s2), mapped to η = logit p
  std::mt19937_64 rng(31);
  std::gamma_distribution<double> ga(k + s1), gb(n - k + s2);
  const int m = 20000;
  Eigen::MatrixXd eta(m, 1);
  std::vector<double> joint(m), loglik(m);
  for (int j = 0; j < m; ++j) {
    const double x = ga(rng), y = gb(rng);
    const double p = x / (x + y);
    eta(j, 0) = std::log(p / (1 - p));
    loglik[static_cast<std::size_t>(j)] = log_choose + k * std::log(p) + (n - k) * std::log1p(-p);
    const double log_prior = (s1 - 1) * std::log(p) + (s2 - 1) * std::log1p(-p) - log_beta(s1, s2);
    joint[static_cast<std::size_t>(j)] = loglik[static_cast<std::size_t>(j)] + log_prior + std::log(p * (1 - p));
  }
  const MarginalLikelihood ml = gelfand_dey(eta, joint, loglik);
  CHECK(std::abs(ml.gelfand_dey - exact) < 0.1);
  CHECK_FALSE(ml.flagged);
  CHECK(ml.inside_fraction == doctest::Approx(0.95).epsilon(0.05));
  CHECK(std::isfinite(ml.harmonic_mean));

  PosteriorDraws few;
  few.draws.resize(10, 1);
  CHECK_THROWS_AS(log_marginal_likelihood(few), DomainError);
}
