#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"

#include "glkinar/bayes.hpp"
#include "glkinar/diagnostics.hpp"
#include "glkinar/error.hpp"

using namespace glkinar;

namespace {

const ModelVariant kVariants[] = {ModelVariant::Glk, ModelVariant::Lk, ModelVariant::Nb, ModelVariant::Gp};

std::vector<double> random_theta(ModelVariant v, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    std::vector<double> t;
    switch (v) {
      case ModelVariant::Glk: t = {u(rng), 0.1 + 9 * u(rng), 2 * u(rng) + 1e-3, 0.1 + 2 * u(rng), 0.9 * u(rng) + 0.01}; break;
      case ModelVariant::Lk: t = {u(rng), 0.1 + 9 * u(rng), 0.5 * u(rng) + 1e-3, 0.9 * u(rng) + 0.01}; break;
      case ModelVariant::Nb: t = {u(rng), 0.1 + 9 * u(rng), 0.1 + 2 * u(rng), 0.9 * u(rng) + 0.01}; break;
      case ModelVariant::Gp: {
        const double theta = 0.1 + 9 * u(rng);
        t = {u(rng), theta, 0.95 * u(rng) / theta};
        break;
      }
    }
    if (admissible(v, t)) return t;
  }
}

// ln |det J| of θ(η) by central differences.
double numerical_log_det(ModelVariant v, const Eigen::VectorXd& eta) {
  const Eigen::Index q = eta.size();
  Eigen::MatrixXd J(q, q);
  const double h = 1e-6;
  for (Eigen::Index j = 0; j < q; ++j) {
    Eigen::VectorXd up = eta, down = eta;
    up[j] += h;
    down[j] -= h;
    const auto tu = inverse_reparametrize(v, up);
    const auto td = inverse_reparametrize(v, down);
    for (Eigen::Index i = 0; i < q; ++i) J(i, j) = (tu[static_cast<std::size_t>(i)] - td[static_cast<std::size_t>(i)]) / (2 * h);
  }
  return std::log(std::abs(J.determinant()));
}

CountSeries simulated(double alpha, std::uint64_t seed, std::size_t length = 1000) {
  Rng rng(seed);
  return simulate(InarModel::glk(alpha, GlkParams(5.3239, 0.0592, 0.6, 0.5917)), length,
                  StationaryWarmup{}, rng);
}

}  // namespace

TEST_CASE("parameter layout") {
  CHECK(parameter_count(ModelVariant::Glk) == 5);
  CHECK(parameter_count(ModelVariant::Gp) == 3);
  CHECK(parameter_names(ModelVariant::Nb) == std::vector<std::string>{"alpha", "a", "c", "beta"});
  const InarModel m = to_model(ModelVariant::Lk, std::vector<double>{0.4, 1.0, 0.2, 0.3});
  CHECK(m.glk_params().c() == 0.3);
  CHECK(from_model(m) == std::vector<double>{0.4, 1.0, 0.2, 0.3});
  CHECK_THROWS_AS(to_model(ModelVariant::Glk, std::vector<double>{0.4, 1.0}), DomainError);
}

TEST_CASE("reparametrization") {
  const auto eta = reparametrize(ModelVariant::Glk, std::vector<double>{0.5, 1.0, 2.0, 3.0, 0.25});
  CHECK(eta[0] == 0.0);
  CHECK(eta[1] == 0.0);
  CHECK(eta[4] == doctest::Approx(std::log(1.0 / 3.0)));

  std::mt19937_64 rng(12);
  for (ModelVariant v : kVariants) {
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const auto theta = random_theta(v, rng);
      const auto back = inverse_reparametrize(v, reparametrize(v, theta));
      for (std::size_t k = 0; k < theta.size(); ++k) worst = std::max(worst, std::abs(back[k] - theta[k]));
    }
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("log Jacobian") {
  CHECK(log_jacobian(ModelVariant::Glk, std::vector<double>{0.5, 1, 1, 1, 0.5}) ==
        doctest::Approx(std::log(0.0625)).epsilon(1e-15));
  std::mt19937_64 rng(5);
  for (ModelVariant v : kVariants) {
    for (int i = 0; i < 20; ++i) {
      const auto theta = random_theta(v, rng);
      double numeric = numerical_log_det(v, reparametrize(v, theta));
      // For GP the density lives on (α, θ, θλ); the stored λ = (θλ)/θ adds a factor 1/θ.
      if (v == ModelVariant::Gp) numeric += std::log(theta[1]);
      CHECK(std::abs(log_jacobian(v, theta) - numeric) < 1e-6);
    }
  }
}

TEST_CASE("priors") {
  const PriorSpec prior;
  const double gamma21 = -2.0 + std::log(4.0);  // Gamma(2, 1/2) at 1
  CHECK(log_prior(ModelVariant::Glk, std::vector<double>{0.3, 1, 1, 1, 0.6}, prior) ==
        doctest::Approx(-1.0 + 2 * gamma21).epsilon(1e-14));
  CHECK(log_prior(ModelVariant::Glk, std::vector<double>{0.8, 1, 1, 1, 0.6}, prior) ==
        doctest::Approx(-1.0 + 2 * gamma21).epsilon(1e-14));

  PriorSpec informative;
  informative.alpha_shape1 = 2.5;
  informative.alpha_shape2 = 1.5;
  informative.beta_shape1 = 3.0;
  informative.a_shape = 2.0;
  std::mt19937_64 rng(1);
  for (ModelVariant v : kVariants) {
    for (int i = 0; i < 20; ++i) {
      const auto theta = random_theta(v, rng);
      const auto grad = log_prior_gradient(v, theta, informative);
      for (std::size_t k = 0; k < theta.size(); ++k) {
        auto up = theta, down = theta;
        const double h = 1e-6 * std::min(theta[k], k == 0 || k + 1 == theta.size() ? std::abs(1 - theta[k]) : theta[k]);
        up[k] += h;
        down[k] -= h;
        if (!admissible(v, up) || !admissible(v, down)) continue;
        const double fd = (log_prior(v, up, informative) - log_prior(v, down, informative)) / (2 * h);
        CHECK(std::abs(grad[k] - fd) < 1e-5 * std::max(1.0, std::abs(fd)));
      }
    }
  }
  PriorSpec bad;
  bad.c_scale = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("likelihood") {
  const GlkParams p(5.3239, 0.0592, 0.6, 0.5917);
  const InarModel m = InarModel::glk(0.3, p);
  CHECK(log_likelihood(m, CountSeries({0, 7})) == doctest::Approx(glk_log_pmf(p, 7)).epsilon(1e-13));
  CHECK_THROWS_AS(log_likelihood(m, CountSeries({3})), DomainError);

  // grouped linear-space evaluation against the term-by-term log-space kernel
  const CountSeries data = simulated(0.7, 2, 300);
  double direct = 0.0;
  for (std::size_t t = 1; t < data.size(); ++t) {
    direct += transition_log_prob(InarModel::glk(0.7, p), data.values()[t - 1], data.values()[t]);
  }
  CHECK(log_likelihood(InarModel::glk(0.7, p), data) == doctest::Approx(direct).epsilon(1e-11));

  // the generating α beats shifted values in most replications
  int wins = 0;
  for (std::uint64_t r = 0; r < 20; ++r) {
    const CountSeries d = simulated(0.3, 100 + r);
    const double at_true = log_likelihood(InarModel::glk(0.3, p), d);
    if (at_true > log_likelihood(InarModel::glk(0.1, p), d) && at_true > log_likelihood(InarModel::glk(0.5, p), d)) {
      ++wins;
    }
  }
  CHECK(wins > 10);

  // same a, θ and κ with different (b, c, β) is a different likelihood
  const CountSeries d = simulated(0.3, 9, 200);
  const double l1 = log_likelihood(InarModel::glk(0.3, GlkParams(2.0, 0.3, 0.6, 0.3)), d);
  const double l2 = log_likelihood(InarModel::glk(0.3, GlkParams(2.0, 0.0, 0.9, 0.45)), d);
  CHECK(std::abs(l1 - l2) > 1e-3);
}

TEST_CASE("log posterior in eta space") {
  const CountSeries data = simulated(0.3, 4, 200);
  const PriorSpec prior;
  const EtaPosterior post(ModelVariant::Glk, data, prior);
  const std::vector<double> theta{0.3, 5.0, 0.05, 0.6, 0.6};
  const PosteriorTerms t = post(reparametrize(ModelVariant::Glk, theta));
  CHECK(t.log_likelihood == doctest::Approx(log_likelihood(to_model(ModelVariant::Glk, theta), data)));
  CHECK(t.log_prior == doctest::Approx(log_prior(ModelVariant::Glk, theta, prior)));
  CHECK(t.log_posterior == doctest::Approx(t.log_likelihood + t.log_prior + t.log_jacobian));
  // κ <= 0
  Eigen::VectorXd bad = reparametrize(ModelVariant::Glk, std::vector<double>{0.3, 5.0, 2.0, 0.5, 0.5});
  CHECK(post(bad).log_posterior == -std::numeric_limits<double>::infinity());
}

TEST_CASE("sampler configuration") {
  AmcmcConfig c;
  CHECK_NOTHROW(c.validate());
  c.iterations = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = AmcmcConfig{};
  c.thin = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = AmcmcConfig{};
  c.burn_in = c.iterations;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = AmcmcConfig{};
  for (std::size_t j = 1; j < 1000; ++j) CHECK(c.gamma(j + 1) < c.gamma(j));
  CHECK(c.gamma(1000000) < 1e-3);
  c.adapt = false;
  CHECK(c.gamma(5) == 0.0);
}

TEST_CASE("random-walk Metropolis on a Gaussian target") {
  Eigen::MatrixXd cov(2, 2);
  cov << 1.0, 0.6, 0.6, 2.0;
  const Eigen::MatrixXd prec = cov.inverse();
  Eigen::VectorXd mean(2);
  mean << 1.0, -2.0;
  const LogDensity target = [&](const Eigen::VectorXd& x) {
    const Eigen::VectorXd d = x - mean;
    return ChainSample{-0.5 * d.dot(prec * d), 0.0};
  };
  AmcmcConfig c;
  c.iterations = 60000;
  c.burn_in = 0;
  c.thin = 1;
  c.seed = 3;
  c.adapt = false;
  c.initial_covariance = cov;
  const ChainOutput out = run_adaptive_metropolis(target, mean, c);
  REQUIRE(out.retained.rows() == 60000);
  for (Eigen::Index k = 0; k < 2; ++k) {
    std::vector<double> col(out.retained.col(k).data(), out.retained.col(k).data() + out.retained.rows());
    double m = 0.0;
    for (double v : col) m += v;
    m /= static_cast<double>(col.size());
    double var = 0.0;
    for (double v : col) var += (v - m) * (v - m);
    var /= static_cast<double>(col.size() - 1);
    CHECK(std::abs(m - mean[k]) < 3.0 * nse(col));
    CHECK(std::abs(var / cov(k, k) - 1.0) < 0.1);
  }

  // with adaptation from a poor start, acceptance settles near the target
  AmcmcConfig a;
  a.iterations = 60000;
  a.burn_in = 10000;
  a.thin = 5;
  a.seed = 4;
  const ChainOutput adapted = run_adaptive_metropolis(target, Eigen::VectorXd::Zero(2), a);
  CHECK(adapted.retained.rows() == 10000);
  CHECK(std::abs(adapted.mean_acceptance_probability - 0.4) < 0.1);
  CHECK(std::abs(adapted.acceptance_rate - 0.4) < 0.1);

  const LogDensity nowhere = [](const Eigen::VectorXd&) {
    return ChainSample{-std::numeric_limits<double>::infinity(), 0.0};
  };
  CHECK_THROWS_AS(run_adaptive_metropolis(nowhere, Eigen::VectorXd::Zero(2), a), NumericalError);
}

TEST_CASE("amcmc_run on simulated data") {
  const CountSeries data = simulated(0.3, 42, 300);
  for (ModelVariant v : kVariants) {
    CHECK(admissible(v, initial_theta_from_data(v, data)));
  }
  AmcmcConfig c;
  c.iterations = 3000;
  c.burn_in = 1000;
  c.thin = 10;
  c.seed = 9;
  const PosteriorDraws d1 = amcmc_run(data, PriorSpec{}, ModelVariant::Glk, c);
  const PosteriorDraws d2 = amcmc_run(data, PriorSpec{}, ModelVariant::Glk, c);
  CHECK(d1.size() == 200);
  CHECK(d1.draws == d2.draws);
  CHECK(d1.log_likelihoods.size() == 200);
  for (Eigen::Index r = 0; r < d1.draws.rows(); ++r) {
    std::vector<double> theta;
    for (Eigen::Index k = 0; k < d1.draws.cols(); ++k) theta.push_back(d1.draws(r, k));
    REQUIRE(admissible(ModelVariant::Glk, theta));
  }
  c.thin = 1;
  c.burn_in = 0;
  c.iterations = 500;
  CHECK(amcmc_run(data, PriorSpec{}, ModelVariant::Nb, c).size() == 500);

  c.initial_theta = std::vector<double>{0.3, 5.0, 2.0, 0.5, 0.5};  // κ < 0
  CHECK_THROWS_AS(amcmc_run(data, PriorSpec{}, ModelVariant::Glk, c), NumericalError);
}

TEST_CASE("credible intervals") {
  std::vector<double> seq(100);
  for (int i = 0; i < 100; ++i) seq[static_cast<std::size_t>(i)] = i + 1;
  const auto [lo, hi] = credible_interval(seq, 0.95);
  CHECK(lo == doctest::Approx(3.475));
  CHECK(hi == doctest::Approx(97.525));
  const auto wide = credible_interval(seq, 0.99);
  CHECK(wide.first <= lo);
  CHECK(wide.second >= hi);
  const std::vector<double> flat(150, 2.5);
  CHECK(credible_interval(flat) == std::pair<double, double>{2.5, 2.5});
  CHECK_THROWS_AS(credible_interval(std::vector<double>(99, 1.0)), DomainError);
  CHECK(quantile(seq, 0.5) == doctest::Approx(50.5));
}
