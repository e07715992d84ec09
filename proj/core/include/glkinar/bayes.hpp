#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "glkinar/inar.hpp"

namespace glkinar {

/// Hyperparameters of the independent priors
///   α ~ Beta, a ~ Gamma, b ~ Gamma, c ~ Gamma, β ~ Beta
/// with Gamma densities in shape–scale form. For the GP variant the same slots
/// are reused: θ takes the `a` prior and the dispersion θλ takes the `beta` prior.
struct PriorSpec {
  double alpha_shape1 = 1.0;
  double alpha_shape2 = 1.0;
  double a_shape = 1.0;
  double a_scale = 1.0;
  double b_shape = 2.0;
  double b_scale = 0.5;
  double c_shape = 2.0;
  double c_scale = 0.5;
  double beta_shape1 = 1.0;
  double beta_shape2 = 1.0;

  /// Throws ConfigError if any hyperparameter is not strictly positive.
  void validate() const;
};

/// Free parameters per variant, in storage order:
///   glk: alpha a b c beta | lk: alpha a b beta | nb: alpha a c beta | gp: alpha theta lambda
std::vector<std::string> parameter_names(ModelVariant variant);
std::size_t parameter_count(ModelVariant variant);

/// θ-vector <-> model. to_model throws DomainError when θ is inadmissible.
InarModel to_model(ModelVariant variant, std::span<const double> theta);
std::vector<double> from_model(const InarModel& model);
/// True when to_model would succeed.
bool admissible(ModelVariant variant, std::span<const double> theta);

/// η = φ(θ): logit for α and β (and for the GP dispersion θλ), log for a, b, c, θ.
Eigen::VectorXd reparametrize(ModelVariant variant, std::span<const double> theta);
std::vector<double> inverse_reparametrize(ModelVariant variant, const Eigen::VectorXd& eta);
/// ln |dθ/dη|; for GLK this is ln(α a b c β (1-α)(1-β)). For GP the prior density
/// is on (α, θ, θλ), so this is the Jacobian of η -> (α, θ, θλ).
double log_jacobian(ModelVariant variant, std::span<const double> theta);

double log_prior(ModelVariant variant, std::span<const double> theta, const PriorSpec& prior);
/// ∂ log_prior / ∂θ on the interior of the support.
std::vector<double> log_prior_gradient(ModelVariant variant, std::span<const double> theta,
                                       const PriorSpec& prior);

/// Conditional log-likelihood Σ_{t>=2} ln P(x_{t-1} -> x_t) for a fixed data set.
///
/// Transitions are grouped by (i, j) pair and origin state i; each evaluation builds
/// the innovation pmf up to max x_t once and the Binomial(i, α) weights once per
/// distinct origin, then sums in linear space. Pairs whose probability underflows
/// are recomputed in log space.
class TransitionLikelihood {
 public:
  /// Throws DomainError for series shorter than 2.
  explicit TransitionLikelihood(const CountSeries& data);

  double operator()(const InarModel& model) const;

  std::size_t transitions() const noexcept { return total_; }

 private:
  struct Pair {
    std::int64_t to;
    double count;
  };
  struct Origin {
    std::int64_t from;
    std::int64_t max_to;
    std::vector<Pair> pairs;
  };
  std::vector<Origin> origins_;
  std::int64_t max_value_ = 0;
  std::size_t total_ = 0;
};

/// Conditional on x_1. Throws DomainError for T < 2.
double log_likelihood(const InarModel& model, const CountSeries& data);

struct PosteriorTerms {
  double log_posterior = 0.0;  ///< log prior + log likelihood + log Jacobian
  double log_likelihood = 0.0;
  double log_prior = 0.0;
  double log_jacobian = 0.0;
};

/// Unnormalized log posterior of η for one data set; -inf outside the admissible region.
class EtaPosterior {
 public:
  EtaPosterior(ModelVariant variant, const CountSeries& data, PriorSpec prior);

  PosteriorTerms operator()(const Eigen::VectorXd& eta) const;

  ModelVariant variant() const noexcept { return variant_; }
  const PriorSpec& prior() const noexcept { return prior_; }
  const TransitionLikelihood& likelihood() const noexcept { return likelihood_; }

 private:
  ModelVariant variant_;
  PriorSpec prior_;
  TransitionLikelihood likelihood_;
};

double log_posterior_eta(ModelVariant variant, const Eigen::VectorXd& eta, const CountSeries& data,
                         const PriorSpec& prior);

/// Adaptation state of the random-walk Metropolis kernel.
struct AdaptState {
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;
  double log_lambda = 0.0;
  std::size_t iteration = 0;
  std::size_t accept_count = 0;
};

struct AmcmcConfig {
  std::size_t iterations = 50000;
  std::size_t burn_in = 10000;
  std::size_t thin = 10;
  std::uint64_t seed = 1;
  /// Starting θ; method of moments on the data when empty.
  std::optional<std::vector<double>> initial_theta;
  double target_acceptance = 0.4;
  /// γ_j = (j + gamma_offset)^(-gamma_exponent).
  double gamma_exponent = 0.6;
  double gamma_offset = 10.0;
  /// When false, γ ≡ 0 and the kernel is a fixed random-walk Metropolis.
  bool adapt = true;
  /// Defaults: λ⁽⁰⁾ = 2.38/√q and Σ⁽⁰⁾ = 0.01·I.
  std::optional<double> initial_lambda;
  std::optional<Eigen::MatrixXd> initial_covariance;
  double jitter = 1e-10;
  /// Also keep every post-burn-in state (before thinning).
  bool keep_unthinned = false;

  /// Throws ConfigError for zero iterations/thinning, burn_in >= iterations, etc.
  void validate() const;
  double gamma(std::size_t j) const;
};

struct ChainSample {
  double log_density = 0.0;
  double log_likelihood = 0.0;
};

/// Target hook: log density (and an auxiliary log-likelihood) at a point.
using LogDensity = std::function<ChainSample(const Eigen::VectorXd&)>;

struct ChainOutput {
  Eigen::MatrixXd retained;          ///< rows = retained draws
  std::vector<ChainSample> samples;  ///< per retained draw
  Eigen::MatrixXd unthinned;         ///< rows = post-burn-in states, when requested
  AdaptState state;
  double acceptance_rate = 0.0;
  /// Mean acceptance probability, the quantity the λ update steers toward the target.
  double mean_acceptance_probability = 0.0;
};

/// Adaptive random-walk Metropolis. Proposal η* = η + λ w, w ~ N(0, Σ + jitter·I);
/// after each step μ ← μ + γ(η - μ), Σ ← Σ + γ((η-μ)(η-μ)ᵀ - Σ) with the pre-update μ,
/// ln λ ← ln λ + γ(ρ - ρ*). Throws NumericalError if the start has non-finite density.
ChainOutput run_adaptive_metropolis(const LogDensity& target, const Eigen::VectorXd& start,
                                    const AmcmcConfig& config);

struct RunMeta {
  std::size_t iterations = 0;
  std::size_t burn_in = 0;
  std::size_t thin = 1;
  std::uint64_t seed = 0;
  double acceptance_rate = 0.0;
  double final_lambda = 0.0;
};

struct PosteriorDraws {
  ModelVariant variant = ModelVariant::Glk;
  std::vector<std::string> names;
  Eigen::MatrixXd draws;      ///< θ-space, rows = retained draws
  Eigen::MatrixXd eta_draws;  ///< the same draws in η-space
  std::vector<double> log_posteriors;
  std::vector<double> log_likelihoods;
  Eigen::MatrixXd unthinned;  ///< θ-space post-burn-in chain, when kept
  RunMeta meta;

  std::size_t size() const noexcept { return static_cast<std::size_t>(draws.rows()); }
  /// Column index of a named parameter; throws DomainError if absent.
  std::size_t column(std::string_view name) const;
};

/// Method-of-moments starting point: α from the lag-1 autocorrelation clamped to
/// [0.05, 0.95], innovation mean and variance matched by a Negative Binomial,
/// b started at 0.1 for variants that carry b.
std::vector<double> initial_theta_from_data(ModelVariant variant, const CountSeries& data);

/// Throws DomainError for T < 2 and NumericalError for a non-finite initial posterior.
PosteriorDraws amcmc_run(const CountSeries& data, const PriorSpec& prior, ModelVariant variant,
                         const AmcmcConfig& config);

/// Equal-tailed interval from sample quantiles with linear interpolation between
/// order statistics (position h = (n-1)p, the "type 7" rule).
/// Throws DomainError for fewer than 100 draws or a level outside (0,1).
std::pair<double, double> credible_interval(std::span<const double> draws, double level = 0.95);
std::pair<double, double> credible_interval(const PosteriorDraws& draws, std::string_view parameter,
                                            double level = 0.95);

/// Sample quantile with the same rule as credible_interval.
double quantile(std::span<const double> values, double p);

}  // namespace glkinar
