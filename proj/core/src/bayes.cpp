#include "glkinar/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "glkinar/error.hpp"
#include "glkinar/special_fns.hpp"

namespace glkinar {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logit(double p) { return std::log(p) - std::log1p(-p); }
double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

double beta_log_density(double x, double s1, double s2) {
  if (!(x > 0.0 && x < 1.0)) return kNegInf;
  return (s1 - 1.0) * std::log(x) + (s2 - 1.0) * std::log1p(-x) -
         (log_gamma(s1) + log_gamma(s2) - log_gamma(s1 + s2));
}

double beta_log_density_slope(double x, double s1, double s2) {
  return (s1 - 1.0) / x - (s2 - 1.0) / (1.0 - x);
}

double gamma_log_density(double x, double shape, double scale) {
  if (!(x > 0.0)) return kNegInf;
  return (shape - 1.0) * std::log(x) - x / scale - log_gamma(shape) - shape * std::log(scale);
}

double gamma_log_density_slope(double x, double shape, double scale) {
  return (shape - 1.0) / x - 1.0 / scale;
}

void check_size(ModelVariant variant, std::size_t size) {
  if (size != parameter_count(variant)) {
    throw DomainError("parameter vector for variant '" + std::string(to_string(variant)) +
                      "' needs " + std::to_string(parameter_count(variant)) + " entries, got " +
                      std::to_string(size));
  }
}

// Which θ coordinates are probabilities (logit) rather than positive reals (log).
std::vector<bool> logit_mask(ModelVariant variant) {
  switch (variant) {
    case ModelVariant::Glk: return {true, false, false, false, true};
    case ModelVariant::Lk:
    case ModelVariant::Nb: return {true, false, false, true};
    case ModelVariant::Gp: return {true, false, true};
  }
  return {};
}

double sample_mean(std::span<const std::int64_t> x) {
  double s = 0.0;
  for (auto v : x) s += static_cast<double>(v);
  return s / static_cast<double>(x.size());
}

}  // namespace

void PriorSpec::validate() const {
  for (double v : {alpha_shape1, alpha_shape2, a_shape, a_scale, b_shape, b_scale, c_shape,
                   c_scale, beta_shape1, beta_shape2}) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ConfigError("prior hyperparameters must be positive and finite");
    }
  }
}

std::vector<std::string> parameter_names(ModelVariant variant) {
  switch (variant) {
    case ModelVariant::Glk: return {"alpha", "a", "b", "c", "beta"};
    case ModelVariant::Lk: return {"alpha", "a", "b", "beta"};
    case ModelVariant::Nb: return {"alpha", "a", "c", "beta"};
    case ModelVariant::Gp: return {"alpha", "theta", "lambda"};
  }
  return {};
}

std::size_t parameter_count(ModelVariant variant) { return parameter_names(variant).size(); }

InarModel to_model(ModelVariant variant, std::span<const double> theta) {
  check_size(variant, theta.size());
  switch (variant) {
    case ModelVariant::Glk:
      return InarModel::glk(theta[0], GlkParams(theta[1], theta[2], theta[3], theta[4]));
    case ModelVariant::Lk: return InarModel::lk(theta[0], theta[1], theta[2], theta[3]);
    case ModelVariant::Nb: return InarModel::nb(theta[0], theta[1], theta[2], theta[3]);
    case ModelVariant::Gp: return InarModel::gp(theta[0], GpParams(theta[1], theta[2]));
  }
  throw DomainError("unknown variant");
}

std::vector<double> from_model(const InarModel& model) {
  const double alpha = model.alpha();
  if (model.variant() == ModelVariant::Gp) {
    const auto& p = std::get<GpParams>(model.innovation());
    return {alpha, p.theta(), p.lambda()};
  }
  const GlkParams& p = model.glk_params();
  switch (model.variant()) {
    case ModelVariant::Glk: return {alpha, p.a(), p.b(), p.c(), p.beta()};
    case ModelVariant::Lk: return {alpha, p.a(), p.b(), p.beta()};
    case ModelVariant::Nb: return {alpha, p.a(), p.c(), p.beta()};
    case ModelVariant::Gp: break;
  }
  throw DomainError("unknown variant");
}

bool admissible(ModelVariant variant, std::span<const double> theta) {
  if (theta.size() != parameter_count(variant)) return false;
  for (double v : theta) {
    if (!std::isfinite(v)) return false;
  }
  if (!(theta[0] > 0.0 && theta[0] < 1.0)) return false;
  switch (variant) {
    case ModelVariant::Glk: return GlkParams::admissible(theta[1], theta[2], theta[3], theta[4]);
    case ModelVariant::Lk: return GlkParams::admissible(theta[1], theta[2], theta[3], theta[3]);
    case ModelVariant::Nb: return GlkParams::admissible(theta[1], 0.0, theta[2], theta[3]);
    case ModelVariant::Gp: return GpParams::admissible(theta[1], theta[2]) && theta[2] > 0.0;
  }
  return false;
}

Eigen::VectorXd reparametrize(ModelVariant variant, std::span<const double> theta) {
  check_size(variant, theta.size());
  const auto mask = logit_mask(variant);
  Eigen::VectorXd eta(static_cast<Eigen::Index>(theta.size()));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    double value = theta[i];
    if (variant == ModelVariant::Gp && i == 2) value = theta[1] * theta[2];  // dispersion θλ
    eta[static_cast<Eigen::Index>(i)] = mask[i] ? logit(value) : std::log(value);
  }
  return eta;
}

std::vector<double> inverse_reparametrize(ModelVariant variant, const Eigen::VectorXd& eta) {
  check_size(variant, static_cast<std::size_t>(eta.size()));
  const auto mask = logit_mask(variant);
  std::vector<double> theta(static_cast<std::size_t>(eta.size()));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double e = eta[static_cast<Eigen::Index>(i)];
    theta[i] = mask[i] ? sigmoid(e) : std::exp(e);
  }
  if (variant == ModelVariant::Gp) theta[2] /= theta[1];
  return theta;
}

double log_jacobian(ModelVariant variant, std::span<const double> theta) {
  check_size(variant, theta.size());
  const auto mask = logit_mask(variant);
  double total = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    double value = theta[i];
    if (variant == ModelVariant::Gp && i == 2) value = theta[1] * theta[2];
    total += mask[i] ? std::log(value) + std::log1p(-value) : std::log(value);
  }
  return total;
}

double log_prior(ModelVariant variant, std::span<const double> theta, const PriorSpec& prior) {
  check_size(variant, theta.size());
  double lp = beta_log_density(theta[0], prior.alpha_shape1, prior.alpha_shape2);
  switch (variant) {
    case ModelVariant::Glk:
      lp += gamma_log_density(theta[1], prior.a_shape, prior.a_scale) +
            gamma_log_density(theta[2], prior.b_shape, prior.b_scale) +
            gamma_log_density(theta[3], prior.c_shape, prior.c_scale) +
            beta_log_density(theta[4], prior.beta_shape1, prior.beta_shape2);
      break;
    case ModelVariant::Lk:
      lp += gamma_log_density(theta[1], prior.a_shape, prior.a_scale) +
            gamma_log_density(theta[2], prior.b_shape, prior.b_scale) +
            beta_log_density(theta[3], prior.beta_shape1, prior.beta_shape2);
      break;
    case ModelVariant::Nb:
      lp += gamma_log_density(theta[1], prior.a_shape, prior.a_scale) +
            gamma_log_density(theta[2], prior.c_shape, prior.c_scale) +
            beta_log_density(theta[3], prior.beta_shape1, prior.beta_shape2);
      break;
    case ModelVariant::Gp:
      lp += gamma_log_density(theta[1], prior.a_shape, prior.a_scale) +
            beta_log_density(theta[1] * theta[2], prior.beta_shape1, prior.beta_shape2);
      break;
  }
  return std::isnan(lp) ? kNegInf : lp;
}

std::vector<double> log_prior_gradient(ModelVariant variant, std::span<const double> theta,
                                       const PriorSpec& prior) {
  check_size(variant, theta.size());
  std::vector<double> g(theta.size(), 0.0);
  g[0] = beta_log_density_slope(theta[0], prior.alpha_shape1, prior.alpha_shape2);
  switch (variant) {
    case ModelVariant::Glk:
      g[1] = gamma_log_density_slope(theta[1], prior.a_shape, prior.a_scale);
      g[2] = gamma_log_density_slope(theta[2], prior.b_shape, prior.b_scale);
      g[3] = gamma_log_density_slope(theta[3], prior.c_shape, prior.c_scale);
      g[4] = beta_log_density_slope(theta[4], prior.beta_shape1, prior.beta_shape2);
      break;
    case ModelVariant::Lk:
      g[1] = gamma_log_density_slope(theta[1], prior.a_shape, prior.a_scale);
      g[2] = gamma_log_density_slope(theta[2], prior.b_shape, prior.b_scale);
      g[3] = beta_log_density_slope(theta[3], prior.beta_shape1, prior.beta_shape2);
      break;
    case ModelVariant::Nb:
      g[1] = gamma_log_density_slope(theta[1], prior.a_shape, prior.a_scale);
      g[2] = gamma_log_density_slope(theta[2], prior.c_shape, prior.c_scale);
      g[3] = beta_log_density_slope(theta[3], prior.beta_shape1, prior.beta_shape2);
      break;
    case ModelVariant::Gp: {
      const double d = theta[1] * theta[2];
      const double slope = beta_log_density_slope(d, prior.beta_shape1, prior.beta_shape2);
      g[1] = gamma_log_density_slope(theta[1], prior.a_shape, prior.a_scale) + theta[2] * slope;
      g[2] = theta[1] * slope;
      break;
    }
  }
  return g;
}

EtaPosterior::EtaPosterior(ModelVariant variant, const CountSeries& data, PriorSpec prior)
    : variant_(variant), prior_(prior), likelihood_(data) {
  prior_.validate();
}

PosteriorTerms EtaPosterior::operator()(const Eigen::VectorXd& eta) const {
  PosteriorTerms terms;
  terms.log_posterior = kNegInf;
  terms.log_likelihood = kNegInf;
  if (!eta.allFinite()) return terms;
  const auto theta = inverse_reparametrize(variant_, eta);
  if (!admissible(variant_, theta)) return terms;
  terms.log_prior = log_prior(variant_, theta, prior_);
  terms.log_jacobian = log_jacobian(variant_, theta);
  terms.log_likelihood = likelihood_(to_model(variant_, theta));
  const double total = terms.log_prior + terms.log_likelihood + terms.log_jacobian;
  terms.log_posterior = std::isnan(total) ? kNegInf : total;
  return terms;
}

double log_posterior_eta(ModelVariant variant, const Eigen::VectorXd& eta, const CountSeries& data,
                         const PriorSpec& prior) {
  return EtaPosterior(variant, data, prior)(eta).log_posterior;
}

void AmcmcConfig::validate() const {
  if (iterations == 0) throw ConfigError("sampler: iterations must be positive");
  if (thin == 0) throw ConfigError("sampler: thinning factor must be positive");
  if (burn_in >= iterations) throw ConfigError("sampler: burn-in must be below the iteration count");
  if (!(target_acceptance > 0.0 && target_acceptance < 1.0)) {
    throw ConfigError("sampler: target acceptance must lie in (0, 1)");
  }
  if (!(gamma_exponent > 0.0)) throw ConfigError("sampler: gamma exponent must be positive");
  if (!(gamma_offset >= 0.0)) throw ConfigError("sampler: gamma offset must be non-negative");
  if (initial_lambda && !(*initial_lambda > 0.0)) {
    throw ConfigError("sampler: initial lambda must be positive");
  }
  if (!(jitter >= 0.0)) throw ConfigError("sampler: jitter must be non-negative");
}

double AmcmcConfig::gamma(std::size_t j) const {
  if (!adapt) return 0.0;
  return std::pow(static_cast<double>(j) + gamma_offset, -gamma_exponent);
}

ChainOutput run_adaptive_metropolis(const LogDensity& target, const Eigen::VectorXd& start,
                                    const AmcmcConfig& config) {
  config.validate();
  const Eigen::Index q = start.size();
  if (q == 0) throw ConfigError("sampler: empty state vector");

  Rng rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  AdaptState state;
  state.mu = start;
  state.sigma = config.initial_covariance.value_or(0.01 * Eigen::MatrixXd::Identity(q, q));
  if (state.sigma.rows() != q || state.sigma.cols() != q) {
    throw ConfigError("sampler: initial covariance has the wrong shape");
  }
  state.log_lambda = std::log(config.initial_lambda.value_or(2.38 / std::sqrt(static_cast<double>(q))));

  Eigen::VectorXd current = start;
  ChainSample current_value = target(current);
  if (!std::isfinite(current_value.log_density)) {
    throw NumericalError("sampler: log density is not finite at the initial point");
  }

  const std::size_t retained = (config.iterations - config.burn_in) / config.thin;
  ChainOutput out;
  out.retained.resize(static_cast<Eigen::Index>(retained), q);
  out.samples.reserve(retained);
  if (config.keep_unthinned) {
    out.unthinned.resize(static_cast<Eigen::Index>(config.iterations - config.burn_in), q);
  }

  const Eigen::MatrixXd jitter = config.jitter * Eigen::MatrixXd::Identity(q, q);
  Eigen::VectorXd z(q);
  Eigen::VectorXd proposal(q);
  Eigen::VectorXd step(q);
  Eigen::LLT<Eigen::MatrixXd> llt(q);
  double rho_sum = 0.0;
  Eigen::Index kept = 0;

  for (std::size_t j = 1; j <= config.iterations; ++j) {
    llt.compute(state.sigma + jitter);
    if (llt.info() != Eigen::Success) {
      // Lost definiteness through rounding; fall back to the diagonal.
      Eigen::MatrixXd diag = state.sigma.diagonal().cwiseMax(config.jitter).asDiagonal();
      llt.compute(diag + jitter);
    }
    for (Eigen::Index i = 0; i < q; ++i) z[i] = normal(rng);
    step.noalias() = llt.matrixL() * z;
    proposal = current + std::exp(state.log_lambda) * step;

    const ChainSample candidate = target(proposal);
    const double log_ratio = candidate.log_density - current_value.log_density;
    double rho = 0.0;
    if (std::isfinite(candidate.log_density) && !std::isnan(log_ratio)) {
      rho = log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
    }
    if (uniform01(rng) < rho) {
      current = proposal;
      current_value = candidate;
      ++state.accept_count;
    }
    rho_sum += rho;
    state.iteration = j;

    const double g = config.gamma(j);
    if (g > 0.0) {
      const Eigen::VectorXd diff = current - state.mu;
      state.mu += g * diff;
      state.sigma += g * (diff * diff.transpose() - state.sigma);
      state.log_lambda += g * (rho - config.target_acceptance);
    }

    if (j > config.burn_in) {
      const std::size_t offset = j - config.burn_in;
      if (config.keep_unthinned) out.unthinned.row(static_cast<Eigen::Index>(offset - 1)) = current;
      if (offset % config.thin == 0 && kept < static_cast<Eigen::Index>(retained)) {
        out.retained.row(kept++) = current;
        out.samples.push_back(current_value);
      }
    }
  }
  out.state = state;
  out.acceptance_rate =
      static_cast<double>(state.accept_count) / static_cast<double>(config.iterations);
  out.mean_acceptance_probability = rho_sum / static_cast<double>(config.iterations);
  return out;
}

std::size_t PosteriorDraws::column(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  throw DomainError("no parameter named '" + std::string(name) + "'");
}

std::vector<double> initial_theta_from_data(ModelVariant variant, const CountSeries& data) {
  const auto& x = data.values();
  if (x.size() < 2) throw DomainError("initialization needs at least two observations");
  const double mean = sample_mean(x);
  double var = 0.0;
  double cov1 = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    const double d = static_cast<double>(x[t]) - mean;
    var += d * d;
    if (t > 0) cov1 += d * (static_cast<double>(x[t - 1]) - mean);
  }
  const double n = static_cast<double>(x.size());
  var /= n;
  cov1 /= n;
  const double alpha = std::clamp(var > 0.0 ? cov1 / var : 0.05, 0.05, 0.95);

  const double innov_mean = std::max(mean * (1.0 - alpha), 0.1);
  const double innov_var = var * (1.0 - alpha * alpha) - alpha * innov_mean;
  const double vmr = std::max(innov_var / innov_mean, 1.05);

  // Negative Binomial match with c = 1: VMR = 1/(1-β), mean = aβ/(1-β).
  const double beta = std::clamp(1.0 - 1.0 / vmr, 0.05, 0.85);
  constexpr double kStartB = 0.1;
  switch (variant) {
    case ModelVariant::Nb: return {alpha, innov_mean * (1.0 - beta) / beta, 1.0, beta};
    case ModelVariant::Glk: {
      const double c = 1.0;
      const double kappa = 1.0 - beta - kStartB * beta / c;
      return {alpha, innov_mean * kappa * c / beta, kStartB, c, beta};
    }
    case ModelVariant::Lk: {
      const double kappa = 1.0 - beta - kStartB;
      return {alpha, innov_mean * kappa, kStartB, beta};
    }
    case ModelVariant::Gp: {
      const double d = std::clamp(1.0 - 1.0 / std::sqrt(vmr), 0.01, 0.9);
      const double theta = innov_mean * (1.0 - d);
      return {alpha, theta, d / theta};
    }
  }
  throw DomainError("unknown variant");
}

PosteriorDraws amcmc_run(const CountSeries& data, const PriorSpec& prior, ModelVariant variant,
                         const AmcmcConfig& config) {
  config.validate();
  if (data.size() < 2) throw DomainError("amcmc_run: need at least two observations");
  const std::vector<double> theta0 =
      config.initial_theta ? *config.initial_theta : initial_theta_from_data(variant, data);
  if (!admissible(variant, theta0)) {
    throw NumericalError("amcmc_run: initial parameters are outside the admissible region");
  }
  const EtaPosterior posterior(variant, data, prior);
  const Eigen::VectorXd eta0 = reparametrize(variant, theta0);
  const auto target = [&posterior](const Eigen::VectorXd& eta) {
    const PosteriorTerms t = posterior(eta);
    return ChainSample{t.log_posterior, t.log_likelihood};
  };

  ChainOutput chain;
  try {
    chain = run_adaptive_metropolis(target, eta0, config);
  } catch (const NumericalError& e) {
    std::string where;
    for (std::size_t i = 0; i < theta0.size(); ++i) {
      where += (i ? ", " : "") + parameter_names(variant)[i] + "=" + std::to_string(theta0[i]);
    }
    throw NumericalError(std::string(e.what()) + " (" + where + ")");
  }

  PosteriorDraws draws;
  draws.variant = variant;
  draws.names = parameter_names(variant);
  draws.eta_draws = chain.retained;
  draws.draws.resize(chain.retained.rows(), chain.retained.cols());
  for (Eigen::Index r = 0; r < chain.retained.rows(); ++r) {
    const auto theta = inverse_reparametrize(variant, chain.retained.row(r).transpose());
    for (Eigen::Index c = 0; c < chain.retained.cols(); ++c) {
      draws.draws(r, c) = theta[static_cast<std::size_t>(c)];
    }
  }
  for (const auto& s : chain.samples) {
    draws.log_posteriors.push_back(s.log_density);
    draws.log_likelihoods.push_back(s.log_likelihood);
  }
  if (config.keep_unthinned) {
    draws.unthinned.resize(chain.unthinned.rows(), chain.unthinned.cols());
    for (Eigen::Index r = 0; r < chain.unthinned.rows(); ++r) {
      const auto theta = inverse_reparametrize(variant, chain.unthinned.row(r).transpose());
      for (Eigen::Index c = 0; c < chain.unthinned.cols(); ++c) {
        draws.unthinned(r, c) = theta[static_cast<std::size_t>(c)];
      }
    }
  }
  draws.meta.iterations = config.iterations;
  draws.meta.burn_in = config.burn_in;
  draws.meta.thin = config.thin;
  draws.meta.seed = config.seed;
  draws.meta.acceptance_rate = chain.acceptance_rate;
  draws.meta.final_lambda = std::exp(chain.state.log_lambda);
  return draws;
}

double quantile(std::span<const double> values, double p) {
  if (values.empty()) throw DomainError("quantile: empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile: p must lie in [0, 1]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::pair<double, double> credible_interval(std::span<const double> draws, double level) {
  if (draws.size() < 100) {
    throw DomainError("credible_interval: need at least 100 draws, got " +
                      std::to_string(draws.size()));
  }
  if (!(level > 0.0 && level < 1.0)) throw DomainError("credible_interval: level must lie in (0,1)");
  const double tail = (1.0 - level) / 2.0;
  return {quantile(draws, tail), quantile(draws, 1.0 - tail)};
}

std::pair<double, double> credible_interval(const PosteriorDraws& draws, std::string_view parameter,
                                            double level) {
  const auto col = static_cast<Eigen::Index>(draws.column(parameter));
  std::vector<double> values(static_cast<std::size_t>(draws.draws.rows()));
  for (Eigen::Index r = 0; r < draws.draws.rows(); ++r) {
    values[static_cast<std::size_t>(r)] = draws.draws(r, col);
  }
  return credible_interval(values, level);
}

}  // namespace glkinar
