#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "glkinar/bayes.hpp"

namespace glkinar {

/// Biased sample autocorrelations ρ̂_0..ρ̂_max_lag (denominator N at every lag).
/// Throws DomainError for a constant chain or max_lag >= length.
std::vector<double> acf(std::span<const double> chain, std::size_t max_lag);

/// True when every element equals the first; ACF-based statistics are undefined then.
bool is_constant(std::span<const double> chain);

struct EssIneff {
  double ess_ratio = 1.0;
  double ineff = 1.0;
  std::size_t truncation_lag = 0;  ///< last lag included in the sum
};

/// ineff = 1 + 2 Σ ρ̂_k, summed over Geyer's initial positive sequence of
/// paired autocorrelations; ess_ratio = 1/ineff. Needs length >= 100.
EssIneff ess_and_ineff(std::span<const double> chain);

/// Batch-means standard error of the chain mean with ⌊√N⌋ batches. Needs length >= 100.
double nse(std::span<const double> chain);

struct GewekeResult {
  double z = 0.0;
  double p_value = 1.0;
};

/// Compares the mean of the first `first_fraction` of the chain with the mean of
/// the last `last_fraction`; each window's standard error uses batch means.
/// Throws ConfigError when the windows overlap or are empty.
GewekeResult geweke(std::span<const double> chain, double first_fraction = 0.1,
                    double last_fraction = 0.5);

struct ParameterDiagnostics {
  std::string name;
  /// Set when the chain never moved; the statistics below are then empty.
  bool constant = false;
  std::map<std::size_t, double> acf;
  std::optional<double> ess_ratio;
  std::optional<double> ineff;
  std::optional<double> nse;
  std::optional<double> geweke_z;
  std::optional<double> geweke_p;
  double mean = 0.0;
  double sd = 0.0;
};

struct ChainDiagnostics {
  std::vector<ParameterDiagnostics> parameters;
  std::optional<double> acceptance_rate;
  std::size_t draws = 0;

  const ParameterDiagnostics& at(std::string_view name) const;
};

/// Column-wise diagnostics of a draw matrix (rows = draws). Lags beyond the chain
/// length throw ConfigError.
ChainDiagnostics diagnose(const Eigen::MatrixXd& draws, const std::vector<std::string>& names,
                          std::span<const std::size_t> lags);

/// Every `thin`-th row starting with row thin-1, matching the sampler's retention rule.
Eigen::MatrixXd thin_rows(const Eigen::MatrixXd& draws, std::size_t thin);

struct DicResult {
  double dic = 0.0;
  double mean_log_likelihood = 0.0;
  double log_likelihood_at_estimate = 0.0;
  std::vector<double> estimate;
  /// The posterior mean was inadmissible; the highest-posterior draw was used instead.
  bool used_fallback = false;
};

/// DIC = -(4/N) Σ_j log p(X|θ_j) + 2 log p(X|θ̂), θ̂ the posterior mean.
DicResult dic(const PosteriorDraws& draws, const CountSeries& data);

struct MarginalLikelihood {
  double gelfand_dey = 0.0;
  double harmonic_mean = 0.0;
  double weight_ess = 0.0;      ///< effective sample size of the importance weights
  double inside_fraction = 0.0;  ///< share of draws inside the truncation ellipsoid
  bool flagged = false;          ///< weight ESS below 50
};

/// Gelfand–Dey estimate of log m(X) from draws in an unconstrained space and the
/// matching log joint density ln p(X|η) + ln π(η). The weighting density is the
/// normal fitted to the draws, truncated to its `mass` ellipsoid. The harmonic-mean
/// estimate uses the log-likelihood values alone.
MarginalLikelihood gelfand_dey(const Eigen::MatrixXd& eta_draws, std::span<const double> log_joint,
                               std::span<const double> log_likelihoods, double mass = 0.95);

/// Needs >= 500 retained draws.
MarginalLikelihood log_marginal_likelihood(const PosteriorDraws& draws);

struct ModelScore {
  double dic = 0.0;
  double log_marginal_likelihood = 0.0;
  double harmonic_mean_log_marginal = 0.0;
  double mean_log_likelihood = 0.0;
  double log_likelihood_at_estimate = 0.0;
  bool dic_fallback = false;
  bool marginal_flagged = false;
};

ModelScore score(const PosteriorDraws& draws, const CountSeries& data);

}  // namespace glkinar
