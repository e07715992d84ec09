#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "glkinar/glk_dist.hpp"
#include "glkinar/random.hpp"

namespace glkinar {

/// Nested innovation families. LK ties c = β, NB fixes b = 0, GP is the c -> 0 limit.
enum class ModelVariant { Glk, Lk, Nb, Gp };

std::string_view to_string(ModelVariant variant);
/// Accepts "glk", "lk", "nb", "gp" (case-insensitive). Throws ConfigError otherwise.
ModelVariant parse_variant(std::string_view text);

using Innovation = std::variant<GlkParams, GpParams>;

double innovation_log_pmf(const Innovation& innovation, std::int64_t x);
PmfTable innovation_pmf_table(const Innovation& innovation,
                              double mass_tolerance = kDefaultMassTolerance,
                              std::int64_t max_support = kDefaultMaxSupport);
GlkMoments innovation_moments(const Innovation& innovation);

/// X_t = α∘X_{t-1} + ε_t with ε_t iid from the innovation distribution.
class InarModel {
 public:
  /// Throws DomainError if α is outside (0,1) or the innovation does not satisfy
  /// the variant's constraint (LK: |c-β| <= 1e-12, NB: b == 0, GP: GpParams).
  InarModel(double alpha, ModelVariant variant, Innovation innovation);

  static InarModel glk(double alpha, const GlkParams& innovation);
  static InarModel lk(double alpha, double a, double b, double beta);
  static InarModel nb(double alpha, double a, double c, double beta);
  static InarModel gp(double alpha, const GpParams& innovation);

  double alpha() const noexcept { return alpha_; }
  ModelVariant variant() const noexcept { return variant_; }
  const Innovation& innovation() const noexcept { return innovation_; }

  /// Innovation parameters for the GLK-family variants; throws DomainError for GP.
  const GlkParams& glk_params() const;

 private:
  double alpha_;
  ModelVariant variant_;
  Innovation innovation_;
};

/// Observed counts with optional labels (e.g. ISO dates).
class CountSeries {
 public:
  /// Throws DomainError for an empty series, a negative value, or labels that are
  /// not strictly increasing or do not match the values in length.
  explicit CountSeries(std::vector<std::int64_t> values,
                       std::optional<std::vector<std::string>> timestamps = std::nullopt);

  const std::vector<std::int64_t>& values() const noexcept { return values_; }
  const std::optional<std::vector<std::string>>& timestamps() const noexcept {
    return timestamps_;
  }
  std::size_t size() const noexcept { return values_.size(); }

 private:
  std::vector<std::int64_t> values_;
  std::optional<std::vector<std::string>> timestamps_;
};

/// Binomial thinning α∘x: a Binomial(x, α) draw.
std::int64_t thin(double alpha, std::int64_t x, Rng& rng);

struct StationaryWarmup {
  std::int64_t burn_in = 1000;
};

/// Either a fixed X_0 or a warm-up run discarded before recording, started from ⌈μ_X⌉.
using InitialState = std::variant<std::int64_t, StationaryWarmup>;

CountSeries simulate(const InarModel& model, std::size_t length, const InitialState& initial,
                     Rng& rng);

/// ln P(X_t = j | X_{t-1} = i), accumulated term by term with log_sum_exp.
double transition_log_prob(const InarModel& model, std::int64_t i, std::int64_t j);

/// Transition matrix restricted to states 0..max_state (row-major, rows not renormalized).
std::vector<std::vector<double>> truncated_transition_matrix(const InarModel& model,
                                                             std::int64_t max_state);

struct StationaryDistribution {
  std::vector<double> probs;
  int iterations = 0;
  double mean = 0.0;
  double variance = 0.0;
};

/// Power iteration of the transition matrix truncated at max_state; when max_state is
/// not given it is the innovation support window (tolerance 1e-12) scaled by 1/(1-α).
StationaryDistribution stationary_distribution(const InarModel& model,
                                               std::optional<std::int64_t> max_state = std::nullopt,
                                               double tolerance = 1e-15,
                                               int max_iterations = 100000);

struct ConditionalMoments {
  int horizon = 1;
  double mean = 0.0;
  double variance = 0.0;
};

/// Mean and variance of X_{t+k} given X_t = x_t. Throws DomainError for k < 1.
ConditionalMoments conditional_moments(const InarModel& model, std::int64_t x_t, int k);

struct StationaryMoments {
  int max_order = 2;
  std::vector<double> raw;      ///< raw[m] = E[X^m], m = 0..max_order
  std::vector<double> falling;  ///< falling[m] = E[X(X-1)...(X-m+1)]
  double mean = 0.0;
  double variance = 0.0;
  double vmr = 0.0;
  double alpha = 0.0;

  /// γ_k = α^k σ_X².
  double autocovariance(int lag) const;
  double autocorrelation(int lag) const;
};

/// Stationary moments up to max_order (1..4) through the falling-factorial
/// recursion μ_X^{(m)} = (1-α^m)^{-1} Σ_{k<m} C(m,k) α^k μ_X^{(k)} μ_ε^{(m-k)}
/// and Stirling numbers. Throws ConfigError for max_order outside [1,4].
StationaryMoments stationary_moments(const InarModel& model, int max_order = 2);

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

/// Two-sample chi-square homogeneity test on count histograms. Adjacent values are
/// pooled until every bin holds at least min_bin_count observations in total.
ChiSquareResult two_sample_chi_square(std::span<const std::int64_t> first,
                                      std::span<const std::int64_t> second,
                                      std::int64_t min_bin_count = 10);

std::vector<double> convolve(std::span<const double> lhs, std::span<const double> rhs);

struct AggregationReport {
  ChiSquareResult marginal_test;
  /// sup_x |(p_1 * ... * p_J)(x) - p_{Σa}(x)| over the common support window.
  double innovation_max_abs_diff = 0.0;
  std::size_t samples = 0;
  std::int64_t spacing = 1;
};

/// Simulates Y_t = Σ_j X_{jt} from independent models sharing α, b, c, β and a
/// single model with a = Σ a_j, then compares their marginals. Paths are recorded
/// every `spacing` steps so the compared values are close to independent; a zero
/// spacing picks the smallest lag with α^lag < 0.01.
/// Throws DomainError for fewer than one model, non-GLK variants or mismatched shared parameters.
AggregationReport aggregate(std::span<const InarModel> models, std::size_t samples, Rng& rng,
                            std::int64_t spacing = 0);

}  // namespace glkinar
