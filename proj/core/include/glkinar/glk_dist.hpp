#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "glkinar/random.hpp"

namespace glkinar {

/// Parameters of the Generalized Lagrangian Katz distribution GLK(a, b, c, β).
///
/// Valid region: a > 0, b >= 0, c > 0, 0 < β < 1, and κ = 1 - β - bβ/c > 0 so
/// that the mean is finite. The constructor throws DomainError otherwise.
class GlkParams {
 public:
  GlkParams(double a, double b, double c, double beta);

  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  double c() const noexcept { return c_; }
  double beta() const noexcept { return beta_; }

  /// κ = 1 - β - bβ/c.
  double kappa() const noexcept { return 1.0 - beta_ - b_ * beta_ / c_; }
  /// θ = β/c.
  double theta() const noexcept { return beta_ / c_; }

  /// Returns true when (a, b, c, β) would construct without throwing.
  static bool admissible(double a, double b, double c, double beta) noexcept;

  friend bool operator==(const GlkParams&, const GlkParams&) = default;

 private:
  double a_;
  double b_;
  double c_;
  double beta_;
};

/// Generalized Poisson distribution reached as the c -> 0 limit of GLK with
/// λ = b/a and θ = aβ/c held fixed. In this parameterization the mass function is
///   θ (θ + θλx)^{x-1} e^{-θ - θλx} / x!,
/// i.e. the Consul form with dispersion θλ. Requires θ > 0 and 0 <= λ < 1/θ;
/// λ = 0 is the Poisson distribution.
class GpParams {
 public:
  GpParams(double theta, double lambda);

  double theta() const noexcept { return theta_; }
  double lambda() const noexcept { return lambda_; }
  /// θλ, the dispersion in the Consul parameterization; lies in [0, 1).
  double dispersion() const noexcept { return theta_ * lambda_; }

  static bool admissible(double theta, double lambda) noexcept;

  friend bool operator==(const GpParams&, const GpParams&) = default;

 private:
  double theta_;
  double lambda_;
};

struct GlkMoments {
  double mean = 0.0;
  double variance = 0.0;
  double mu3 = 0.0;  ///< third central moment
  double mu4 = 0.0;  ///< fourth central moment
  double cv = 0.0;
  double vmr = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;
};

/// A finite window p_0..p_N of a count distribution.
struct PmfTable {
  std::vector<double> probs;
  double mass = 0.0;       ///< Σ probs
  bool truncated = false;  ///< the support cap was hit before the mass tolerance
};

inline constexpr std::int64_t kDefaultMaxSupport = 100000;
inline constexpr double kDefaultMassTolerance = 1e-12;

double glk_log_pmf(const GlkParams& params, std::int64_t x);

/// p_0..p_N with N the first index whose cumulative mass reaches 1 - mass_tolerance,
/// or max_support if that comes first (then `truncated` is set).
/// Throws ConfigError unless 0 < mass_tolerance < 1.
PmfTable glk_pmf_table(const GlkParams& params, double mass_tolerance = kDefaultMassTolerance,
                       std::int64_t max_support = kDefaultMaxSupport);

/// Ratio recursion p_i = p_0 Π_{j<i} max{0, (U + Vj)/(a + j)}, U = aβ/c,
/// V = U(b+c)/(a+b), normalized over 0..max_support. b may be negative here.
/// This recursion does not reproduce glk_log_pmf in general; it exists for
/// truncated variants with negative b and is never used as the default pmf.
/// Throws DomainError when a + b == 0 or a, c, β are out of range.
std::vector<double> glk_truncated_pmf_recursion(double a, double b, double c, double beta,
                                                std::int64_t max_support);

GlkMoments glk_moments(const GlkParams& params);

/// H(u) = ((1-β)/(1-βz))^{a/c} where z solves z = u((1-β)/(1-βz))^{b/c}.
/// The fixed point is found by damped iteration to 1e-14.
/// Throws DomainError for u outside [0,1], NumericalError after 10000 iterations.
double glk_pgf(const GlkParams& params, double u);

double gp_log_pmf(const GpParams& params, std::int64_t x);
GlkMoments gp_moments(const GpParams& params);
PmfTable gp_pmf_table(const GpParams& params, double mass_tolerance = kDefaultMassTolerance,
                      std::int64_t max_support = kDefaultMaxSupport);

enum class GlkFamily { NegativeBinomial, Katz, LagrangianKatz, GeneralGlk };

std::string_view to_string(GlkFamily family);

struct SpecialCase {
  GlkFamily family = GlkFamily::GeneralGlk;
  /// Negative Binomial size and success probability; set for b = 0.
  double nb_size = 0.0;
  double nb_prob = 0.0;
};

/// b == 0 exactly -> Negative Binomial (r = a/c, p = 1-β), or Katz when also
/// |c - β| <= 1e-12; |c - β| <= 1e-12 alone -> Lagrangian Katz.
SpecialCase special_case_of(const GlkParams& params);

/// Inversion sampler over a cached cumulative table.
class TableSampler {
 public:
  explicit TableSampler(PmfTable table);

  std::int64_t operator()(Rng& rng) const;

  bool truncated() const noexcept { return truncated_; }
  std::int64_t support_size() const noexcept { return static_cast<std::int64_t>(cdf_.size()); }

 private:
  std::vector<double> cdf_;
  bool truncated_;
};

struct SampleBatch {
  std::vector<std::int64_t> values;
  bool truncated = false;
};

/// n independent draws by inversion against glk_pmf_table(params, 1e-12).
SampleBatch glk_sample(const GlkParams& params, Rng& rng, std::size_t n);

}  // namespace glkinar
