#include "glkinar/glk_dist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "glkinar/error.hpp"
#include "glkinar/special_fns.hpp"

namespace glkinar {

namespace {

constexpr double kClassifyTolerance = 1e-12;

std::string describe(double a, double b, double c, double beta) {
  return "(a=" + std::to_string(a) + ", b=" + std::to_string(b) + ", c=" + std::to_string(c) +
         ", beta=" + std::to_string(beta) + ")";
}

void check_tolerance(double mass_tolerance) {
  if (!(mass_tolerance > 0.0 && mass_tolerance < 1.0)) {
    throw ConfigError("pmf table: mass tolerance must lie in (0, 1)");
  }
}

template <typename LogPmf>
PmfTable build_table(LogPmf&& log_pmf, double mass_tolerance, std::int64_t max_support) {
  check_tolerance(mass_tolerance);
  if (max_support < 0) throw ConfigError("pmf table: negative support cap");
  PmfTable table;
  const double target = 1.0 - mass_tolerance;
  for (std::int64_t x = 0; x <= max_support; ++x) {
    const double p = std::exp(log_pmf(x));
    table.probs.push_back(p);
    table.mass += p;
    if (table.mass >= target) return table;
  }
  table.truncated = true;
  return table;
}

}  // namespace

GlkParams::GlkParams(double a, double b, double c, double beta) : a_(a), b_(b), c_(c), beta_(beta) {
  if (!(std::isfinite(a) && std::isfinite(b) && std::isfinite(c) && std::isfinite(beta))) {
    throw DomainError("GLK parameters must be finite " + describe(a, b, c, beta));
  }
  if (!(a > 0.0 && c > 0.0 && b >= 0.0 && beta > 0.0 && beta < 1.0)) {
    throw DomainError("GLK parameters need a>0, b>=0, c>0, 0<beta<1 " + describe(a, b, c, beta));
  }
  if (!(kappa() > 0.0)) {
    throw DomainError("GLK parameters need kappa = 1 - beta - b*beta/c > 0 " +
                      describe(a, b, c, beta));
  }
}

bool GlkParams::admissible(double a, double b, double c, double beta) noexcept {
  if (!(std::isfinite(a) && std::isfinite(b) && std::isfinite(c) && std::isfinite(beta))) {
    return false;
  }
  if (!(a > 0.0 && c > 0.0 && b >= 0.0 && beta > 0.0 && beta < 1.0)) return false;
  return 1.0 - beta - b * beta / c > 0.0;
}

GpParams::GpParams(double theta, double lambda) : theta_(theta), lambda_(lambda) {
  if (!admissible(theta, lambda)) {
    throw DomainError("GP parameters need theta > 0 and 0 <= lambda < 1/theta (theta=" +
                      std::to_string(theta) + ", lambda=" + std::to_string(lambda) + ")");
  }
}

bool GpParams::admissible(double theta, double lambda) noexcept {
  return std::isfinite(theta) && std::isfinite(lambda) && theta > 0.0 && lambda >= 0.0 &&
         theta * lambda < 1.0;
}

double glk_log_pmf(const GlkParams& params, std::int64_t x) {
  if (x < 0) return -std::numeric_limits<double>::infinity();
  const double xd = static_cast<double>(x);
  const double a_over_c = params.a() / params.c();
  const double shape = a_over_c + xd * params.b() / params.c();
  return xd * std::log(params.beta()) + std::log(a_over_c) - std::log(shape + xd) +
         shape * std::log1p(-params.beta()) + log_rising_factorial(shape + 1.0, x) -
         log_factorial(x);
}

PmfTable glk_pmf_table(const GlkParams& params, double mass_tolerance, std::int64_t max_support) {
  if (params.b() == 0.0) {
    // Negative Binomial: the rising factorial advances by one factor per step.
    const double r = params.a() / params.c();
    const double log_beta = std::log(params.beta());
    double log_p = r * std::log1p(-params.beta());
    return build_table(
        [&](std::int64_t x) {
          if (x > 0) log_p += log_beta + std::log((r + static_cast<double>(x) - 1.0) / x);
          return log_p;
        },
        mass_tolerance, max_support);
  }
  return build_table([&](std::int64_t x) { return glk_log_pmf(params, x); }, mass_tolerance,
                     max_support);
}

std::vector<double> glk_truncated_pmf_recursion(double a, double b, double c, double beta,
                                                std::int64_t max_support) {
  if (!(a > 0.0 && c > 0.0 && beta > 0.0 && beta < 1.0)) {
    throw DomainError("truncated recursion needs a>0, c>0, 0<beta<1 " + describe(a, b, c, beta));
  }
  if (a + b == 0.0) throw DomainError("truncated recursion: a + b = 0 leaves V undefined");
  if (max_support < 0) throw ConfigError("truncated recursion: negative support");

  const double u = a * beta / c;
  const double v = u * (b + c) / (a + b);
  std::vector<double> weights(static_cast<std::size_t>(max_support) + 1, 0.0);
  weights[0] = 1.0;
  double total = 1.0;
  for (std::int64_t i = 1; i <= max_support; ++i) {
    const double j = static_cast<double>(i - 1);
    const double ratio = std::max(0.0, (u + v * j) / (a + j));
    weights[static_cast<std::size_t>(i)] = weights[static_cast<std::size_t>(i - 1)] * ratio;
    if (weights[static_cast<std::size_t>(i)] == 0.0) break;
    total += weights[static_cast<std::size_t>(i)];
  }
  for (double& w : weights) w /= total;
  return weights;
}

GlkMoments glk_moments(const GlkParams& params) {
  const double a = params.a();
  const double b = params.b();
  const double c = params.c();
  const double beta = params.beta();
  const double kappa = params.kappa();
  const double theta = params.theta();

  GlkMoments m;
  m.mean = a * theta / kappa;
  m.variance = (1.0 - beta) * a * theta / std::pow(kappa, 3);
  m.mu3 = a * theta * (1.0 - 2.0 * beta) * (1.0 - beta) / std::pow(kappa, 4) +
          3.0 * a * theta * theta * (1.0 - beta) * (1.0 - beta) * (b + c) / std::pow(kappa, 5);

  // Fourth cumulant from the cumulant generating function of the pgf.
  const double k2 = kappa * kappa;
  const double b2 = beta * beta;
  const double poly = 15.0 - 20.0 * kappa + 6.0 * k2 - 30.0 * beta + 30.0 * beta * kappa -
                      6.0 * beta * k2 + 15.0 * b2 - 10.0 * b2 * kappa + b2 * k2;
  const double cumulant4 = a * theta * (1.0 - beta) * poly / std::pow(kappa, 7);
  m.mu4 = cumulant4 + 3.0 * m.variance * m.variance;

  m.vmr = (1.0 - beta) / k2;
  m.cv = std::sqrt((1.0 - beta) / (a * theta * kappa));
  m.skewness = m.mu3 / std::pow(m.variance, 1.5);
  m.kurtosis = m.mu4 / (m.variance * m.variance);
  return m;
}

double glk_pgf(const GlkParams& params, double u) {
  if (!(u >= 0.0 && u <= 1.0)) throw DomainError("glk_pgf: u must lie in [0, 1]");
  const double beta = params.beta();
  const double power = params.a() / params.c();
  if (u == 1.0) return 1.0;
  if (u == 0.0) return std::pow(1.0 - beta, power);

  const double exponent = params.b() / params.c();
  auto map = [&](double z) { return u * std::pow((1.0 - beta) / (1.0 - beta * z), exponent); };

  constexpr int kMaxIterations = 10000;
  constexpr double kTolerance = 1e-14;
  double z = u;
  double previous_step = 0.0;
  for (int it = 0; it < kMaxIterations; ++it) {
    double next = map(z);
    const double step = next - z;
    if (step * previous_step < 0.0) next = z + 0.5 * step;  // damp oscillation
    if (std::abs(next - z) <= kTolerance) {
      return std::pow((1.0 - beta) / (1.0 - beta * next), power);
    }
    previous_step = next - z;
    z = next;
  }
  throw NumericalError("glk_pgf: fixed-point iteration did not converge");
}

double gp_log_pmf(const GpParams& params, std::int64_t x) {
  if (x < 0) return -std::numeric_limits<double>::infinity();
  const double theta = params.theta();
  const double d = params.dispersion();
  const double xd = static_cast<double>(x);
  if (x == 0) return -theta;
  return std::log(theta) + (xd - 1.0) * std::log(theta + d * xd) - theta - d * xd -
         log_factorial(x);
}

GlkMoments gp_moments(const GpParams& params) {
  const double theta = params.theta();
  const double d = params.dispersion();
  const double q = 1.0 - d;
  GlkMoments m;
  m.mean = theta / q;
  m.variance = theta / std::pow(q, 3);
  m.mu3 = theta * (1.0 + 2.0 * d) / std::pow(q, 5);
  m.mu4 = 3.0 * theta * theta / std::pow(q, 6) +
          theta * (1.0 + 8.0 * d + 6.0 * d * d) / std::pow(q, 7);
  m.vmr = m.variance / m.mean;
  m.cv = std::sqrt(m.variance) / m.mean;
  m.skewness = m.mu3 / std::pow(m.variance, 1.5);
  m.kurtosis = m.mu4 / (m.variance * m.variance);
  return m;
}

PmfTable gp_pmf_table(const GpParams& params, double mass_tolerance, std::int64_t max_support) {
  return build_table([&](std::int64_t x) { return gp_log_pmf(params, x); }, mass_tolerance,
                     max_support);
}

std::string_view to_string(GlkFamily family) {
  switch (family) {
    case GlkFamily::NegativeBinomial: return "NegativeBinomial";
    case GlkFamily::Katz: return "Katz";
    case GlkFamily::LagrangianKatz: return "LagrangianKatz";
    case GlkFamily::GeneralGlk: return "GeneralGLK";
  }
  return "GeneralGLK";
}

SpecialCase special_case_of(const GlkParams& params) {
  const bool tied = std::abs(params.c() - params.beta()) <= kClassifyTolerance;
  SpecialCase result;
  if (params.b() == 0.0) {
    result.family = tied ? GlkFamily::Katz : GlkFamily::NegativeBinomial;
    result.nb_size = params.a() / params.c();
    result.nb_prob = 1.0 - params.beta();
  } else if (tied) {
    result.family = GlkFamily::LagrangianKatz;
  }
  return result;
}

TableSampler::TableSampler(PmfTable table) : truncated_(table.truncated) {
  if (table.probs.empty()) throw ConfigError("TableSampler: empty table");
  cdf_.resize(table.probs.size());
  double running = 0.0;
  for (std::size_t i = 0; i < table.probs.size(); ++i) {
    running += table.probs[i];
    cdf_[i] = running;
  }
}

std::int64_t TableSampler::operator()(Rng& rng) const {
  const double u = uniform01(rng);
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) return static_cast<std::int64_t>(cdf_.size()) - 1;
  return static_cast<std::int64_t>(it - cdf_.begin());
}

SampleBatch glk_sample(const GlkParams& params, Rng& rng, std::size_t n) {
  const TableSampler sampler(glk_pmf_table(params, kDefaultMassTolerance));
  SampleBatch batch;
  batch.truncated = sampler.truncated();
  batch.values.reserve(n);
  for (std::size_t i = 0; i < n; ++i) batch.values.push_back(sampler(rng));
  return batch;
}

}  // namespace glkinar
