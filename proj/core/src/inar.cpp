#include "glkinar/inar.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include <boost/math/distributions/chi_squared.hpp>

#include "glkinar/error.hpp"
#include "glkinar/special_fns.hpp"

namespace glkinar {

namespace {

constexpr double kTieTolerance = 1e-12;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

std::int64_t innovation_window(const Innovation& innovation) {
  return static_cast<std::int64_t>(innovation_pmf_table(innovation).probs.size()) - 1;
}

}  // namespace

std::string_view to_string(ModelVariant variant) {
  switch (variant) {
    case ModelVariant::Glk: return "glk";
    case ModelVariant::Lk: return "lk";
    case ModelVariant::Nb: return "nb";
    case ModelVariant::Gp: return "gp";
  }
  return "glk";
}

ModelVariant parse_variant(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "glk") return ModelVariant::Glk;
  if (lower == "lk") return ModelVariant::Lk;
  if (lower == "nb") return ModelVariant::Nb;
  if (lower == "gp") return ModelVariant::Gp;
  throw ConfigError("unknown model variant '" + std::string(text) + "' (expected glk|lk|nb|gp)");
}

double innovation_log_pmf(const Innovation& innovation, std::int64_t x) {
  return std::visit(Overloaded{[x](const GlkParams& p) { return glk_log_pmf(p, x); },
                               [x](const GpParams& p) { return gp_log_pmf(p, x); }},
                    innovation);
}

PmfTable innovation_pmf_table(const Innovation& innovation, double mass_tolerance,
                              std::int64_t max_support) {
  return std::visit(Overloaded{[&](const GlkParams& p) {
                                 return glk_pmf_table(p, mass_tolerance, max_support);
                               },
                               [&](const GpParams& p) {
                                 return gp_pmf_table(p, mass_tolerance, max_support);
                               }},
                    innovation);
}

GlkMoments innovation_moments(const Innovation& innovation) {
  return std::visit(Overloaded{[](const GlkParams& p) { return glk_moments(p); },
                               [](const GpParams& p) { return gp_moments(p); }},
                    innovation);
}

InarModel::InarModel(double alpha, ModelVariant variant, Innovation innovation)
    : alpha_(alpha), variant_(variant), innovation_(std::move(innovation)) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("INAR(1) needs 0 < alpha < 1, got " + std::to_string(alpha));
  }
  const bool is_gp = std::holds_alternative<GpParams>(innovation_);
  if ((variant == ModelVariant::Gp) != is_gp) {
    throw DomainError("GP variant requires GP innovation parameters and vice versa");
  }
  if (variant == ModelVariant::Lk) {
    const auto& p = std::get<GlkParams>(innovation_);
    if (std::abs(p.c() - p.beta()) > kTieTolerance) {
      throw DomainError("LK variant requires c = beta");
    }
  }
  if (variant == ModelVariant::Nb && std::get<GlkParams>(innovation_).b() != 0.0) {
    throw DomainError("NB variant requires b = 0");
  }
}

InarModel InarModel::glk(double alpha, const GlkParams& innovation) {
  return InarModel(alpha, ModelVariant::Glk, innovation);
}

InarModel InarModel::lk(double alpha, double a, double b, double beta) {
  return InarModel(alpha, ModelVariant::Lk, GlkParams(a, b, beta, beta));
}

InarModel InarModel::nb(double alpha, double a, double c, double beta) {
  return InarModel(alpha, ModelVariant::Nb, GlkParams(a, 0.0, c, beta));
}

InarModel InarModel::gp(double alpha, const GpParams& innovation) {
  return InarModel(alpha, ModelVariant::Gp, innovation);
}

const GlkParams& InarModel::glk_params() const {
  if (const auto* p = std::get_if<GlkParams>(&innovation_)) return *p;
  throw DomainError("GP model has no GLK innovation parameters");
}

CountSeries::CountSeries(std::vector<std::int64_t> values,
                         std::optional<std::vector<std::string>> timestamps)
    : values_(std::move(values)), timestamps_(std::move(timestamps)) {
  if (values_.empty()) throw DomainError("count series is empty");
  for (std::size_t t = 0; t < values_.size(); ++t) {
    if (values_[t] < 0) {
      throw DomainError("count series has a negative value at position " + std::to_string(t));
    }
  }
  if (timestamps_) {
    if (timestamps_->size() != values_.size()) {
      throw DomainError("count series labels and values differ in length");
    }
    for (std::size_t t = 1; t < timestamps_->size(); ++t) {
      if (!((*timestamps_)[t - 1] < (*timestamps_)[t])) {
        throw DomainError("count series labels are not strictly increasing at position " +
                          std::to_string(t));
      }
    }
  }
}

std::int64_t thin(double alpha, std::int64_t x, Rng& rng) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("thin: alpha must lie in [0, 1]");
  if (x <= 0 || alpha == 0.0) return 0;
  if (alpha == 1.0) return x;
  std::binomial_distribution<std::int64_t> draw(x, alpha);
  return draw(rng);
}

CountSeries simulate(const InarModel& model, std::size_t length, const InitialState& initial,
                     Rng& rng) {
  if (length == 0) throw DomainError("simulate: length must be positive");
  const TableSampler innovation(innovation_pmf_table(model.innovation()));
  const double alpha = model.alpha();

  std::int64_t state = 0;
  std::int64_t burn_in = 0;
  if (const auto* fixed = std::get_if<std::int64_t>(&initial)) {
    if (*fixed < 0) throw DomainError("simulate: negative initial state");
    state = *fixed;
  } else {
    const auto& warmup = std::get<StationaryWarmup>(initial);
    if (warmup.burn_in < 0) throw ConfigError("simulate: negative burn-in");
    burn_in = warmup.burn_in;
    const double mean = innovation_moments(model.innovation()).mean / (1.0 - alpha);
    state = static_cast<std::int64_t>(std::ceil(mean));
  }
  for (std::int64_t t = 0; t < burn_in; ++t) state = thin(alpha, state, rng) + innovation(rng);

  std::vector<std::int64_t> values;
  values.reserve(length);
  for (std::size_t t = 0; t < length; ++t) {
    state = thin(alpha, state, rng) + innovation(rng);
    values.push_back(state);
  }
  return CountSeries(std::move(values));
}

double transition_log_prob(const InarModel& model, std::int64_t i, std::int64_t j) {
  if (i < 0 || j < 0) return -std::numeric_limits<double>::infinity();
  const double log_alpha = std::log(model.alpha());
  const double log_not = std::log1p(-model.alpha());
  const std::int64_t top = std::min(i, j);
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(top) + 1);
  for (std::int64_t k = 0; k <= top; ++k) {
    terms.push_back(log_binomial(i, k) + static_cast<double>(k) * log_alpha +
                    static_cast<double>(i - k) * log_not +
                    innovation_log_pmf(model.innovation(), j - k));
  }
  return log_sum_exp(terms);
}

std::vector<std::vector<double>> truncated_transition_matrix(const InarModel& model,
                                                             std::int64_t max_state) {
  if (max_state < 0) throw ConfigError("transition matrix: negative truncation");
  const auto n = static_cast<std::size_t>(max_state) + 1;
  std::vector<double> innov(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    innov[x] = std::exp(innovation_log_pmf(model.innovation(), static_cast<std::int64_t>(x)));
  }
  std::vector<std::vector<double>> matrix(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    const auto w = binomial_pmf_window(static_cast<std::int64_t>(i), model.alpha(), max_state);
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t top = std::min(i, j);
      double sum = 0.0;
      for (std::size_t k = 0; k <= top; ++k) sum += w[k] * innov[j - k];
      matrix[i][j] = sum;
    }
  }
  return matrix;
}

StationaryDistribution stationary_distribution(const InarModel& model,
                                               std::optional<std::int64_t> max_state,
                                               double tolerance, int max_iterations) {
  const std::int64_t n_max = max_state.value_or(static_cast<std::int64_t>(
      std::ceil(static_cast<double>(innovation_window(model.innovation())) /
                (1.0 - model.alpha()))));
  const auto matrix = truncated_transition_matrix(model, n_max);
  const std::size_t n = matrix.size();

  StationaryDistribution result;
  std::vector<double> current(n, 1.0 / static_cast<double>(n));
  std::vector<double> next(n, 0.0);
  for (int it = 1; it <= max_iterations; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double weight = current[i];
      if (weight == 0.0) continue;
      const auto& row = matrix[i];
      for (std::size_t j = 0; j < n; ++j) next[j] += weight * row[j];
    }
    double total = 0.0;
    for (double v : next) total += v;
    double change = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      next[j] /= total;
      change += std::abs(next[j] - current[j]);
    }
    current.swap(next);
    result.iterations = it;
    if (change < tolerance) break;
  }
  if (result.iterations == max_iterations) {
    throw NumericalError("stationary_distribution: power iteration did not converge");
  }
  double mean = 0.0;
  for (std::size_t j = 0; j < n; ++j) mean += static_cast<double>(j) * current[j];
  double variance = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double d = static_cast<double>(j) - mean;
    variance += d * d * current[j];
  }
  result.probs = std::move(current);
  result.mean = mean;
  result.variance = variance;
  return result;
}

ConditionalMoments conditional_moments(const InarModel& model, std::int64_t x_t, int k) {
  if (k < 1) throw DomainError("conditional_moments: horizon must be at least 1");
  if (x_t < 0) throw DomainError("conditional_moments: negative state");
  const auto innov = innovation_moments(model.innovation());
  const double alpha = model.alpha();
  const double ak = std::pow(alpha, k);
  const double a2k = ak * ak;
  const double x = static_cast<double>(x_t);
  const double geometric = (1.0 - ak) / (1.0 - alpha);
  ConditionalMoments result;
  result.horizon = k;
  result.mean = ak * x + geometric * innov.mean;
  result.variance = (ak - a2k) * x + (1.0 - a2k) / (1.0 - alpha * alpha) *
                                         (innov.variance - innov.mean) +
                    geometric * innov.mean;
  return result;
}

double StationaryMoments::autocovariance(int lag) const {
  if (lag < 0) throw DomainError("autocovariance: negative lag");
  return std::pow(alpha, lag) * variance;
}

double StationaryMoments::autocorrelation(int lag) const {
  if (lag < 0) throw DomainError("autocorrelation: negative lag");
  return std::pow(alpha, lag);
}

StationaryMoments stationary_moments(const InarModel& model, int max_order) {
  if (max_order < 1 || max_order > 4) {
    throw ConfigError("stationary_moments: supported orders are 1..4, got " +
                      std::to_string(max_order));
  }
  const auto innov = innovation_moments(model.innovation());
  const double alpha = model.alpha();
  const double mu = innov.mean;
  const double var = innov.variance;

  // Raw innovation moments E[ε^m], m = 0..4.
  const double raw_eps[5] = {
      1.0,
      mu,
      var + mu * mu,
      innov.mu3 + 3.0 * mu * var + mu * mu * mu,
      innov.mu4 + 4.0 * mu * innov.mu3 + 6.0 * mu * mu * var + mu * mu * mu * mu,
  };
  const StirlingTable& stirling = shared_stirling_table();
  std::vector<double> falling_eps(5, 0.0);
  for (int m = 0; m <= 4; ++m) {
    for (int k = 0; k <= m; ++k) {
      falling_eps[m] += static_cast<double>(stirling.first_kind(m, k)) * raw_eps[k];
    }
  }

  StationaryMoments result;
  result.max_order = max_order;
  result.alpha = alpha;
  result.falling.assign(static_cast<std::size_t>(max_order) + 1, 0.0);
  result.falling[0] = 1.0;
  for (int m = 1; m <= max_order; ++m) {
    double sum = 0.0;
    for (int k = 0; k < m; ++k) {
      sum += std::exp(log_binomial(m, k)) * std::pow(alpha, k) * result.falling[k] *
             falling_eps[m - k];
    }
    result.falling[m] = sum / (1.0 - std::pow(alpha, m));
  }
  result.raw.assign(static_cast<std::size_t>(max_order) + 1, 0.0);
  for (int m = 0; m <= max_order; ++m) {
    for (int k = 0; k <= m; ++k) {
      result.raw[m] += static_cast<double>(stirling.second_kind(m, k)) * result.falling[k];
    }
  }
  result.mean = mu / (1.0 - alpha);
  result.variance = (var + alpha * mu) / (1.0 - alpha * alpha);
  result.vmr = result.variance / result.mean;
  return result;
}

ChiSquareResult two_sample_chi_square(std::span<const std::int64_t> first,
                                      std::span<const std::int64_t> second,
                                      std::int64_t min_bin_count) {
  if (first.empty() || second.empty()) throw DomainError("chi-square: empty sample");
  std::map<std::int64_t, std::pair<double, double>> counts;
  for (auto v : first) counts[v].first += 1.0;
  for (auto v : second) counts[v].second += 1.0;

  std::vector<std::pair<double, double>> bins;
  std::pair<double, double> open{0.0, 0.0};
  for (const auto& [value, c] : counts) {
    open.first += c.first;
    open.second += c.second;
    if (open.first + open.second >= static_cast<double>(min_bin_count)) {
      bins.push_back(open);
      open = {0.0, 0.0};
    }
  }
  if (open.first + open.second > 0.0) {
    if (bins.empty()) {
      bins.push_back(open);
    } else {
      bins.back().first += open.first;
      bins.back().second += open.second;
    }
  }

  const double n1 = static_cast<double>(first.size());
  const double n2 = static_cast<double>(second.size());
  const double r = std::sqrt(n2 / n1);
  ChiSquareResult result;
  for (const auto& [o1, o2] : bins) {
    const double d = r * o1 - o2 / r;
    result.statistic += d * d / (o1 + o2);
  }
  result.dof = static_cast<int>(bins.size()) - 1;
  if (result.dof < 1) {
    result.p_value = 1.0;
    return result;
  }
  boost::math::chi_squared dist(result.dof);
  result.p_value = boost::math::cdf(boost::math::complement(dist, result.statistic));
  return result;
}

std::vector<double> convolve(std::span<const double> lhs, std::span<const double> rhs) {
  if (lhs.empty() || rhs.empty()) return {};
  std::vector<double> out(lhs.size() + rhs.size() - 1, 0.0);
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    for (std::size_t j = 0; j < rhs.size(); ++j) out[i + j] += lhs[i] * rhs[j];
  }
  return out;
}

AggregationReport aggregate(std::span<const InarModel> models, std::size_t samples, Rng& rng,
                            std::int64_t spacing) {
  if (models.empty()) throw DomainError("aggregate: need at least one model");
  if (samples == 0) throw DomainError("aggregate: need a positive sample count");
  const InarModel& head = models.front();
  if (head.variant() == ModelVariant::Gp) throw DomainError("aggregate: GLK-family models only");
  const GlkParams& shared = head.glk_params();
  double a_total = 0.0;
  for (const auto& m : models) {
    if (m.variant() == ModelVariant::Gp) throw DomainError("aggregate: GLK-family models only");
    const GlkParams& p = m.glk_params();
    if (m.alpha() != head.alpha() || p.b() != shared.b() || p.c() != shared.c() ||
        p.beta() != shared.beta()) {
      throw DomainError("aggregate: models must share alpha, b, c and beta");
    }
    a_total += p.a();
  }
  const GlkParams summed(a_total, shared.b(), shared.c(), shared.beta());
  const InarModel target = InarModel::glk(head.alpha(), summed);

  AggregationReport report;
  report.samples = samples;
  report.spacing = spacing > 0 ? spacing
                               : std::max<std::int64_t>(
                                     1, static_cast<std::int64_t>(std::ceil(
                                            std::log(0.01) / std::log(head.alpha()))));

  // Innovation side: the convolution of the component pmfs against the summed pmf.
  const auto reference = glk_pmf_table(summed).probs;
  std::vector<double> conv{1.0};
  for (const auto& m : models) {
    const auto table = glk_pmf_table(m.glk_params()).probs;
    conv = convolve(conv, table);
  }
  const std::size_t window = std::min(conv.size(), reference.size());
  for (std::size_t x = 0; x < window; ++x) {
    report.innovation_max_abs_diff =
        std::max(report.innovation_max_abs_diff, std::abs(conv[x] - reference[x]));
  }

  const std::size_t path_length = samples * static_cast<std::size_t>(report.spacing);
  std::vector<std::int64_t> summed_path(path_length, 0);
  for (const auto& m : models) {
    const auto path = simulate(m, path_length, StationaryWarmup{}, rng);
    for (std::size_t t = 0; t < path_length; ++t) summed_path[t] += path.values()[t];
  }
  const auto direct = simulate(target, path_length, StationaryWarmup{}, rng);

  std::vector<std::int64_t> lhs;
  std::vector<std::int64_t> rhs;
  lhs.reserve(samples);
  rhs.reserve(samples);
  for (std::size_t t = 0; t < path_length; t += static_cast<std::size_t>(report.spacing)) {
    lhs.push_back(summed_path[t]);
    rhs.push_back(direct.values()[t]);
  }
  report.marginal_test = two_sample_chi_square(lhs, rhs);
  return report;
}

}  // namespace glkinar
