#include "glkinar/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <boost/math/distributions/chi_squared.hpp>

#include "glkinar/error.hpp"
#include "glkinar/special_fns.hpp"

namespace glkinar {

namespace {

double mean_of(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

// Batch means with ⌊√n⌋ batches of equal size; trailing remainder dropped.
double batch_means_se(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 4) throw DomainError("batch means need at least 4 draws");
  const auto batches = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
  const std::size_t size = n / batches;
  std::vector<double> means(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    means[b] = mean_of(x.subspan(b * size, size));
  }
  const double grand = mean_of(means);
  double ss = 0.0;
  for (double m : means) ss += (m - grand) * (m - grand);
  const double var_batch = ss / static_cast<double>(batches - 1);
  return std::sqrt(var_batch / static_cast<double>(batches));
}

void require_length(std::span<const double> chain, std::size_t n, const char* what) {
  if (chain.size() < n) {
    throw DomainError(std::string(what) + ": need at least " + std::to_string(n) +
                      " draws, got " + std::to_string(chain.size()));
  }
}

std::vector<double> column_of(const Eigen::MatrixXd& m, Eigen::Index c) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) out[static_cast<std::size_t>(r)] = m(r, c);
  return out;
}

class AutoCov {
 public:
  explicit AutoCov(std::span<const double> x) : centered_(x.begin(), x.end()) {
    const double m = mean_of(x);
    for (double& v : centered_) v -= m;
    c0_ = at(0);
  }
  double at(std::size_t lag) const {
    const std::size_t n = centered_.size();
    double s = 0.0;
    for (std::size_t t = lag; t < n; ++t) s += centered_[t] * centered_[t - lag];
    return s / static_cast<double>(n);
  }
  double rho(std::size_t lag) const { return at(lag) / c0_; }
  double c0() const { return c0_; }

 private:
  std::vector<double> centered_;
  double c0_ = 0.0;
};

}  // namespace

bool is_constant(std::span<const double> chain) {
  return std::all_of(chain.begin(), chain.end(), [&](double v) { return v == chain.front(); });
}

std::vector<double> acf(std::span<const double> chain, std::size_t max_lag) {
  if (max_lag >= chain.size()) {
    throw DomainError("acf: lag " + std::to_string(max_lag) + " is not below the chain length " +
                      std::to_string(chain.size()));
  }
  if (is_constant(chain)) throw DomainError("acf: chain is constant");
  const AutoCov cov(chain);
  std::vector<double> out(max_lag + 1);
  out[0] = 1.0;
  for (std::size_t k = 1; k <= max_lag; ++k) out[k] = cov.rho(k);
  return out;
}

EssIneff ess_and_ineff(std::span<const double> chain) {
  require_length(chain, 100, "ess_and_ineff");
  if (is_constant(chain)) throw DomainError("ess_and_ineff: chain is constant");
  const AutoCov cov(chain);
  const std::size_t n = chain.size();
  // Γ_m = ρ_{2m} + ρ_{2m+1}; sum while positive. ineff = -1 + 2 Σ Γ_m = 1 + 2 Σ_{k≥1} ρ_k.
  double sum = 0.0;
  std::size_t last = 0;
  for (std::size_t m = 0; 2 * m + 1 < n; ++m) {
    const double gamma = (m == 0 ? 1.0 : cov.rho(2 * m)) + cov.rho(2 * m + 1);
    if (gamma <= 0.0) break;
    sum += gamma;
    last = 2 * m + 1;
  }
  EssIneff out;
  out.ineff = std::max(-1.0 + 2.0 * sum, 1e-12);
  out.ess_ratio = 1.0 / out.ineff;
  out.truncation_lag = last;
  return out;
}

double nse(std::span<const double> chain) {
  require_length(chain, 100, "nse");
  return batch_means_se(chain);
}

GewekeResult geweke(std::span<const double> chain, double first_fraction, double last_fraction) {
  if (!(first_fraction > 0.0 && last_fraction > 0.0 && first_fraction + last_fraction <= 1.0)) {
    throw ConfigError("geweke: windows must be non-empty and must not overlap");
  }
  const std::size_t n = chain.size();
  const auto n_first = static_cast<std::size_t>(std::floor(first_fraction * static_cast<double>(n)));
  const auto n_last = static_cast<std::size_t>(std::floor(last_fraction * static_cast<double>(n)));
  if (n_first < 4 || n_last < 4) throw DomainError("geweke: chain too short for the windows");
  const auto first = chain.first(n_first);
  const auto last = chain.last(n_last);
  const double se2 = std::pow(batch_means_se(first), 2) + std::pow(batch_means_se(last), 2);
  GewekeResult out;
  const double diff = mean_of(first) - mean_of(last);
  if (se2 <= 0.0) {
    out.z = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
  } else {
    out.z = diff / std::sqrt(se2);
  }
  out.p_value = std::erfc(std::abs(out.z) / std::sqrt(2.0));
  return out;
}

const ParameterDiagnostics& ChainDiagnostics::at(std::string_view name) const {
  for (const auto& p : parameters) {
    if (p.name == name) return p;
  }
  throw DomainError("no diagnostics for parameter '" + std::string(name) + "'");
}

ChainDiagnostics diagnose(const Eigen::MatrixXd& draws, const std::vector<std::string>& names,
                          std::span<const std::size_t> lags) {
  if (static_cast<std::size_t>(draws.cols()) != names.size()) {
    throw ConfigError("diagnose: column count does not match the parameter names");
  }
  const auto n = static_cast<std::size_t>(draws.rows());
  for (std::size_t lag : lags) {
    if (lag >= n) {
      throw ConfigError("diagnose: lag " + std::to_string(lag) + " is not below the chain length " +
                        std::to_string(n));
    }
  }
  ChainDiagnostics out;
  out.draws = n;
  for (Eigen::Index c = 0; c < draws.cols(); ++c) {
    const auto x = column_of(draws, c);
    ParameterDiagnostics p;
    p.name = names[static_cast<std::size_t>(c)];
    p.mean = mean_of(x);
    double ss = 0.0;
    for (double v : x) ss += (v - p.mean) * (v - p.mean);
    p.sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    p.constant = is_constant(x);
    if (!p.constant) {
      const AutoCov cov(x);
      for (std::size_t lag : lags) p.acf[lag] = lag == 0 ? 1.0 : cov.rho(lag);
      if (n >= 100) {
        const EssIneff e = ess_and_ineff(x);
        p.ess_ratio = e.ess_ratio;
        p.ineff = e.ineff;
        p.nse = nse(x);
      }
      if (n >= 40) {
        const GewekeResult g = geweke(x);
        p.geweke_z = g.z;
        p.geweke_p = g.p_value;
      }
    }
    out.parameters.push_back(std::move(p));
  }
  return out;
}

Eigen::MatrixXd thin_rows(const Eigen::MatrixXd& draws, std::size_t thin) {
  if (thin == 0) throw ConfigError("thinning factor must be positive");
  const auto n = static_cast<std::size_t>(draws.rows()) / thin;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n), draws.cols());
  for (std::size_t i = 0; i < n; ++i) {
    out.row(static_cast<Eigen::Index>(i)) = draws.row(static_cast<Eigen::Index>((i + 1) * thin - 1));
  }
  return out;
}

DicResult dic(const PosteriorDraws& draws, const CountSeries& data) {
  if (draws.size() == 0) throw DomainError("dic: no draws");
  if (draws.log_likelihoods.size() != draws.size()) {
    throw DomainError("dic: log-likelihood values missing for the draws");
  }
  DicResult out;
  out.mean_log_likelihood = mean_of(draws.log_likelihoods);
  const Eigen::VectorXd mean = draws.draws.colwise().mean().transpose();
  out.estimate.assign(mean.data(), mean.data() + mean.size());
  if (!admissible(draws.variant, out.estimate)) {
    const auto best = std::max_element(draws.log_posteriors.begin(), draws.log_posteriors.end());
    const auto row = static_cast<Eigen::Index>(best - draws.log_posteriors.begin());
    for (Eigen::Index c = 0; c < draws.draws.cols(); ++c) {
      out.estimate[static_cast<std::size_t>(c)] = draws.draws(row, c);
    }
    out.used_fallback = true;
  }
  out.log_likelihood_at_estimate = log_likelihood(to_model(draws.variant, out.estimate), data);
  out.dic = -4.0 * out.mean_log_likelihood + 2.0 * out.log_likelihood_at_estimate;
  return out;
}

MarginalLikelihood gelfand_dey(const Eigen::MatrixXd& eta_draws, std::span<const double> log_joint,
                               std::span<const double> log_likelihoods, double mass) {
  const auto n = static_cast<std::size_t>(eta_draws.rows());
  if (n < 2 || log_joint.size() != n || log_likelihoods.size() != n) {
    throw DomainError("gelfand_dey: draws and log densities must have matching, non-trivial length");
  }
  if (!(mass > 0.0 && mass < 1.0)) throw ConfigError("gelfand_dey: mass must lie in (0, 1)");
  const Eigen::Index q = eta_draws.cols();
  const Eigen::VectorXd mu = eta_draws.colwise().mean().transpose();
  const Eigen::MatrixXd centered = eta_draws.rowwise() - mu.transpose();
  Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  for (double jitter = 1e-12; llt.info() != Eigen::Success; jitter *= 10.0) {
    if (jitter > 1.0) throw NumericalError("gelfand_dey: draw covariance is not positive definite");
    llt.compute(cov + jitter * Eigen::MatrixXd::Identity(q, q));
  }
  const Eigen::MatrixXd L = llt.matrixL();
  const double log_det = 2.0 * L.diagonal().array().log().sum();
  const double radius2 =
      boost::math::quantile(boost::math::chi_squared(static_cast<double>(q)), mass);
  constexpr double kLog2Pi = 1.8378770664093454835606594728112;
  const double log_norm = -0.5 * (static_cast<double>(q) * kLog2Pi + log_det) - std::log(mass);

  // ln(1/m) ≈ ln mean_j f(η_j)/joint(η_j)
  std::vector<double> log_w;
  log_w.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    const Eigen::VectorXd z =
        L.triangularView<Eigen::Lower>().solve(centered.row(static_cast<Eigen::Index>(j)).transpose());
    const double d2 = z.squaredNorm();
    if (d2 > radius2) continue;
    log_w.push_back(log_norm - 0.5 * d2 - log_joint[j]);
  }
  MarginalLikelihood out;
  out.inside_fraction = static_cast<double>(log_w.size()) / static_cast<double>(n);
  if (log_w.empty()) throw NumericalError("gelfand_dey: no draws inside the truncation region");
  const double lse = log_sum_exp(log_w);
  out.gelfand_dey = std::log(static_cast<double>(n)) - lse;
  double sq = 0.0;
  for (double lw : log_w) sq += std::exp(2.0 * (lw - lse));
  out.weight_ess = 1.0 / sq;
  out.flagged = out.weight_ess < 50.0;

  std::vector<double> neg_ll(n);
  for (std::size_t j = 0; j < n; ++j) neg_ll[j] = -log_likelihoods[j];
  out.harmonic_mean = std::log(static_cast<double>(n)) - log_sum_exp(neg_ll);
  return out;
}

MarginalLikelihood log_marginal_likelihood(const PosteriorDraws& draws) {
  if (draws.size() < 500) {
    throw DomainError("log_marginal_likelihood: need at least 500 retained draws, got " +
                      std::to_string(draws.size()));
  }
  return gelfand_dey(draws.eta_draws, draws.log_posteriors, draws.log_likelihoods);
}

ModelScore score(const PosteriorDraws& draws, const CountSeries& data) {
  const DicResult d = dic(draws, data);
  const MarginalLikelihood m = log_marginal_likelihood(draws);
  ModelScore s;
  s.dic = d.dic;
  s.mean_log_likelihood = d.mean_log_likelihood;
  s.log_likelihood_at_estimate = d.log_likelihood_at_estimate;
  s.dic_fallback = d.used_fallback;
  s.log_marginal_likelihood = m.gelfand_dey;
  s.harmonic_mean_log_marginal = m.harmonic_mean;
  s.marginal_flagged = m.flagged;
  return s;
}

}  // namespace glkinar
