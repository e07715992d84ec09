#include "report.hpp"

#include <chrono>
#include <cmath>

#include "cli.hpp"
#include "glkinar/error.hpp"

namespace glkinar::cli {

namespace {

Json number_or_null(std::optional<double> v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

std::vector<double> column(const Eigen::MatrixXd& m, Eigen::Index c) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) out[static_cast<std::size_t>(r)] = m(r, c);
  return out;
}

std::string_view family_name(const Innovation& innovation) {
  if (std::holds_alternative<GpParams>(innovation)) return "generalized_poisson";
  switch (special_case_of(std::get<GlkParams>(innovation)).family) {
    case GlkFamily::NegativeBinomial: return "negative_binomial";
    case GlkFamily::Katz: return "katz";
    case GlkFamily::LagrangianKatz: return "lagrangian_katz";
    case GlkFamily::GeneralGlk: return "glk";
  }
  return "glk";
}

}  // namespace

Json moments_json(const GlkMoments& m) {
  Json j;
  j["mean"] = m.mean;
  j["variance"] = m.variance;
  j["vmr"] = m.vmr;
  j["cv"] = m.cv;
  j["skewness"] = m.skewness;
  j["kurtosis"] = m.kurtosis;
  j["mu3"] = m.mu3;
  j["mu4"] = m.mu4;
  return j;
}

Json moments_report(const Innovation& innovation, ModelVariant variant, std::optional<double> alpha,
                    std::span<const int> lags) {
  Json report;
  report["schema_version"] = kSchemaVersion;
  report["variant"] = std::string(to_string(variant));
  Json innov = moments_json(innovation_moments(innovation));
  innov["family"] = std::string(family_name(innovation));
  report["innovation"] = innov;
  if (alpha) {
    const InarModel model(*alpha, variant, innovation);
    const StationaryMoments s = stationary_moments(model, 2);
    Json process;
    process["alpha"] = *alpha;
    process["mean"] = s.mean;
    process["variance"] = s.variance;
    process["vmr"] = s.vmr;
    Json gamma = Json::object();
    Json rho = Json::object();
    for (int k : lags) {
      gamma[std::to_string(k)] = s.autocovariance(k);
      rho[std::to_string(k)] = s.autocorrelation(k);
    }
    process["autocovariance"] = gamma;
    process["autocorrelation"] = rho;
    report["process"] = process;
  }
  return report;
}

Json diagnostics_json(const ChainDiagnostics& d) {
  Json j;
  j["draws"] = d.draws;
  if (d.acceptance_rate) j["acceptance_rate"] = *d.acceptance_rate;
  Json params = Json::object();
  for (const auto& p : d.parameters) {
    Json e;
    e["mean"] = p.mean;
    e["sd"] = p.sd;
    e["constant"] = p.constant;
    Json acf = Json::object();
    for (const auto& [lag, value] : p.acf) acf[std::to_string(lag)] = value;
    e["acf"] = acf;
    e["ess_ratio"] = number_or_null(p.ess_ratio);
    e["ineff"] = number_or_null(p.ineff);
    e["nse"] = number_or_null(p.nse);
    e["geweke_z"] = number_or_null(p.geweke_z);
    e["geweke_p"] = number_or_null(p.geweke_p);
    params[p.name] = e;
  }
  j["parameters"] = params;
  return j;
}

Json summary_json(std::span<const double> values) {
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const auto [lo, hi] = credible_interval(values, 0.95);
  Json j;
  j["mean"] = mean;
  j["sd"] = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
  j["median"] = quantile(values, 0.5);
  j["ci_lower"] = lo;
  j["ci_upper"] = hi;
  return j;
}

Json prior_json(const PriorSpec& p) {
  Json j;
  j["alpha"] = {{"distribution", "beta"}, {"shape1", p.alpha_shape1}, {"shape2", p.alpha_shape2}};
  j["a"] = {{"distribution", "gamma"}, {"shape", p.a_shape}, {"scale", p.a_scale}};
  j["b"] = {{"distribution", "gamma"}, {"shape", p.b_shape}, {"scale", p.b_scale}};
  j["c"] = {{"distribution", "gamma"}, {"shape", p.c_shape}, {"scale", p.c_scale}};
  j["beta"] = {{"distribution", "beta"}, {"shape1", p.beta_shape1}, {"shape2", p.beta_shape2}};
  return j;
}

FitOutcome fit_and_report(const CountSeries& data, ModelVariant variant, const FitSettings& settings,
                          const Json& data_info) {
  const auto start = std::chrono::steady_clock::now();
  AmcmcConfig config = settings.config;
  config.keep_unthinned = true;

  FitOutcome outcome;
  outcome.draws = amcmc_run(data, settings.prior, variant, config);
  const PosteriorDraws& draws = outcome.draws;

  Json params = Json::object();
  for (std::size_t c = 0; c < draws.names.size(); ++c) {
    params[draws.names[c]] = summary_json(column(draws.draws, static_cast<Eigen::Index>(c)));
  }

  // Derived quantities evaluated draw by draw.
  std::vector<double> mean_x, vmr_x, cv;
  for (Eigen::Index r = 0; r < draws.draws.rows(); ++r) {
    std::vector<double> theta(static_cast<std::size_t>(draws.draws.cols()));
    for (Eigen::Index c = 0; c < draws.draws.cols(); ++c) theta[static_cast<std::size_t>(c)] = draws.draws(r, c);
    const InarModel model = to_model(variant, theta);
    const StationaryMoments s = stationary_moments(model, 2);
    mean_x.push_back(s.mean);
    vmr_x.push_back(s.vmr);
    cv.push_back(innovation_moments(model.innovation()).cv);
  }
  Json derived;
  derived["unconditional_mean"] = summary_json(mean_x);
  derived["vmr_x"] = summary_json(vmr_x);
  derived["innovation_cv"] = summary_json(cv);

  ChainDiagnostics before = diagnose(draws.unthinned, draws.names, settings.lags);
  ChainDiagnostics after = diagnose(draws.draws, draws.names, settings.lags);
  before.acceptance_rate = draws.meta.acceptance_rate;
  after.acceptance_rate = draws.meta.acceptance_rate;

  const DicResult d = dic(draws, data);
  Json scores;
  scores["dic"] = d.dic;
  scores["dic_used_fallback"] = d.used_fallback;
  scores["mean_log_likelihood"] = d.mean_log_likelihood;
  scores["log_likelihood_at_estimate"] = d.log_likelihood_at_estimate;
  outcome.score.dic = d.dic;
  outcome.score.dic_fallback = d.used_fallback;
  outcome.score.mean_log_likelihood = d.mean_log_likelihood;
  outcome.score.log_likelihood_at_estimate = d.log_likelihood_at_estimate;
  if (draws.size() >= 500) {
    const MarginalLikelihood m = log_marginal_likelihood(draws);
    scores["log_marginal_likelihood"] = m.gelfand_dey;
    scores["log_marginal_likelihood_harmonic_mean"] = m.harmonic_mean;
    scores["marginal_weight_ess"] = m.weight_ess;
    scores["marginal_flagged"] = m.flagged;
    outcome.score.log_marginal_likelihood = m.gelfand_dey;
    outcome.score.harmonic_mean_log_marginal = m.harmonic_mean;
    outcome.score.marginal_flagged = m.flagged;
    outcome.has_marginal = true;
  } else {
    scores["log_marginal_likelihood"] = nullptr;
    scores["log_marginal_likelihood_harmonic_mean"] = nullptr;
    scores["marginal_weight_ess"] = nullptr;
    scores["marginal_flagged"] = true;
  }

  Json run;
  run["seed"] = config.seed;
  run["iterations"] = config.iterations;
  run["burn_in"] = config.burn_in;
  run["thin"] = config.thin;
  run["retained_draws"] = draws.size();
  run["acceptance_rate"] = draws.meta.acceptance_rate;
  run["final_lambda"] = draws.meta.final_lambda;
  run["target_acceptance"] = config.target_acceptance;
  run["gamma_exponent"] = config.gamma_exponent;
  run["gamma_offset"] = config.gamma_offset;
  run["data"] = data_info;

  Json report;
  report["schema_version"] = kSchemaVersion;
  report["command"] = "fit";
  report["model"] = std::string(to_string(variant));
  report["parameters"] = params;
  report["derived"] = derived;
  report["diagnostics"] = {{"before_thinning", diagnostics_json(before)},
                           {"after_thinning", diagnostics_json(after)}};
  report["scores"] = scores;
  report["prior"] = prior_json(settings.prior);
  if (settings.include_wall_clock) {
    run["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  report["run"] = run;
  outcome.report = std::move(report);
  return outcome;
}

}  // namespace glkinar::cli
