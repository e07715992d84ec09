#include "cli.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "CLI11.hpp"

#include "glkinar/error.hpp"
#include "glkinar/io.hpp"
#include "report.hpp"

namespace glkinar::cli {

namespace {

struct ParamFlags {
  std::string variant = "glk";
  std::optional<double> a, b, c, beta, theta, lambda;
};

struct SimulateFlags {
  ParamFlags params;
  double alpha = 0.0;
  std::size_t length = 0;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool ci = false;
};

struct FitFlags {
  std::string input;
  std::string model = "glk";
  std::size_t iterations = 50000;
  std::size_t burnin = 10000;
  std::size_t thin = 10;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string chain_out;
  std::string full_chain_out;
  std::vector<double> prior_alpha, prior_a, prior_b, prior_c, prior_beta;
  double gamma_exponent = 0.6;
  double gamma_offset = 10.0;
  std::string lags = "1,5,10";
  bool ci = false;
};

struct CompareFlags {
  FitFlags fit;
  std::string models = "glk,nb";
  std::string format = "text";
};

struct MomentsFlags {
  ParamFlags params;
  std::optional<double> alpha;
  std::string lags = "0,1,2,3";
};

struct DiagnoseFlags {
  std::string chain;
  std::string lags = "1,5,10";
  std::optional<std::size_t> thin;
  std::string out;
};

Json error_json(int code, std::string_view kind, std::string_view message) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["error"] = {{"kind", kind}, {"exit_code", code}, {"message", message}};
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write '" + path + "'");
  f << text;
  if (!f) throw DataError("failed writing '" + path + "'");
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

template <class T>
std::vector<T> parse_list(const std::string& text, std::string_view what) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::stringstream cell(item);
    T v{};
    if (!(cell >> v) || !(cell >> std::ws).eof()) {
      throw UsageError(std::string(what) + ": '" + item + "' is not valid");
    }
    out.push_back(v);
  }
  if (out.empty()) throw UsageError(std::string(what) + ": empty list");
  return out;
}

double require(const std::optional<double>& v, std::string_view flag, std::string_view variant) {
  if (!v) throw UsageError("--" + std::string(flag) + " is required for variant " + std::string(variant));
  return *v;
}

Innovation innovation_from(const ParamFlags& f, ModelVariant variant) {
  const auto name = to_string(variant);
  try {
    switch (variant) {
      case ModelVariant::Glk:
        return GlkParams(require(f.a, "a", name), require(f.b, "b", name), require(f.c, "c", name),
                         require(f.beta, "beta", name));
      case ModelVariant::Lk: {
        const double beta = require(f.beta, "beta", name);
        return GlkParams(require(f.a, "a", name), require(f.b, "b", name), beta, beta);
      }
      case ModelVariant::Nb:
        return GlkParams(require(f.a, "a", name), 0.0, require(f.c, "c", name),
                         require(f.beta, "beta", name));
      case ModelVariant::Gp:
        return GpParams(require(f.theta, "theta", name), require(f.lambda, "lambda", name));
    }
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  throw UsageError("unknown variant");
}

ModelVariant variant_from(const std::string& text) {
  try {
    return parse_variant(text);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed, bool ci, std::ostream& err) {
  if (seed) return *seed;
  if (ci) throw UsageError("--seed is mandatory with --ci");
  std::random_device rd;
  const std::uint64_t s = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  err << "glkinar: using auto seed " << s << "\n";
  return s;
}

std::string sha256_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open '" + path + "'");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  char buf[1 << 14];
  while (f.read(buf, sizeof buf) || f.gcount() > 0) {
    EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(f.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  }
  return hex.str();
}

CountSeries load_series(const std::string& path) {
  try {
    return read_count_series(path);
  } catch (const ParseError& e) {
    throw DataError("'" + path + "' " + e.what());
  } catch (const DomainError& e) {
    throw DataError("'" + path + "': " + e.what());
  }
}

PriorSpec prior_from(const FitFlags& f) {
  PriorSpec p;
  auto set = [](const std::vector<double>& v, double& x, double& y, std::string_view flag) {
    if (v.empty()) return;
    if (v.size() != 2) throw UsageError("--" + std::string(flag) + " takes two numbers");
    x = v[0];
    y = v[1];
  };
  set(f.prior_alpha, p.alpha_shape1, p.alpha_shape2, "prior-alpha");
  set(f.prior_a, p.a_shape, p.a_scale, "prior-a");
  set(f.prior_b, p.b_shape, p.b_scale, "prior-b");
  set(f.prior_c, p.c_shape, p.c_scale, "prior-c");
  set(f.prior_beta, p.beta_shape1, p.beta_shape2, "prior-beta");
  try {
    p.validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  return p;
}

FitSettings settings_from(const FitFlags& f, std::uint64_t seed) {
  FitSettings s;
  s.config.iterations = f.iterations;
  s.config.burn_in = f.burnin;
  s.config.thin = f.thin;
  s.config.seed = seed;
  s.config.gamma_exponent = f.gamma_exponent;
  s.config.gamma_offset = f.gamma_offset;
  s.prior = prior_from(f);
  s.include_wall_clock = !f.ci;
  s.lags.clear();
  for (long lag : parse_list<long>(f.lags, "--lags")) {
    if (lag < 0) throw UsageError("--lags: negative lag");
    s.lags.push_back(static_cast<std::size_t>(lag));
  }
  try {
    s.config.validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  const std::size_t retained = (f.iterations - f.burnin) / f.thin;
  if (retained < 100) {
    throw UsageError("the run keeps " + std::to_string(retained) +
                     " draws; credible intervals need at least 100");
  }
  for (std::size_t lag : s.lags) {
    if (lag >= retained) {
      throw UsageError("--lags: lag " + std::to_string(lag) + " is not below the " +
                       std::to_string(retained) + " retained draws");
    }
  }
  return s;
}

Json data_info(const std::string& path, const CountSeries& data) {
  Json j;
  j["path"] = path;
  j["observations"] = data.size();
  j["sha256"] = sha256_file(path);
  return j;
}

void add_fit_options(CLI::App* cmd, FitFlags& f) {
  cmd->add_option("--input", f.input, "Count series CSV")->required();
  cmd->add_option("--iterations", f.iterations, "Sampler iterations")->capture_default_str();
  cmd->add_option("--burnin", f.burnin, "Burn-in iterations")->capture_default_str();
  cmd->add_option("--thin", f.thin, "Thinning factor")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--seed", f.seed, "Random seed");
  cmd->add_option("--prior-alpha", f.prior_alpha, "Beta shapes for alpha")->expected(2);
  cmd->add_option("--prior-a", f.prior_a, "Gamma shape and scale for a")->expected(2);
  cmd->add_option("--prior-b", f.prior_b, "Gamma shape and scale for b")->expected(2);
  cmd->add_option("--prior-c", f.prior_c, "Gamma shape and scale for c")->expected(2);
  cmd->add_option("--prior-beta", f.prior_beta, "Beta shapes for beta")->expected(2);
  cmd->add_option("--gamma-exponent", f.gamma_exponent, "Adaptation rate exponent")->capture_default_str();
  cmd->add_option("--gamma-offset", f.gamma_offset, "Adaptation rate offset")->capture_default_str();
  cmd->add_option("--lags", f.lags, "ACF lags, comma separated")->capture_default_str();
  cmd->add_flag("--ci", f.ci, "Reproducible mode: seed required, no wall-clock field");
}

void add_param_options(CLI::App* cmd, ParamFlags& p) {
  cmd->add_option("--variant", p.variant, "glk, lk, nb or gp")->capture_default_str();
  cmd->add_option("--a", p.a, "GLK a");
  cmd->add_option("--b", p.b, "GLK b");
  cmd->add_option("--c", p.c, "GLK c");
  cmd->add_option("--beta", p.beta, "GLK beta");
  cmd->add_option("--theta", p.theta, "GP theta");
  cmd->add_option("--lambda", p.lambda, "GP lambda");
}

int cmd_simulate(const SimulateFlags& f, std::ostream& out, std::ostream& err) {
  const ModelVariant variant = variant_from(f.params.variant);
  const Innovation innovation = innovation_from(f.params, variant);
  std::optional<InarModel> model;
  try {
    model.emplace(f.alpha, variant, innovation);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  const std::uint64_t seed = resolve_seed(f.seed, f.ci, err);
  Rng rng(seed);
  const CountSeries series = simulate(*model, f.length, StationaryWarmup{}, rng);
  std::ostringstream csv;
  write_count_series(csv, series);
  write_text(f.out, csv.str());

  const std::vector<int> lags{0, 1, 2, 3};
  Json report;
  report["schema_version"] = kSchemaVersion;
  report["command"] = "simulate";
  report["output"] = {{"path", f.out}, {"length", f.length}, {"seed", seed}};
  report.update(moments_report(innovation, variant, f.alpha, lags));
  out << dump(report);
  return kOk;
}

int cmd_fit(const FitFlags& f, std::ostream& out, std::ostream& err) {
  const ModelVariant variant = variant_from(f.model);
  const std::uint64_t seed = resolve_seed(f.seed, f.ci, err);
  const FitSettings settings = settings_from(f, seed);
  const CountSeries data = load_series(f.input);
  const FitOutcome outcome = fit_and_report(data, variant, settings, data_info(f.input, data));
  if (!f.chain_out.empty()) {
    std::ostringstream csv;
    write_chain_csv(csv, outcome.draws.names, outcome.draws.draws);
    write_text(f.chain_out, csv.str());
  }
  if (!f.full_chain_out.empty()) {
    std::ostringstream csv;
    write_chain_csv(csv, outcome.draws.names, outcome.draws.unthinned);
    write_text(f.full_chain_out, csv.str());
  }
  if (f.out.empty()) {
    out << dump(outcome.report);
  } else {
    write_text(f.out, dump(outcome.report));
  }
  return kOk;
}

std::string compare_table(const Json& rows) {
  std::ostringstream t;
  t << std::left << std::setw(8) << "model" << std::right << std::setw(16) << "DIC" << std::setw(20)
    << "logML (GD)" << std::setw(20) << "logML (HM)" << "\n";
  auto cell = [](const Json& v, bool star) {
    std::ostringstream c;
    if (v.is_null()) {
      c << "n/a";
    } else {
      c << std::fixed << std::setprecision(2) << v.get<double>();
    }
    if (star) c << "*";
    return c.str();
  };
  for (const auto& r : rows) {
    t << std::left << std::setw(8) << r["model"].get<std::string>() << std::right << std::setw(16)
      << cell(r["dic"], r["best_dic"].get<bool>()) << std::setw(20)
      << cell(r["log_marginal_likelihood"], r["best_log_marginal_likelihood"].get<bool>())
      << std::setw(20) << cell(r["log_marginal_likelihood_harmonic_mean"], false) << "\n";
  }
  return t.str();
}

int cmd_compare(const CompareFlags& f, std::ostream& out, std::ostream& err) {
  std::vector<ModelVariant> variants;
  std::set<ModelVariant> seen;
  for (const auto& tag : parse_list<std::string>(f.models, "--models")) {
    const ModelVariant v = variant_from(tag);
    if (!seen.insert(v).second) throw UsageError("--models: duplicate model '" + tag + "'");
    variants.push_back(v);
  }
  if (f.format != "text" && f.format != "json") throw UsageError("--format must be text or json");
  const std::uint64_t seed = resolve_seed(f.fit.seed, f.fit.ci, err);
  const FitSettings base = settings_from(f.fit, seed);
  const CountSeries data = load_series(f.fit.input);
  const Json info = data_info(f.fit.input, data);

  Json rows = Json::array();
  Json result;
  result["schema_version"] = kSchemaVersion;
  result["command"] = "compare";
  auto emit = [&](bool complete) {
    result["complete"] = complete;
    result["models"] = rows;
    if (!f.fit.out.empty()) write_text(f.fit.out, dump(result));
  };

  for (std::size_t k = 0; k < variants.size(); ++k) {
    FitSettings s = base;
    s.config.seed = seed + k;  // fixed offsets from the master seed
    try {
      const FitOutcome o = fit_and_report(data, variants[k], s, info);
      Json row;
      row["model"] = std::string(to_string(variants[k]));
      row["seed"] = s.config.seed;
      row["dic"] = o.score.dic;
      row["log_marginal_likelihood"] = o.has_marginal ? Json(o.score.log_marginal_likelihood) : Json(nullptr);
      row["log_marginal_likelihood_harmonic_mean"] =
          o.has_marginal ? Json(o.score.harmonic_mean_log_marginal) : Json(nullptr);
      row["marginal_flagged"] = o.score.marginal_flagged;
      row["acceptance_rate"] = o.draws.meta.acceptance_rate;
      row["best_dic"] = false;
      row["best_log_marginal_likelihood"] = false;
      rows.push_back(row);
    } catch (const std::exception& e) {
      result["failed_model"] = std::string(to_string(variants[k]));
      result["error"] = e.what();
      emit(false);
      throw;
    }
  }

  std::size_t best_dic = 0;
  std::optional<std::size_t> best_ml;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k]["dic"].get<double>() < rows[best_dic]["dic"].get<double>()) best_dic = k;
    if (!rows[k]["log_marginal_likelihood"].is_null() &&
        (!best_ml || rows[k]["log_marginal_likelihood"].get<double>() >
                         rows[*best_ml]["log_marginal_likelihood"].get<double>())) {
      best_ml = k;
    }
  }
  rows[best_dic]["best_dic"] = true;
  result["best"] = {{"dic", rows[best_dic]["model"]}};
  if (best_ml) {
    rows[*best_ml]["best_log_marginal_likelihood"] = true;
    result["best"]["log_marginal_likelihood"] = rows[*best_ml]["model"];
  } else {
    result["best"]["log_marginal_likelihood"] = nullptr;
  }
  Json run;
  run["seed"] = seed;
  run["iterations"] = base.config.iterations;
  run["burn_in"] = base.config.burn_in;
  run["thin"] = base.config.thin;
  run["data"] = info;
  result["run"] = run;
  emit(true);
  if (f.format == "json") {
    out << dump(result);
  } else {
    out << compare_table(rows);
  }
  return kOk;
}

int cmd_moments(const MomentsFlags& f, std::ostream& out) {
  const ModelVariant variant = variant_from(f.params.variant);
  const Innovation innovation = innovation_from(f.params, variant);
  const auto lags = parse_list<int>(f.lags, "--lags");
  if (std::any_of(lags.begin(), lags.end(), [](int k) { return k < 0; })) {
    throw UsageError("--lags: negative lag");
  }
  Json report;
  try {
    report = moments_report(innovation, variant, f.alpha, lags);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  Json ordered;
  ordered["schema_version"] = kSchemaVersion;
  ordered["command"] = "moments";
  for (auto it = report.begin(); it != report.end(); ++it) {
    if (it.key() != "schema_version") ordered[it.key()] = it.value();
  }
  out << dump(ordered);
  return kOk;
}

int cmd_diagnose(const DiagnoseFlags& f, std::ostream& out) {
  ChainTable chain;
  try {
    chain = read_chain_csv(f.chain);
  } catch (const ParseError& e) {
    throw DataError("'" + f.chain + "' " + e.what());
  } catch (const DomainError& e) {
    throw DataError("'" + f.chain + "': " + e.what());
  }
  std::vector<std::size_t> lags;
  for (long lag : parse_list<long>(f.lags, "--lags")) {
    if (lag < 0) throw UsageError("--lags: negative lag");
    lags.push_back(static_cast<std::size_t>(lag));
  }
  auto block = [&](const Eigen::MatrixXd& draws) {
    try {
      return diagnostics_json(diagnose(draws, chain.names, lags));
    } catch (const ConfigError& e) {
      throw UsageError(e.what());
    }
  };
  Json report;
  report["schema_version"] = kSchemaVersion;
  report["command"] = "diagnose";
  report["chain"] = {{"path", f.chain}, {"draws", chain.draws.rows()}, {"parameters", chain.names}};
  report["before_thinning"] = block(chain.draws);
  if (f.thin) {
    if (*f.thin == 0) throw UsageError("--thin must be positive");
    report["thin"] = *f.thin;
    report["after_thinning"] = block(thin_rows(chain.draws, *f.thin));
  }
  if (f.out.empty()) {
    out << dump(report);
  } else {
    write_text(f.out, dump(report));
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generalized Lagrangian Katz INAR(1) models: simulation, Bayesian fitting, diagnostics"};
  app.name(args.empty() ? "glkinar" : args[0]);
  app.require_subcommand(1);

  SimulateFlags sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate a GLK-INAR(1) path to CSV");
  add_param_options(simulate_cmd, sim.params);
  simulate_cmd->add_option("--alpha", sim.alpha, "Thinning probability in (0,1)")->required();
  simulate_cmd->add_option("--length", sim.length, "Number of observations")
      ->required()
      ->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--seed", sim.seed, "Random seed");
  simulate_cmd->add_option("--out", sim.out, "Output CSV path")->required();
  simulate_cmd->add_flag("--ci", sim.ci, "Reproducible mode: seed required");

  FitFlags fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit one model by adaptive Metropolis");
  add_fit_options(fit_cmd, fit);
  fit_cmd->add_option("--model", fit.model, "glk, lk, nb or gp")->capture_default_str();
  fit_cmd->add_option("--out", fit.out, "Report JSON path (standard output if omitted)");
  fit_cmd->add_option("--chain-out", fit.chain_out, "Retained draws as CSV");
  fit_cmd->add_option("--full-chain-out", fit.full_chain_out, "Post-burn-in unthinned chain as CSV");

  CompareFlags cmp;
  auto* compare_cmd = app.add_subcommand("compare", "Fit several models and rank them by DIC and marginal likelihood");
  add_fit_options(compare_cmd, cmp.fit);
  compare_cmd->add_option("--models", cmp.models, "Comma-separated model tags")->capture_default_str();
  compare_cmd->add_option("--out", cmp.fit.out, "Comparison JSON path");
  compare_cmd->add_option("--format", cmp.format, "Standard output format: text or json")->capture_default_str();

  MomentsFlags mom;
  auto* moments_cmd = app.add_subcommand("moments", "Innovation and stationary process moments");
  add_param_options(moments_cmd, mom.params);
  moments_cmd->add_option("--alpha", mom.alpha, "Thinning probability; adds process moments");
  moments_cmd->add_option("--lags", mom.lags, "Autocovariance lags")->capture_default_str();

  DiagnoseFlags diag;
  auto* diagnose_cmd = app.add_subcommand("diagnose", "Chain diagnostics before and after thinning");
  diagnose_cmd->add_option("--chain", diag.chain, "Chain CSV")->required();
  diagnose_cmd->add_option("--lags", diag.lags, "ACF lags")->capture_default_str();
  diagnose_cmd->add_option("--thin", diag.thin, "Thinning factor for the second block");
  diagnose_cmd->add_option("--out", diag.out, "Output JSON path (standard output if omitted)");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << dump(error_json(kUsage, "usage", e.what()));
    return kUsage;
  }

  try {
    if (*simulate_cmd) return cmd_simulate(sim, out, err);
    if (*fit_cmd) return cmd_fit(fit, out, err);
    if (*compare_cmd) return cmd_compare(cmp, out, err);
    if (*moments_cmd) return cmd_moments(mom, out);
    if (*diagnose_cmd) return cmd_diagnose(diag, out);
  } catch (const UsageError& e) {
    err << dump(error_json(kUsage, "usage", e.what()));
    return kUsage;
  } catch (const ConfigError& e) {
    err << dump(error_json(kUsage, "usage", e.what()));
    return kUsage;
  } catch (const DataError& e) {
    err << dump(error_json(kData, "data", e.what()));
    return kData;
  } catch (const ParseError& e) {
    err << dump(error_json(kData, "data", e.what()));
    return kData;
  } catch (const DomainError& e) {
    err << dump(error_json(kData, "data", e.what()));
    return kData;
  } catch (const std::exception& e) {
    err << dump(error_json(kNumerical, "numerical", e.what()));
    return kNumerical;
  }
  return kUsage;
}

}  // namespace glkinar::cli
