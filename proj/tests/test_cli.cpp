#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"

#include "cli.hpp"
#include "glkinar/io.hpp"

using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "glkinar");
  std::ostringstream out, err;
  const int code = glkinar::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

void spit(const std::string& path, const std::string& text) { std::ofstream(path, std::ios::binary) << text; }

const std::vector<std::string> kLowPersistence{"--alpha", "0.3", "--a", "5.3239", "--b", "0.0592",
                                              "--c",     "0.6", "--beta", "0.5917"};

std::vector<std::string> simulate_args(const std::string& out, const std::string& length, const std::string& seed) {
  std::vector<std::string> a{"simulate"};
  a.insert(a.end(), kLowPersistence.begin(), kLowPersistence.end());
  for (const std::string& s : {std::string("--length"), length, std::string("--seed"), seed, std::string("--out"), out}) {
    a.push_back(s);
  }
  return a;
}

}  // namespace

TEST_CASE("simulate") {
  const Result r = run(simulate_args("cli_sim.csv", "1000", "42"));
  REQUIRE(r.code == 0);
  const glkinar::CountSeries s = glkinar::read_count_series("cli_sim.csv");
  CHECK(s.size() == 1000);
  const json j = json::parse(r.out);
  CHECK(j["schema_version"] == 1);
  CHECK(j["innovation"]["mean"].get<double>() == doctest::Approx(15.004197305509239));

  REQUIRE(run(simulate_args("cli_sim2.csv", "1000", "42")).code == 0);
  CHECK(slurp("cli_sim.csv") == slurp("cli_sim2.csv"));

  CHECK(run(simulate_args("cli_zero.csv", "0", "42")).code == glkinar::cli::kUsage);
  const Result bad = run({"simulate", "--alpha", "0.3", "--a", "1", "--b", "1", "--c", "0.5", "--beta", "0.5",
                          "--length", "10", "--seed", "1", "--out", "cli_bad.csv"});
  CHECK(bad.code == glkinar::cli::kUsage);
  CHECK(json::parse(bad.err)["error"]["kind"] == "usage");
  CHECK(run({"simulate", "--alpha", "0.3", "--variant", "nb", "--a", "1", "--c", "1", "--beta", "0.5", "--length",
             "10", "--out", "cli_ci.csv", "--ci"})
            .code == glkinar::cli::kUsage);
  CHECK(run({"--help"}).code == 0);
  CHECK(run({}).code == glkinar::cli::kUsage);
}

TEST_CASE("fit") {
  REQUIRE(run(simulate_args("cli_fit.csv", "200", "7")).code == 0);
  const std::vector<std::string> base{"fit",  "--input", "cli_fit.csv", "--iterations", "2500", "--burnin",
                                      "500",  "--thin",  "2",           "--seed",       "3",    "--ci"};
  auto with = [&](std::vector<std::string> extra) {
    std::vector<std::string> a = base;
    a.insert(a.end(), extra.begin(), extra.end());
    return a;
  };
  const Result r = run(with({"--out", "cli_fit_1.json", "--chain-out", "cli_chain.csv"}));
  REQUIRE(r.code == 0);
  REQUIRE(run(with({"--out", "cli_fit_2.json"})).code == 0);
  CHECK(slurp("cli_fit_1.json") == slurp("cli_fit_2.json"));

  const json report = json::parse(slurp("cli_fit_1.json"));
  CHECK(report["schema_version"] == 1);
  CHECK(report["model"] == "glk");
  CHECK(report["run"]["retained_draws"] == 1000);
  CHECK_FALSE(report["run"].contains("wall_clock_seconds"));
  CHECK(report["run"]["data"]["sha256"].get<std::string>().size() == 64);
  for (const auto& [name, p] : report["parameters"].items()) {
    CAPTURE(name);
    CHECK(p["ci_lower"].get<double>() <= p["mean"].get<double>());
    CHECK(p["mean"].get<double>() <= p["ci_upper"].get<double>());
  }
  CHECK(report["scores"]["dic"].is_number());
  CHECK(report["scores"]["log_marginal_likelihood"].is_number());
  CHECK(report["diagnostics"]["before_thinning"]["draws"] == 2000);
  CHECK(report["diagnostics"]["after_thinning"]["parameters"]["alpha"]["acf"].contains("1"));

  const Result all = run({"fit", "--input", "cli_fit.csv", "--iterations", "300", "--burnin", "0", "--thin", "1",
                          "--seed", "1", "--model", "nb"});
  REQUIRE(all.code == 0);
  CHECK(json::parse(all.out)["run"]["retained_draws"] == 300);
  CHECK(json::parse(all.out)["run"].contains("wall_clock_seconds"));

  CHECK(run({"fit", "--input", "cli_fit.csv", "--model", "poisson", "--seed", "1"}).code == glkinar::cli::kUsage);
  CHECK(run({"fit", "--input", "cli_fit.csv", "--ci"}).code == glkinar::cli::kUsage);
  CHECK(run({"fit", "--input", "missing.csv", "--seed", "1"}).code == glkinar::cli::kData);
  spit("cli_broken.csv", "value\n3\n-1\n");
  const Result broken = run({"fit", "--input", "cli_broken.csv", "--seed", "1"});
  CHECK(broken.code == glkinar::cli::kData);
  CHECK(json::parse(broken.err)["error"]["message"].get<std::string>().find("line 3") != std::string::npos);

  // diagnose on the exported chain
  const Result d = run({"diagnose", "--chain", "cli_chain.csv", "--lags", "1,5"});
  REQUIRE(d.code == 0);
  const json dj = json::parse(d.out);
  CHECK(dj.contains("before_thinning"));
  CHECK_FALSE(dj.contains("after_thinning"));
  const Result thinned = run({"diagnose", "--chain", "cli_chain.csv", "--thin", "10"});
  REQUIRE(thinned.code == 0);
  CHECK(json::parse(thinned.out)["after_thinning"]["draws"] == 100);
  CHECK(run({"diagnose", "--chain", "cli_chain.csv", "--lags", "1000"}).code == glkinar::cli::kUsage);
  spit("cli_badchain.csv", "alpha,a\n0.1,0.2\n0.3,oops\n");
  CHECK(run({"diagnose", "--chain", "cli_badchain.csv"}).code == glkinar::cli::kData);
}

TEST_CASE("compare") {
  REQUIRE(run(simulate_args("cli_cmp.csv", "200", "8")).code == 0);
  const std::vector<std::string> base{"compare", "--input", "cli_cmp.csv", "--iterations", "2000",
                                      "--burnin", "500",    "--thin",      "1",            "--seed", "5"};
  auto with = [&](std::vector<std::string> extra) {
    std::vector<std::string> a = base;
    a.insert(a.end(), extra.begin(), extra.end());
    return a;
  };
  const Result two = run(with({"--models", "glk,nb", "--out", "cli_cmp.json"}));
  REQUIRE(two.code == 0);
  CHECK(two.out.find("DIC") != std::string::npos);
  const json j = json::parse(slurp("cli_cmp.json"));
  CHECK(j["complete"] == true);
  CHECK(j["models"].size() == 2);
  int starred = 0;
  for (const auto& row : j["models"]) starred += row["best_dic"].get<bool>() ? 1 : 0;
  CHECK(starred == 1);

  const Result one = run(with({"--models", "nb", "--format", "json"}));
  REQUIRE(one.code == 0);
  const json oj = json::parse(one.out);
  CHECK(oj["models"].size() == 1);
  CHECK(oj["models"][0]["best_dic"] == true);
  CHECK(oj["best"]["dic"] == "nb");
  CHECK(run(with({"--models", "glk,glk"})).code == glkinar::cli::kUsage);
}

TEST_CASE("moments") {
  const Result r = run({"moments", "--a", "3.86", "--b", "0", "--c", "0.60", "--beta", "0.70", "--alpha", "0.5"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["innovation"]["vmr"].get<double>() == doctest::Approx(50.0 / 15.0).epsilon(1e-12));
  CHECK(j["innovation"]["family"] == "negative_binomial");
  CHECK(j["process"]["autocovariance"]["0"] == j["process"]["variance"]);
  const Result no_alpha = run({"moments", "--variant", "gp", "--theta", "2", "--lambda", "0.1"});
  REQUIRE(no_alpha.code == 0);
  CHECK_FALSE(json::parse(no_alpha.out).contains("process"));
  CHECK(run({"moments", "--a", "3.86", "--b", "0", "--c", "0.6", "--beta", "0.7", "--alpha", "0"}).code ==
        glkinar::cli::kUsage);
  CHECK(run({"moments", "--a", "1", "--b", "1", "--c", "0.5", "--beta", "0.5"}).code == glkinar::cli::kUsage);
  CHECK(run({"moments", "--variant", "lk", "--a", "1"}).code == glkinar::cli::kUsage);
}
