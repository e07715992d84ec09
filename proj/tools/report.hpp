#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "glkinar/bayes.hpp"
#include "glkinar/diagnostics.hpp"

namespace glkinar::cli {

using Json = nlohmann::ordered_json;

Json moments_json(const GlkMoments& m);
/// Innovation block, plus a process block when α is given.
Json moments_report(const Innovation& innovation, ModelVariant variant, std::optional<double> alpha,
                    std::span<const int> lags);

Json diagnostics_json(const ChainDiagnostics& d);

/// Mean, sd, median and 95% equal-tailed interval of a sample.
Json summary_json(std::span<const double> values);

struct FitSettings {
  AmcmcConfig config;
  PriorSpec prior;
  std::vector<std::size_t> lags{1, 5, 10};
  bool include_wall_clock = true;
};

struct FitOutcome {
  Json report;
  PosteriorDraws draws;
  ModelScore score;
  bool has_marginal = false;
};

/// Runs the sampler, diagnostics and scores and assembles the report body.
/// `data_info` is copied verbatim under run.data.
FitOutcome fit_and_report(const CountSeries& data, ModelVariant variant, const FitSettings& settings,
                          const Json& data_info);

Json prior_json(const PriorSpec& prior);

}  // namespace glkinar::cli
