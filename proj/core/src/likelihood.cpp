#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "glkinar/bayes.hpp"
#include "glkinar/error.hpp"
#include "glkinar/special_fns.hpp"

namespace glkinar {

namespace {

// Below this a linear-space transition sum has lost too much precision.
constexpr double kUnderflowGuard = 1e-280;

std::vector<double> innovation_probs(const Innovation& innovation, std::int64_t max_value) {
  std::vector<double> probs(static_cast<std::size_t>(max_value) + 1, 0.0);
  const auto* glk = std::get_if<GlkParams>(&innovation);
  if (glk != nullptr && glk->b() == 0.0) {
    const double r = glk->a() / glk->c();
    const double log_beta = std::log(glk->beta());
    double log_p = r * std::log1p(-glk->beta());
    probs[0] = std::exp(log_p);
    for (std::int64_t x = 1; x <= max_value; ++x) {
      log_p += log_beta + std::log((r + static_cast<double>(x) - 1.0) / static_cast<double>(x));
      probs[static_cast<std::size_t>(x)] = std::exp(log_p);
    }
    return probs;
  }
  for (std::int64_t x = 0; x <= max_value; ++x) {
    probs[static_cast<std::size_t>(x)] = std::exp(innovation_log_pmf(innovation, x));
  }
  return probs;
}

}  // namespace

TransitionLikelihood::TransitionLikelihood(const CountSeries& data) {
  const auto& x = data.values();
  if (x.size() < 2) throw DomainError("likelihood needs at least two observations");
  std::map<std::int64_t, std::map<std::int64_t, double>> grouped;
  for (std::size_t t = 1; t < x.size(); ++t) grouped[x[t - 1]][x[t]] += 1.0;
  for (const auto& [from, targets] : grouped) {
    Origin origin;
    origin.from = from;
    origin.max_to = targets.rbegin()->first;
    for (const auto& [to, count] : targets) origin.pairs.push_back({to, count});
    origins_.push_back(std::move(origin));
  }
  max_value_ = *std::max_element(x.begin(), x.end());
  total_ = x.size() - 1;
}

double TransitionLikelihood::operator()(const InarModel& model) const {
  const auto probs = innovation_probs(model.innovation(), max_value_);
  const double alpha = model.alpha();
  double total = 0.0;
  for (const Origin& origin : origins_) {
    const auto weights = binomial_pmf_window(origin.from, alpha, origin.max_to);
    for (const Pair& pair : origin.pairs) {
      const std::int64_t top = std::min(origin.from, pair.to);
      double sum = 0.0;
      for (std::int64_t k = 0; k <= top; ++k) {
        sum += weights[static_cast<std::size_t>(k)] * probs[static_cast<std::size_t>(pair.to - k)];
      }
      const double log_p = sum > kUnderflowGuard ? std::log(sum)
                                                 : transition_log_prob(model, origin.from, pair.to);
      total += pair.count * log_p;
    }
  }
  return total;
}

double log_likelihood(const InarModel& model, const CountSeries& data) {
  return TransitionLikelihood(data)(model);
}

}  // namespace glkinar
