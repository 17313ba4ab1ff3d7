#include "bcfuse/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bcfuse {

double rps(const std::vector<double>& predicted, int truth) {
  const int L = static_cast<int>(predicted.size());
  if (L < 2) throw std::invalid_argument("rps: need at least two categories");
  if (truth < 1 || truth > L) throw std::invalid_argument("rps: truth outside 1..L");
  double sum = 0.0;
  for (double v : predicted) sum += v;
  if (std::fabs(sum - 1.0) > 1e-9) throw std::invalid_argument("rps: forecast does not sum to 1");
  double cdf = 0.0, score = 0.0;
  for (int l = 1; l <= L - 1; ++l) {
    cdf += predicted[l - 1];
    const double step = truth <= l ? 1.0 : 0.0;
    score += (cdf - step) * (cdf - step);
  }
  return score / (L - 1);
}

std::optional<std::vector<double>> in_sample_rps(const ChainOutput& chain,
                                                 const std::vector<int>& true_y) {
  if (chain.y_marginals.empty()) return std::nullopt;
  if (chain.y_marginals.size() != true_y.size())
    throw std::invalid_argument("in_sample_rps: truth length does not match marginals");
  std::vector<double> out(true_y.size());
  for (std::size_t i = 0; i < true_y.size(); ++i) out[i] = rps(chain.y_marginals[i], true_y[i]);
  return out;
}

std::vector<double> out_sample_rps(const ChainOutput& chain,
                                   const std::vector<std::vector<double>>& test_x,
                                   const std::vector<int>& test_y) {
  if (test_x.size() != test_y.size())
    throw std::invalid_argument("out_sample_rps: covariates and truth must align");
  std::vector<double> out(test_x.size());
  for (std::size_t i = 0; i < test_x.size(); ++i)
    out[i] = rps(posterior_predict(test_x[i], chain), test_y[i]);
  return out;
}

double empirical_quantile(std::vector<double> values, double prob) {
  if (values.empty()) throw std::invalid_argument("empirical_quantile: empty sample");
  if (!(prob >= 0.0 && prob <= 1.0)) throw std::invalid_argument("empirical_quantile: prob outside [0,1]");
  std::sort(values.begin(), values.end());
  const double h = prob * (values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  const double frac = h - lo;
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / v.size();
}

double median_of(std::vector<double> v) { return empirical_quantile(std::move(v), 0.5); }

std::vector<CoefSummary> summarize_beta(const ChainOutput& chain) {
  if (chain.samples.empty()) throw std::invalid_argument("summarize_beta: chain without samples");
  const int p = static_cast<int>(chain.samples.front().beta.size());
  std::vector<CoefSummary> out(p);
  std::vector<double> draws(chain.samples.size());
  for (int j = 0; j < p; ++j) {
    for (std::size_t s = 0; s < chain.samples.size(); ++s) draws[s] = chain.samples[s].beta[j];
    out[j].post_mean = mean_of(draws);
    out[j].lo = empirical_quantile(draws, 0.025);
    out[j].hi = empirical_quantile(draws, 0.975);
  }
  return out;
}

BetaMetrics beta_metrics_from_summaries(const std::vector<std::vector<CoefSummary>>& replicates,
                                        const std::vector<double>& beta_true) {
  if (replicates.empty()) throw std::invalid_argument("beta_metrics: need at least one replicate");
  const int p = static_cast<int>(beta_true.size());
  BetaMetrics m;
  m.mse.assign(p, 0.0);
  m.coverage.assign(p, 0.0);
  m.detection.assign(p, 0.0);
  for (const auto& rep : replicates) {
    if (static_cast<int>(rep.size()) != p)
      throw std::invalid_argument("beta_metrics: replicate has wrong coefficient count");
    for (int j = 0; j < p; ++j) {
      const auto& c = rep[j];
      m.mse[j] += (c.post_mean - beta_true[j]) * (c.post_mean - beta_true[j]);
      if (beta_true[j] >= c.lo && beta_true[j] <= c.hi) m.coverage[j] += 1.0;
      const bool contains_zero = (0.0 >= c.lo && 0.0 <= c.hi);
      const bool correct = (beta_true[j] == 0.0) ? contains_zero : !contains_zero;
      if (correct) m.detection[j] += 1.0;
    }
  }
  const double k = static_cast<double>(replicates.size());
  for (int j = 0; j < p; ++j) {
    m.mse[j] /= k;
    m.coverage[j] /= k;
    m.detection[j] /= k;
  }
  return m;
}

BetaMetrics beta_metrics(const std::vector<const ChainOutput*>& chains,
                         const std::vector<double>& beta_true) {
  std::vector<std::vector<CoefSummary>> reps;
  reps.reserve(chains.size());
  for (const ChainOutput* chain : chains) reps.push_back(summarize_beta(*chain));
  return beta_metrics_from_summaries(reps, beta_true);
}

} // namespace bcfuse
