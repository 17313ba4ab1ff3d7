#pragma once

#include <optional>
#include <vector>

#include "bcfuse/mcmc.hpp"

namespace bcfuse {

// Ranked probability score of an ordinal forecast against an observed
// category: mean squared distance between the forecast CDF and the step
// function at the truth, over the L-1 interior thresholds. In [0,1].
double rps(const std::vector<double>& predicted, int truth);

// Per-sequence RPS of the latent-score posterior marginals against simulation
// truth. Empty optional when the chain has no latent scores (maximum/linear).
std::optional<std::vector<double>> in_sample_rps(const ChainOutput& chain,
                                                 const std::vector<int>& true_y);

// Per-sequence RPS of the posterior predictive pmf at held-out covariates.
std::vector<double> out_sample_rps(const ChainOutput& chain,
                                   const std::vector<std::vector<double>>& test_x,
                                   const std::vector<int>& test_y);

struct BetaMetrics {
  std::vector<double> mse;       // per coefficient
  std::vector<double> coverage;  // fraction of replicates covering truth
  std::vector<double> detection; // correctly classified significance
};

// posterior mean and equal-tailed 95% interval of one coefficient
struct CoefSummary {
  double post_mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

std::vector<CoefSummary> summarize_beta(const ChainOutput& chain);

BetaMetrics beta_metrics_from_summaries(const std::vector<std::vector<CoefSummary>>& replicates,
                                        const std::vector<double>& beta_true);

// MSE/coverage/detection of the slope coefficients across replicate chains,
// using equal-tailed 95% credible intervals from empirical quantiles.
BetaMetrics beta_metrics(const std::vector<const ChainOutput*>& chains,
                         const std::vector<double>& beta_true);

// type-7 empirical quantile (linear interpolation), prob in [0,1]
double empirical_quantile(std::vector<double> values, double prob);

double mean_of(const std::vector<double>& v);
double median_of(std::vector<double> v);

} // namespace bcfuse
