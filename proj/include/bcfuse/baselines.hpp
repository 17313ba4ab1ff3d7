#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bcfuse/data.hpp"
#include "bcfuse/mcmc.hpp"

namespace bcfuse {

struct ThresholdPolicy {
  double T = 0.9; // confidence vectors with max below T are discarded

  void validate() const;
};

enum class ResponseSource { kAnnotationMean, kConfidenceWeighted };

struct LinearResponse {
  std::string sequence_id;
  double y_tilde = 0.0; // continuous pseudo-response in [1, L]
  ResponseSource source = ResponseSource::kAnnotationMean;
};

// Setting-1 response: mean of annotations when any image is annotated
// (confidences ignored), otherwise the mean expected score of the surviving
// confidence vectors; absent when thresholding drops every image.
std::optional<LinearResponse> extract_linear_response(const Sequence& seq,
                                                      const ThresholdPolicy& policy, int L);

// Setting-2 observed score: lower median of the per-image argmax categories
// among surviving confidence vectors; annotations ignored; absent when no
// image survives. Argmax ties break toward the lower category.
std::optional<int> extract_maximum_observed(const Sequence& seq, const ThresholdPolicy& policy);

// Bayesian linear regression y = b0 + x.b + eps with the fusion model's
// coefficient priors and a vague inverse-gamma(0.01, 0.01) noise prior,
// sampled by conjugate Gibbs. Samples land in beta0/beta/sigma2.
ChainOutput fit_bayesian_linear(const std::vector<LinearResponse>& responses,
                                const std::vector<std::vector<double>>& X, const McmcConfig& cfg);

} // namespace bcfuse
