#pragma once

#include <cstdint>
#include <vector>

#include "bcfuse/data.hpp"
#include "bcfuse/model.hpp"
#include "bcfuse/prior.hpp"
#include "bcfuse/rng.hpp"

namespace bcfuse {

// Synthetic-study configuration. Defaults reproduce the reference design:
// 500/1000 train/test sequences, L=5, six latent-score covariates with two
// null effects, three annotators, 60% AI confidence on the true category.
struct SimConfig {
  int n_train = 500;
  int n_test = 1000;
  int L = 5;
  int p = 6;
  std::vector<double> beta_true = {0.2, -0.3, 0.0, 0.0, 0.2, -0.3};
  double beta0_true = 1.38;
  double omega0_true = 0.0;
  std::vector<double> omega_true = {1.0}; // q = size
  int annotators = 3;
  double nu_spread = 0.1; // variance of annotator means around nu_tilde
  double ai_correct_confidence = 0.6;
  double annotated_fraction = 0.5;
  std::vector<int> r_choices = {1, 3, 5, 10};
  std::vector<double> max_probs = {0.2, 0.5, 0.3}; // interior categories 2..L-1
  double annotator_accuracy = 0.95;
  double zeta = 1e-12;
  std::uint64_t seed = 1;

  int q() const { return static_cast<int>(omega_true.size()); }
  void validate() const;
};

// rows shared by the latent-score and image-quality covariate draws
struct CovariatePool {
  std::vector<std::vector<double>> x_rows; // pool_size x p
  std::vector<std::vector<double>> u_rows; // pool_size x q
};

CovariatePool covariate_pool_standard_normal(int p, int q, int pool_size, Rng& rng);

// Cutoffs whose interior cell y has maximum probability max_probs[y-2]
// (maximized over the latent mean: cell width w solves 2*Phi(w/2)-1 = target).
CutoffVector derive_theta_from_max_probs(const std::vector<double>& max_probs, int L);

// the generating parameter values implied by a configuration
ParamState make_truth(const SimConfig& cfg, Rng& rng);

struct SimulatedData {
  Dataset train;
  Dataset test;
  ParamState truth;
};

// Draws a full train/test pair: per sequence a random image count and pooled
// covariate rows, latent score from the probit regression, per-image Dirichlet
// confidences, and annotations on a random subset of training images.
SimulatedData generate_dataset(const SimConfig& cfg, const CovariatePool& pool, Rng& rng);

} // namespace bcfuse
