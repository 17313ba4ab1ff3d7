#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bcfuse/data.hpp"
#include "bcfuse/model.hpp"
#include "bcfuse/prior.hpp"
#include "bcfuse/rng.hpp"

namespace bcfuse {

// kLinear identifies the Setting-1 baseline chain; run_chain itself only
// accepts the four fusion-model variants.
enum class ModelVariant { kFull, kOrdinalOnly, kCompositionalOnly, kMaximumObserved, kLinear };

const char* variant_name(ModelVariant v);
ModelVariant variant_from_name(const std::string& name);

struct McmcConfig {
  int iterations = 15000;
  int burnin = 10000;
  int thin = 1;
  std::uint64_t seed = 1;
  double adapt_target_block = 0.234;
  double adapt_target_univariate = 0.44;
  double adapt_rate = 0.6;
  double initial_step = 0.1;

  void validate() const;
};

struct ChainOutput {
  ModelVariant variant = ModelVariant::kFull;
  std::vector<ParamState> samples;                // post-burn-in, thinned
  std::vector<std::string> block_names;
  std::vector<double> acceptance_rates;           // post-adaptation, per block
  std::vector<std::vector<double>> y_marginals;   // N x L; empty when Y is not latent
  std::vector<double> log_post_trace;             // every iteration
};

// Full conditional P(Y_i = y | ...) of supplement form: prior pmf times the
// annotation and confidence likelihood products, normalized via log-sum-exp.
// Reference implementation used directly by the sampler tests.
std::vector<double> gibbs_y_conditional(const Sequence& seq, const ParamState& state,
                                        ModelVariant variant = ModelVariant::kFull);

// One independent draw of Y_i per sequence from its full conditional.
std::vector<int> gibbs_sweep_y(const Dataset& data, const ParamState& state, Rng& rng,
                               ModelVariant variant = ModelVariant::kFull);

// Robbins-Monro step on the log proposal scale.
double adapt_scale(double current_scale, bool accepted, int iteration, double target, double rate);

// One MH update of a named block ("beta", "theta_tilde", "omega",
// "phi_alpha_y<k>", "nu_y<k>_a<j>", "nu_tilde_y<k>") at a fixed proposal
// scale. Convenience wrapper over FusionSampler for tests and small studies.
std::pair<ParamState, bool> mh_update_block(const std::string& block, const ParamState& state,
                                            const Dataset& data, const PriorSpec& prior,
                                            double proposal_scale, Rng& rng,
                                            ModelVariant variant = ModelVariant::kFull,
                                            const std::vector<int>& observed_y = {});

// The fusion-model sampler. Holds flattened data plus incremental likelihood
// caches; one sweep runs the Gibbs update of Y followed by all MH blocks in a
// fixed order (beta, theta, omega, per-category (phi,alpha), nu, nu_tilde).
class FusionSampler {
 public:
  FusionSampler(const Dataset& data, const PriorSpec& prior, ModelVariant variant,
                std::vector<int> observed_y = {});

  ParamState initial_state() const; // data-driven heuristic start
  void set_state(const ParamState& s);
  const ParamState& state() const { return st_; }

  void sweep(Rng& rng, bool adapt, int iteration);

  int n_blocks() const { return static_cast<int>(block_names_.size()); }
  const std::vector<std::string>& block_names() const { return block_names_; }
  double scale(int block) const { return scales_[block]; }
  void set_scale(int block, double s) { scales_[block] = s; }
  void set_adapt_targets(double block_target, double univariate_target, double rate) {
    target_block_ = block_target;
    target_uni_ = univariate_target;
    adapt_rate_ = rate;
  }
  // MH update of one block at the current scale; returns accepted
  bool update_block(int block, Rng& rng);
  void gibbs_update_y(Rng& rng);

  std::vector<double> y_conditional(int i) const; // fast-path conditional, for checks
  double log_lik() const;
  double log_posterior() const { return log_lik() + log_prior(st_, prior_); }
  bool latent_y() const { return gibbs_y_; }

  // when on, Gibbs sweeps accumulate the Rao-Blackwellized Y marginals
  void set_collect(bool on) { collect_ = on; }
  std::vector<std::vector<double>> y_marginals() const;

  void reset_accept_counts();
  std::vector<double> acceptance_rates() const;

 private:
  void rebuild_caches();
  void rebuild_fz_table();
  void rebuild_y_indexes();
  double conf_ydep(int k, int y, const std::vector<double>& alpha_row) const;
  bool update_beta(Rng& rng, int block);
  bool update_theta(Rng& rng, int block);
  bool update_omega(Rng& rng, int block);
  bool update_phi_alpha(int y, Rng& rng, int block);
  bool update_nu(int y, int a, Rng& rng, int block);
  bool update_nu_tilde(int y, Rng& rng, int block);
  double fz_cell(int y, int a, int z) const { return logfz_tab_[((y - 1) * A_ + (a - 1)) * L_ + (z - 1)]; }
  double& fz_cell(int y, int a, int z) { return logfz_tab_[((y - 1) * A_ + (a - 1)) * L_ + (z - 1)]; }

  PriorSpec prior_;
  ModelVariant variant_;
  bool include_fz_ = true, include_fc_ = true, gibbs_y_ = true;
  int N_ = 0, L_ = 0, p_ = 0, q_ = 0, A_ = 0, R_ = 0;

  // flattened data
  std::vector<double> x_;        // N*p
  std::vector<int> img_begin_;   // N+1
  std::vector<double> u_;        // R*q
  std::vector<double> logc_;     // R*L
  std::vector<double> sumlogc_;  // R
  std::vector<std::uint8_t> has_conf_; // R
  std::vector<int> ann_z_, ann_a_;     // R, 0 when absent
  std::vector<int> observed_y_;        // N (maximum-observed only)

  // state and caches
  ParamState st_;
  std::vector<double> mean_lat_;   // N
  std::vector<double> logfy_;      // N
  double sum_logfy_ = 0.0;
  std::vector<double> logfz_tab_;  // L*A*L
  std::vector<int> hist_;          // L*A*L annotation counts at current y
  double sum_logfz_ = 0.0;
  std::vector<double> s_img_, lgamma_s_; // R
  std::vector<double> logfc_img_;  // R, at the sequence's current y
  double sum_logfc_ = 0.0;
  std::vector<std::vector<int>> seqs_by_cat_; // L lists

  // y marginal accumulation (Rao-Blackwellized over sweeps)
  bool collect_ = false;
  std::vector<double> y_marg_acc_;
  long y_marg_count_ = 0;

  std::vector<std::string> block_names_;
  std::vector<int> block_dim_;
  std::vector<double> scales_;
  std::vector<long> prop_count_, acc_count_;
  double target_block_ = 0.234, target_uni_ = 0.44, adapt_rate_ = 0.6;
};

// Runs the full schedule and returns post-burn-in samples; deterministic
// given cfg.seed. maximum-observed requires observed_y (one per sequence) and
// samples only the latent-score regression parameters.
ChainOutput run_chain(const Dataset& data, const PriorSpec& prior, const McmcConfig& cfg,
                      ModelVariant variant, const std::vector<int>& observed_y = {});

// Posterior predictive pmf at covariates x0: average of the latent-score pmf
// over stored samples.
std::vector<double> posterior_predict(const std::vector<double>& x0, const ChainOutput& chain);

} // namespace bcfuse
