#include "bcfuse/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "bcfuse/normal.hpp"

namespace bcfuse {

void SimConfig::validate() const {
  if (n_train < 1 || n_test < 0) throw std::runtime_error("sim config: need n_train >= 1, n_test >= 0");
  if (L < 2) throw std::runtime_error("sim config: L must be at least 2");
  if (static_cast<int>(beta_true.size()) != p) throw std::runtime_error("sim config: beta_true length != p");
  if (static_cast<int>(max_probs.size()) != L - 2)
    throw std::runtime_error("sim config: max_probs must have L-2 entries");
  for (double m : max_probs)
    if (!(m > 0.0 && m < 1.0)) throw std::runtime_error("sim config: max_probs entries must be in (0,1)");
  if (!(annotated_fraction >= 0.0 && annotated_fraction <= 1.0))
    throw std::runtime_error("sim config: annotated_fraction must be in [0,1]");
  if (annotators < 1) throw std::runtime_error("sim config: need at least one annotator");
  if (r_choices.empty()) throw std::runtime_error("sim config: r_choices must be non-empty");
  for (int r : r_choices)
    if (r < 1) throw std::runtime_error("sim config: image counts must be >= 1");
  if (!(zeta > 0.0)) throw std::runtime_error("sim config: zeta must be positive");
  if (!(ai_correct_confidence > 0.0 && ai_correct_confidence < 1.0))
    throw std::runtime_error("sim config: ai_correct_confidence must be in (0,1)");
}

CovariatePool covariate_pool_standard_normal(int p, int q, int pool_size, Rng& rng) {
  if (pool_size < 1) throw std::invalid_argument("covariate pool: pool_size must be >= 1");
  CovariatePool pool;
  pool.x_rows.assign(pool_size, std::vector<double>(p));
  pool.u_rows.assign(pool_size, std::vector<double>(q));
  for (auto& row : pool.x_rows)
    for (auto& v : row) v = rng.normal();
  for (auto& row : pool.u_rows)
    for (auto& v : row) v = rng.normal();
  return pool;
}

CutoffVector derive_theta_from_max_probs(const std::vector<double>& max_probs, int L) {
  if (static_cast<int>(max_probs.size()) != L - 2)
    throw std::invalid_argument("derive_theta_from_max_probs: need L-2 targets");
  std::vector<double> expanded(L + 1);
  expanded[0] = -std::numeric_limits<double>::infinity();
  expanded[1] = 0.0;
  for (int y = 2; y <= L - 1; ++y) {
    const double target = max_probs[y - 2];
    if (!(target > 0.0 && target < 1.0))
      throw std::invalid_argument("derive_theta_from_max_probs: targets must be in (0,1)");
    const double w = 2.0 * std_normal_quantile(0.5 * (1.0 + target));
    expanded[y] = expanded[y - 1] + w;
  }
  expanded[L] = std::numeric_limits<double>::infinity();
  return CutoffVector::from_expanded(expanded);
}

ParamState make_truth(const SimConfig& cfg, Rng& rng) {
  ParamState truth;
  truth.beta0 = cfg.beta0_true;
  truth.beta = cfg.beta_true;
  truth.omega0 = cfg.omega0_true;
  truth.omega = cfg.omega_true;
  truth.theta = derive_theta_from_max_probs(cfg.max_probs, cfg.L);
  const auto acc = construct_accuracy_cutoffs(cfg.L, cfg.annotator_accuracy);
  truth.nu_tilde = acc.nu_tilde;
  truth.phi = acc.phi;
  const double sd = std::sqrt(cfg.nu_spread);
  truth.nu.assign(cfg.annotators, std::vector<double>(cfg.L, 0.0));
  for (int a = 0; a < cfg.annotators; ++a)
    for (int y = 0; y < cfg.L; ++y) truth.nu[a][y] = rng.normal(truth.nu_tilde[y], sd);
  truth.alpha.assign(cfg.L, std::vector<double>(cfg.L, (1.0 - cfg.ai_correct_confidence) / (cfg.L - 1)));
  for (int y = 0; y < cfg.L; ++y) truth.alpha[y][y] = cfg.ai_correct_confidence;
  return truth;
}

namespace {

Sequence draw_sequence(const SimConfig& cfg, const CovariatePool& pool, const ParamState& truth,
                       const std::string& id, Rng& rng) {
  Sequence seq;
  seq.id = id;
  const int r = cfg.r_choices[rng.uniform_int(static_cast<int>(cfg.r_choices.size()))];
  seq.x = pool.x_rows[rng.uniform_int(static_cast<int>(pool.x_rows.size()))];
  double mean = truth.beta0;
  for (int j = 0; j < cfg.p; ++j) mean += seq.x[j] * truth.beta[j];
  const auto pmf = ordinal_pmf(mean, truth.theta);
  const double u = rng.uniform();
  int y = cfg.L;
  double acc = 0.0;
  for (int l = 0; l < cfg.L; ++l) {
    acc += pmf[l];
    if (u <= acc) {
      y = l + 1;
      break;
    }
  }
  seq.true_y = y;
  seq.images.resize(r);
  for (int k = 0; k < r; ++k) {
    auto& im = seq.images[k];
    im.id = id + "_img" + std::to_string(k + 1);
    im.u = pool.u_rows[rng.uniform_int(static_cast<int>(pool.u_rows.size()))];
    double eta = truth.omega0;
    for (int j = 0; j < cfg.q(); ++j) eta += im.u[j] * truth.omega[j];
    const double s = std::exp(eta);
    std::vector<double> conc(cfg.L);
    for (int l = 0; l < cfg.L; ++l) conc[l] = s * truth.alpha[y - 1][l];
    im.confidence = zeta_adjust(rng.dirichlet(conc), cfg.zeta);
  }
  return seq;
}

} // namespace

SimulatedData generate_dataset(const SimConfig& cfg, const CovariatePool& pool, Rng& rng) {
  cfg.validate();
  if (pool.x_rows.empty()) throw std::invalid_argument("generate_dataset: empty covariate pool");
  SimulatedData out;
  out.truth = make_truth(cfg, rng);
  out.train.L = out.test.L = cfg.L;
  out.train.p = out.test.p = cfg.p;
  out.train.q = out.test.q = cfg.q();
  out.train.A = cfg.annotators;
  out.test.A = cfg.annotators;

  out.train.sequences.reserve(cfg.n_train);
  for (int i = 0; i < cfg.n_train; ++i)
    out.train.sequences.push_back(
        draw_sequence(cfg, pool, out.truth, "train" + std::to_string(i + 1), rng));

  // annotate a uniformly random subset of all training images
  std::vector<int> img_index;
  std::vector<std::pair<int, int>> img_loc; // (sequence, image)
  for (int i = 0; i < cfg.n_train; ++i)
    for (int k = 0; k < static_cast<int>(out.train.sequences[i].images.size()); ++k) {
      img_index.push_back(static_cast<int>(img_loc.size()));
      img_loc.emplace_back(i, k);
    }
  rng.shuffle(img_index);
  const int n_ann = static_cast<int>(std::lround(cfg.annotated_fraction * img_index.size()));
  std::vector<int> chosen(img_index.begin(), img_index.begin() + n_ann);
  std::sort(chosen.begin(), chosen.end()); // annotation draws in data order
  for (int idx : chosen) {
    auto [i, k] = img_loc[idx];
    auto& seq = out.train.sequences[i];
    const int y = *seq.true_y;
    const int a = rng.uniform_int(cfg.annotators) + 1;
    const auto pmf = ordinal_pmf(out.truth.nu[a - 1][y - 1], out.truth.phi[y - 1]);
    const double u = rng.uniform();
    int z = cfg.L;
    double acc = 0.0;
    for (int l = 0; l < cfg.L; ++l) {
      acc += pmf[l];
      if (u <= acc) {
        z = l + 1;
        break;
      }
    }
    seq.images[k].annotation = Annotation{z, a};
  }

  out.test.sequences.reserve(cfg.n_test);
  for (int i = 0; i < cfg.n_test; ++i)
    out.test.sequences.push_back(
        draw_sequence(cfg, pool, out.truth, "test" + std::to_string(i + 1), rng));
  return out;
}

} // namespace bcfuse
