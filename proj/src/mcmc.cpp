#include "bcfuse/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bcfuse/normal.hpp"

namespace bcfuse {

namespace {

constexpr double kLogSqrt2Pi = 0.9189385332046727;

double normal_logpdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - kLogSqrt2Pi;
}

// log P(lo < T <= hi) for T ~ N(mean, 1), floored
double log_cell(double lo, double hi, double mean) {
  const double p = std::max(0.0, std_normal_interval(lo - mean, hi - mean));
  return std::max(std::log(p), kLogFloor);
}

} // namespace

const char* variant_name(ModelVariant v) {
  switch (v) {
    case ModelVariant::kFull: return "full";
    case ModelVariant::kOrdinalOnly: return "ordinal-only";
    case ModelVariant::kCompositionalOnly: return "compositional-only";
    case ModelVariant::kMaximumObserved: return "maximum";
    case ModelVariant::kLinear: return "linear";
  }
  return "?";
}

ModelVariant variant_from_name(const std::string& name) {
  if (name == "full") return ModelVariant::kFull;
  if (name == "ordinal-only") return ModelVariant::kOrdinalOnly;
  if (name == "compositional-only") return ModelVariant::kCompositionalOnly;
  if (name == "maximum") return ModelVariant::kMaximumObserved;
  if (name == "linear") return ModelVariant::kLinear;
  throw std::invalid_argument("unknown model variant: " + name);
}

void McmcConfig::validate() const {
  if (iterations <= 0 || burnin < 0 || burnin >= iterations)
    throw std::runtime_error("mcmc config: need 0 <= burnin < iterations");
  if (thin < 1) throw std::runtime_error("mcmc config: thin must be >= 1");
  if (!(adapt_target_block > 0 && adapt_target_block < 1) ||
      !(adapt_target_univariate > 0 && adapt_target_univariate < 1))
    throw std::runtime_error("mcmc config: adaptation targets must be in (0,1)");
  if (!(adapt_rate > 0) || !(initial_step > 0))
    throw std::runtime_error("mcmc config: adapt_rate and initial_step must be positive");
}

double adapt_scale(double current_scale, bool accepted, int iteration, double target, double rate) {
  if (iteration < 1) throw std::invalid_argument("adapt_scale: iteration must be >= 1");
  const double step = std::pow(static_cast<double>(iteration), -rate);
  return std::exp(std::log(current_scale) + step * ((accepted ? 1.0 : 0.0) - target));
}

// ---------------------------------------------------------------------------
// reference Gibbs conditional

std::vector<double> gibbs_y_conditional(const Sequence& seq, const ParamState& state,
                                        ModelVariant variant) {
  const int L = state.L();
  const bool use_fz = variant != ModelVariant::kCompositionalOnly;
  const bool use_fc = variant != ModelVariant::kOrdinalOnly;
  if (variant == ModelVariant::kMaximumObserved)
    throw std::invalid_argument("gibbs_y_conditional: Y is observed under the maximum variant");
  int n_factors = 0;
  std::vector<double> w(L);
  double obs_max = -std::numeric_limits<double>::infinity();
  for (int y = 1; y <= L; ++y) {
    double obs = 0.0;
    int nf = 0;
    for (const auto& im : seq.images) {
      if (use_fz && im.annotation) {
        obs += log_f_Z(im.annotation->score, y, im.annotation->annotator, state);
        ++nf;
      }
      if (use_fc && im.confidence) {
        obs += log_f_C(*im.confidence, y, im.u, state);
        ++nf;
      }
    }
    n_factors = nf;
    obs_max = std::max(obs_max, obs);
    w[y - 1] = log_f_Y(y, seq.x, state) + obs;
  }
  double wmax = w[0];
  for (double v : w) wmax = std::max(wmax, v);
  if (!std::isfinite(wmax) ||
      (n_factors > 0 && obs_max <= kLogFloor * n_factors + 1e-9))
    throw std::runtime_error("gibbs_y_conditional: degenerate state, all category weights at the floor");
  double sum = 0.0;
  for (auto& v : w) {
    v = std::exp(v - wmax);
    sum += v;
  }
  for (auto& v : w) v /= sum;
  return w;
}

std::vector<int> gibbs_sweep_y(const Dataset& data, const ParamState& state, Rng& rng,
                               ModelVariant variant) {
  std::vector<int> out(data.sequences.size());
  for (std::size_t i = 0; i < data.sequences.size(); ++i) {
    const auto probs = gibbs_y_conditional(data.sequences[i], state, variant);
    const double u = rng.uniform();
    double acc = 0.0;
    int draw = static_cast<int>(probs.size());
    for (std::size_t y = 0; y < probs.size(); ++y) {
      acc += probs[y];
      if (u <= acc) {
        draw = static_cast<int>(y) + 1;
        break;
      }
    }
    out[i] = std::min(draw, static_cast<int>(probs.size()));
  }
  return out;
}

// ---------------------------------------------------------------------------
// sampler

FusionSampler::FusionSampler(const Dataset& data, const PriorSpec& prior, ModelVariant variant,
                             std::vector<int> observed_y)
    : prior_(prior), variant_(variant) {
  if (variant == ModelVariant::kLinear)
    throw std::runtime_error("sampler: the linear setting is fit by fit_bayesian_linear, not run_chain");
  include_fz_ = variant == ModelVariant::kFull || variant == ModelVariant::kOrdinalOnly;
  include_fc_ = variant == ModelVariant::kFull || variant == ModelVariant::kCompositionalOnly;
  gibbs_y_ = variant != ModelVariant::kMaximumObserved;

  N_ = data.n_sequences();
  L_ = data.L;
  p_ = data.p;
  q_ = data.q;
  A_ = std::max(data.A, prior.A);
  if (N_ == 0) throw std::runtime_error("sampler: empty dataset");
  if (prior.L != L_) throw std::runtime_error("sampler: prior L does not match data");
  if (variant == ModelVariant::kOrdinalOnly && data.n_annotations() == 0)
    throw std::runtime_error("sampler: ordinal-only variant requires at least one annotation");
  if (variant == ModelVariant::kCompositionalOnly && data.n_confidences() == 0)
    throw std::runtime_error("sampler: compositional-only variant requires at least one confidence vector");
  if (!gibbs_y_) {
    if (static_cast<int>(observed_y.size()) != N_)
      throw std::runtime_error("sampler: maximum-observed variant requires one observed score per sequence");
    for (int v : observed_y)
      if (v < 1 || v > L_) throw std::runtime_error("sampler: observed score outside 1..L");
    observed_y_ = std::move(observed_y);
  }

  R_ = data.n_images();
  x_.resize(static_cast<std::size_t>(N_) * p_);
  img_begin_.assign(N_ + 1, 0);
  u_.resize(static_cast<std::size_t>(R_) * q_);
  logc_.assign(static_cast<std::size_t>(R_) * L_, 0.0);
  sumlogc_.assign(R_, 0.0);
  has_conf_.assign(R_, 0);
  ann_z_.assign(R_, 0);
  ann_a_.assign(R_, 0);
  int k = 0;
  for (int i = 0; i < N_; ++i) {
    const auto& seq = data.sequences[i];
    std::copy(seq.x.begin(), seq.x.end(), x_.begin() + static_cast<std::size_t>(i) * p_);
    img_begin_[i] = k;
    for (const auto& im : seq.images) {
      std::copy(im.u.begin(), im.u.end(), u_.begin() + static_cast<std::size_t>(k) * q_);
      if (im.confidence) {
        has_conf_[k] = 1;
        double s = 0.0;
        for (int l = 0; l < L_; ++l) {
          const double c = (*im.confidence)[l];
          if (!(c > 0.0))
            throw std::runtime_error("sampler: confidence entries must be strictly positive (zeta-adjust first)");
          logc_[static_cast<std::size_t>(k) * L_ + l] = std::log(c);
          s += logc_[static_cast<std::size_t>(k) * L_ + l];
        }
        sumlogc_[k] = s;
      }
      if (im.annotation) {
        ann_z_[k] = im.annotation->score;
        ann_a_[k] = im.annotation->annotator;
        if (ann_a_[k] > A_) throw std::runtime_error("sampler: annotator index exceeds A");
      }
      ++k;
    }
    img_begin_[i + 1] = k;
  }

  // block schedule, fixed order
  auto add_block = [&](const std::string& name, int dim) {
    block_names_.push_back(name);
    block_dim_.push_back(dim);
  };
  add_block("beta", 1 + p_);
  if (L_ > 2) add_block("theta_tilde", L_ - 2);
  if (gibbs_y_) {
    add_block("omega", 1 + q_);
    for (int y = 1; y <= L_; ++y)
      add_block("phi_alpha_y" + std::to_string(y), (L_ - 2) + (L_ - 1));
    for (int y = 1; y <= L_; ++y)
      for (int a = 1; a <= A_; ++a)
        add_block("nu_y" + std::to_string(y) + "_a" + std::to_string(a), 1);
    for (int y = 1; y <= L_; ++y) add_block("nu_tilde_y" + std::to_string(y), 1);
  }
  scales_.assign(block_names_.size(), 0.1);
  prop_count_.assign(block_names_.size(), 0);
  acc_count_.assign(block_names_.size(), 0);
  y_marg_acc_.assign(static_cast<std::size_t>(N_) * L_, 0.0);
}

ParamState FusionSampler::initial_state() const {
  ParamState s;
  s.beta0 = 0.0;
  s.beta.assign(p_, 0.0);
  s.omega0 = 0.0;
  s.omega.assign(q_, 0.0);
  s.theta = CutoffVector::from_raw(prior_.theta_tilde_means);
  s.phi.resize(L_);
  for (int y = 0; y < L_; ++y) s.phi[y] = CutoffVector::from_raw(prior_.phi_tilde_means[y]);
  s.nu_tilde = prior_.nu_tilde_centers;
  s.nu.assign(A_, std::vector<double>(L_, 0.0));
  for (int a = 0; a < A_; ++a)
    for (int y = 0; y < L_; ++y) s.nu[a][y] = s.nu_tilde[y];
  s.alpha = prior_.alpha_concentration; // rows sum to 1: prior mean
  s.y.resize(N_);
  for (int i = 0; i < N_; ++i) {
    if (!gibbs_y_) {
      s.y[i] = observed_y_[i];
      continue;
    }
    // mode of annotations when present, else argmax of the mean confidence
    std::vector<int> counts(L_, 0);
    std::vector<double> csum(L_, 0.0);
    bool any_ann = false, any_conf = false;
    for (int k = img_begin_[i]; k < img_begin_[i + 1]; ++k) {
      if (ann_z_[k] > 0) {
        ++counts[ann_z_[k] - 1];
        any_ann = true;
      }
      if (has_conf_[k]) {
        for (int l = 0; l < L_; ++l) csum[l] += std::exp(logc_[static_cast<std::size_t>(k) * L_ + l]);
        any_conf = true;
      }
    }
    int best = 1;
    if (any_ann) {
      for (int l = 1; l < L_; ++l)
        if (counts[l] > counts[best - 1]) best = l + 1;
    } else if (any_conf) {
      for (int l = 1; l < L_; ++l)
        if (csum[l] > csum[best - 1]) best = l + 1;
    }
    s.y[i] = best;
  }
  return s;
}

void FusionSampler::set_state(const ParamState& s) {
  if (s.L() != L_ || static_cast<int>(s.beta.size()) != p_ ||
      static_cast<int>(s.omega.size()) != q_ || s.A() != A_ ||
      static_cast<int>(s.y.size()) != N_)
    throw std::runtime_error("sampler: state dimensions do not match data");
  st_ = s;
  if (!gibbs_y_) st_.y = observed_y_;
  rebuild_caches();
}

double FusionSampler::conf_ydep(int k, int /*y*/, const std::vector<double>& alpha_row) const {
  const double s = s_img_[k];
  const double* lc = &logc_[static_cast<std::size_t>(k) * L_];
  double v = 0.0;
  for (int l = 0; l < L_; ++l) v += s * alpha_row[l] * lc[l] - std::lgamma(s * alpha_row[l]);
  return v;
}

void FusionSampler::rebuild_fz_table() {
  logfz_tab_.assign(static_cast<std::size_t>(L_) * A_ * L_, 0.0);
  if (!include_fz_) return;
  for (int y = 1; y <= L_; ++y) {
    const auto& cut = st_.phi[y - 1];
    for (int a = 1; a <= A_; ++a) {
      const double mean = st_.nu[a - 1][y - 1];
      for (int z = 1; z <= L_; ++z) fz_cell(y, a, z) = log_cell(cut.lower(z), cut.upper(z), mean);
    }
  }
}

void FusionSampler::rebuild_y_indexes() {
  hist_.assign(static_cast<std::size_t>(L_) * A_ * L_, 0);
  seqs_by_cat_.assign(L_, {});
  for (int i = 0; i < N_; ++i) {
    const int y = st_.y[i];
    seqs_by_cat_[y - 1].push_back(i);
    for (int k = img_begin_[i]; k < img_begin_[i + 1]; ++k)
      if (ann_z_[k] > 0) ++hist_[((y - 1) * A_ + (ann_a_[k] - 1)) * static_cast<std::size_t>(L_) + (ann_z_[k] - 1)];
  }
}

void FusionSampler::rebuild_caches() {
  mean_lat_.assign(N_, 0.0);
  logfy_.assign(N_, 0.0);
  for (int i = 0; i < N_; ++i) {
    double m = st_.beta0;
    const double* xr = &x_[static_cast<std::size_t>(i) * p_];
    for (int j = 0; j < p_; ++j) m += xr[j] * st_.beta[j];
    mean_lat_[i] = m;
    logfy_[i] = log_cell(st_.theta.lower(st_.y[i]), st_.theta.upper(st_.y[i]), m);
  }
  s_img_.assign(R_, 0.0);
  lgamma_s_.assign(R_, 0.0);
  logfc_img_.assign(R_, 0.0);
  if (include_fc_) {
    for (int i = 0; i < N_; ++i) {
      for (int k = img_begin_[i]; k < img_begin_[i + 1]; ++k) {
        double eta = st_.omega0;
        const double* ur = &u_[static_cast<std::size_t>(k) * q_];
        for (int j = 0; j < q_; ++j) eta += ur[j] * st_.omega[j];
        s_img_[k] = std::exp(eta);
        lgamma_s_[k] = std::lgamma(s_img_[k]);
        if (has_conf_[k])
          logfc_img_[k] = conf_ydep(k, st_.y[i], st_.alpha[st_.y[i] - 1]) + lgamma_s_[k] - sumlogc_[k];
      }
    }
  }
  rebuild_fz_table();
  rebuild_y_indexes();
}

double FusionSampler::log_lik() const {
  double ll = 0.0;
  for (int i = 0; i < N_; ++i) ll += logfy_[i];
  if (include_fz_) {
    for (std::size_t c = 0; c < logfz_tab_.size(); ++c) ll += hist_[c] * logfz_tab_[c];
  }
  if (include_fc_) {
    for (int k = 0; k < R_; ++k)
      if (has_conf_[k]) ll += logfc_img_[k];
  }
  return ll;
}

// ---------------------------------------------------------------------------
// Gibbs update of the latent scores

void FusionSampler::gibbs_update_y(Rng& rng) {
  if (!gibbs_y_) return;
  std::vector<double> w(L_), probs(L_), logpmf(L_);
  std::vector<double> ydep; // per image row of L category-dependent values
  for (int i = 0; i < N_; ++i) {
    const auto& cut = st_.theta;
    for (int y = 1; y <= L_; ++y) {
      logpmf[y - 1] = log_cell(cut.lower(y), cut.upper(y), mean_lat_[i]);
      w[y - 1] = logpmf[y - 1];
    }
    const int kb = img_begin_[i], ke = img_begin_[i + 1];
    if (include_fc_) {
      ydep.assign(static_cast<std::size_t>(ke - kb) * L_, 0.0);
      for (int k = kb; k < ke; ++k) {
        if (!has_conf_[k]) continue;
        const double s = s_img_[k];
        const double* lc = &logc_[static_cast<std::size_t>(k) * L_];
        double* row = &ydep[static_cast<std::size_t>(k - kb) * L_];
        for (int y = 0; y < L_; ++y) {
          const auto& ar = st_.alpha[y];
          double v = 0.0;
          for (int l = 0; l < L_; ++l) v += s * ar[l] * lc[l] - std::lgamma(s * ar[l]);
          row[y] = v;
          w[y] += v;
        }
      }
    }
    if (include_fz_) {
      for (int k = kb; k < ke; ++k) {
        if (ann_z_[k] == 0) continue;
        for (int y = 1; y <= L_; ++y) w[y - 1] += fz_cell(y, ann_a_[k], ann_z_[k]);
      }
    }
    double wmax = w[0];
    for (int y = 1; y < L_; ++y) wmax = std::max(wmax, w[y]);
    if (!std::isfinite(wmax))
      throw std::runtime_error("sampler: degenerate category weights for sequence " + std::to_string(i));
    double sum = 0.0;
    for (int y = 0; y < L_; ++y) {
      probs[y] = std::exp(w[y] - wmax);
      sum += probs[y];
    }
    for (int y = 0; y < L_; ++y) probs[y] /= sum;
    if (collect_) {
      for (int y = 0; y < L_; ++y) y_marg_acc_[static_cast<std::size_t>(i) * L_ + y] += probs[y];
    }
    const double uu = rng.uniform();
    double acc = 0.0;
    int draw = L_;
    for (int y = 0; y < L_; ++y) {
      acc += probs[y];
      if (uu <= acc) {
        draw = y + 1;
        break;
      }
    }
    st_.y[i] = draw;
    logfy_[i] = logpmf[draw - 1];
    if (include_fc_) {
      for (int k = kb; k < ke; ++k)
        if (has_conf_[k])
          logfc_img_[k] = ydep[static_cast<std::size_t>(k - kb) * L_ + (draw - 1)] + lgamma_s_[k] - sumlogc_[k];
    }
  }
  if (collect_) ++y_marg_count_;
  rebuild_y_indexes();
}

std::vector<double> FusionSampler::y_conditional(int i) const {
  std::vector<double> w(L_);
  for (int y = 1; y <= L_; ++y) {
    double lw = log_cell(st_.theta.lower(y), st_.theta.upper(y), mean_lat_[i]);
    for (int k = img_begin_[i]; k < img_begin_[i + 1]; ++k) {
      if (include_fz_ && ann_z_[k] > 0) lw += fz_cell(y, ann_a_[k], ann_z_[k]);
      if (include_fc_ && has_conf_[k])
        lw += conf_ydep(k, y, st_.alpha[y - 1]) + lgamma_s_[k] - sumlogc_[k];
    }
    w[y - 1] = lw;
  }
  double wmax = *std::max_element(w.begin(), w.end());
  double sum = 0.0;
  for (auto& v : w) {
    v = std::exp(v - wmax);
    sum += v;
  }
  for (auto& v : w) v /= sum;
  return w;
}

std::vector<std::vector<double>> FusionSampler::y_marginals() const {
  std::vector<std::vector<double>> out;
  if (!gibbs_y_ || y_marg_count_ == 0) return out;
  out.assign(N_, std::vector<double>(L_, 0.0));
  for (int i = 0; i < N_; ++i)
    for (int y = 0; y < L_; ++y)
      out[i][y] = y_marg_acc_[static_cast<std::size_t>(i) * L_ + y] / static_cast<double>(y_marg_count_);
  return out;
}

// ---------------------------------------------------------------------------
// MH blocks

bool FusionSampler::update_beta(Rng& rng, int block) {
  const double s = scales_[block];
  const double db0 = s * rng.normal();
  std::vector<double> db(p_);
  for (auto& v : db) v = s * rng.normal();
  double dprior = normal_logpdf(st_.beta0 + db0, 0.0, prior_.intercept_sd) -
                  normal_logpdf(st_.beta0, 0.0, prior_.intercept_sd);
  for (int j = 0; j < p_; ++j)
    dprior += normal_logpdf(st_.beta[j] + db[j], 0.0, prior_.beta_sd) -
              normal_logpdf(st_.beta[j], 0.0, prior_.beta_sd);
  std::vector<double> nmean(N_), nlogfy(N_);
  double dlik = 0.0;
  for (int i = 0; i < N_; ++i) {
    double m = mean_lat_[i] + db0;
    const double* xr = &x_[static_cast<std::size_t>(i) * p_];
    for (int j = 0; j < p_; ++j) m += xr[j] * db[j];
    nmean[i] = m;
    nlogfy[i] = log_cell(st_.theta.lower(st_.y[i]), st_.theta.upper(st_.y[i]), m);
    dlik += nlogfy[i] - logfy_[i];
  }
  const double delta = dlik + dprior;
  if (!std::isfinite(delta)) return false;
  if (std::log(rng.uniform()) >= delta) return false;
  st_.beta0 += db0;
  for (int j = 0; j < p_; ++j) st_.beta[j] += db[j];
  mean_lat_.swap(nmean);
  logfy_.swap(nlogfy);
  return true;
}

bool FusionSampler::update_theta(Rng& rng, int block) {
  const double s = scales_[block];
  std::vector<double> raw = st_.theta.raw();
  const double cut_sd = std::sqrt(prior_.cutoff_log_var);
  double dprior = 0.0;
  for (std::size_t j = 0; j < raw.size(); ++j) {
    const double nr = raw[j] + s * rng.normal();
    dprior += normal_logpdf(nr, prior_.theta_tilde_means[j], cut_sd) -
              normal_logpdf(raw[j], prior_.theta_tilde_means[j], cut_sd);
    raw[j] = nr;
  }
  const CutoffVector ntheta = CutoffVector::from_raw(raw);
  std::vector<double> nlogfy(N_);
  double dlik = 0.0;
  for (int i = 0; i < N_; ++i) {
    nlogfy[i] = log_cell(ntheta.lower(st_.y[i]), ntheta.upper(st_.y[i]), mean_lat_[i]);
    dlik += nlogfy[i] - logfy_[i];
  }
  const double delta = dlik + dprior;
  if (!std::isfinite(delta)) return false;
  if (std::log(rng.uniform()) >= delta) return false;
  st_.theta = ntheta;
  logfy_.swap(nlogfy);
  return true;
}

bool FusionSampler::update_omega(Rng& rng, int block) {
  const double s = scales_[block];
  const double nomega0 = st_.omega0 + s * rng.normal();
  std::vector<double> nomega(q_);
  for (int j = 0; j < q_; ++j) nomega[j] = st_.omega[j] + s * rng.normal();
  double dprior = normal_logpdf(nomega0, 0.0, prior_.omega_sd) -
                  normal_logpdf(st_.omega0, 0.0, prior_.omega_sd);
  for (int j = 0; j < q_; ++j)
    dprior += normal_logpdf(nomega[j], 0.0, prior_.omega_sd) -
              normal_logpdf(st_.omega[j], 0.0, prior_.omega_sd);
  std::vector<double> ns, nlg, nfc;
  double dlik = 0.0;
  bool ok = true;
  if (include_fc_) {
    ns.assign(R_, 0.0);
    nlg.assign(R_, 0.0);
    nfc.assign(R_, 0.0);
    for (int i = 0; i < N_ && ok; ++i) {
      const auto& arow = st_.alpha[st_.y[i] - 1];
      for (int k = img_begin_[i]; k < img_begin_[i + 1]; ++k) {
        double eta = nomega0;
        const double* ur = &u_[static_cast<std::size_t>(k) * q_];
        for (int j = 0; j < q_; ++j) eta += ur[j] * nomega[j];
        ns[k] = std::exp(eta);
        if (!std::isfinite(ns[k]) || ns[k] <= 0.0) {
          ok = false;
          break;
        }
        nlg[k] = std::lgamma(ns[k]);
        if (has_conf_[k]) {
          const double* lc = &logc_[static_cast<std::size_t>(k) * L_];
          double v = 0.0;
          for (int l = 0; l < L_; ++l) v += ns[k] * arow[l] * lc[l] - std::lgamma(ns[k] * arow[l]);
          nfc[k] = v + nlg[k] - sumlogc_[k];
          dlik += nfc[k] - logfc_img_[k];
        }
      }
    }
  }
  const double delta = dlik + dprior;
  if (!ok || !std::isfinite(delta)) return false;
  if (std::log(rng.uniform()) >= delta) return false;
  st_.omega0 = nomega0;
  st_.omega.swap(nomega);
  if (include_fc_) {
    s_img_.swap(ns);
    lgamma_s_.swap(nlg);
    for (int k = 0; k < R_; ++k)
      if (has_conf_[k]) logfc_img_[k] = nfc[k];
  }
  return true;
}

bool FusionSampler::update_phi_alpha(int y, Rng& rng, int block) {
  const double s = scales_[block];
  const double cut_sd = std::sqrt(prior_.cutoff_log_var);
  // cutoff increments
  std::vector<double> raw = st_.phi[y - 1].raw();
  double dprior = 0.0;
  for (std::size_t j = 0; j < raw.size(); ++j) {
    const double nr = raw[j] + s * rng.normal();
    dprior += normal_logpdf(nr, prior_.phi_tilde_means[y - 1][j], cut_sd) -
              normal_logpdf(raw[j], prior_.phi_tilde_means[y - 1][j], cut_sd);
    raw[j] = nr;
  }
  const CutoffVector nphi = CutoffVector::from_raw(raw);
  // mean vector on the centered log-ratio scale; the projected Gaussian step
  // is symmetric on the sum-zero hyperplane
  const auto& aold = st_.alpha[y - 1];
  std::vector<double> wv(L_), eps(L_);
  double wmean = 0.0, emean = 0.0;
  for (int l = 0; l < L_; ++l) {
    wv[l] = std::log(aold[l]);
    wmean += wv[l];
    eps[l] = rng.normal();
    emean += eps[l];
  }
  wmean /= L_;
  emean /= L_;
  double mx = -1e300;
  for (int l = 0; l < L_; ++l) {
    wv[l] = (wv[l] - wmean) + s * (eps[l] - emean);
    mx = std::max(mx, wv[l]);
  }
  std::vector<double> anew(L_);
  double asum = 0.0;
  for (int l = 0; l < L_; ++l) {
    anew[l] = std::exp(wv[l] - mx);
    asum += anew[l];
  }
  double djac = 0.0;
  for (int l = 0; l < L_; ++l) {
    anew[l] /= asum;
    if (!(anew[l] > 0.0)) return false; // underflow off the simplex interior
    djac += std::log(anew[l]) - std::log(aold[l]);
  }
  dprior += dirichlet_logpdf(anew, prior_.alpha_concentration[y - 1]) -
            dirichlet_logpdf(aold, prior_.alpha_concentration[y - 1]);
  // nu_tilde support moves with the cutoffs
  double lo, hi, nlo, nhi;
  nu_tilde_support(prior_, st_.phi[y - 1], y, &lo, &hi);
  nu_tilde_support(prior_, nphi, y, &nlo, &nhi);
  const double nt = st_.nu_tilde[y - 1];
  dprior += (nt >= nlo && nt <= nhi) ? -std::log(nhi - nlo) : -1e10;
  dprior -= (nt >= lo && nt <= hi) ? -std::log(hi - lo) : -1e10;

  double dlik = 0.0;
  std::vector<double> ntab;
  if (include_fz_) {
    ntab.assign(static_cast<std::size_t>(A_) * L_, 0.0);
    for (int a = 1; a <= A_; ++a) {
      const double mean = st_.nu[a - 1][y - 1];
      for (int z = 1; z <= L_; ++z) {
        const double cell = log_cell(nphi.lower(z), nphi.upper(z), mean);
        ntab[static_cast<std::size_t>(a - 1) * L_ + (z - 1)] = cell;
        const int h = hist_[((y - 1) * A_ + (a - 1)) * static_cast<std::size_t>(L_) + (z - 1)];
        if (h) dlik += h * (cell - fz_cell(y, a, z));
      }
    }
  }
  std::vector<std::pair<int, double>> nfc;
  if (include_fc_) {
    for (int i : seqs_by_cat_[y - 1]) {
      for (int k = img_begin_[i]; k < img_begin_[i + 1]; ++k) {
        if (!has_conf_[k]) continue;
        const double v = conf_ydep(k, y, anew) + lgamma_s_[k] - sumlogc_[k];
        nfc.emplace_back(k, v);
        dlik += v - logfc_img_[k];
      }
    }
  }
  const double delta = dlik + dprior + djac;
  if (!std::isfinite(delta)) return false;
  if (std::log(rng.uniform()) >= delta) return false;
  st_.phi[y - 1] = nphi;
  st_.alpha[y - 1] = anew;
  if (include_fz_) {
    for (int a = 1; a <= A_; ++a)
      for (int z = 1; z <= L_; ++z) fz_cell(y, a, z) = ntab[static_cast<std::size_t>(a - 1) * L_ + (z - 1)];
  }
  for (const auto& [k, v] : nfc) logfc_img_[k] = v;
  return true;
}

bool FusionSampler::update_nu(int y, int a, Rng& rng, int block) {
  const double s = scales_[block];
  const double old = st_.nu[a - 1][y - 1];
  const double prop = old + s * rng.normal();
  const double nu_sd = std::sqrt(prior_.nu_conditional_var);
  double delta = normal_logpdf(prop, st_.nu_tilde[y - 1], nu_sd) -
                 normal_logpdf(old, st_.nu_tilde[y - 1], nu_sd);
  std::vector<double> ncells(L_);
  if (include_fz_) {
    const auto& cut = st_.phi[y - 1];
    for (int z = 1; z <= L_; ++z) {
      ncells[z - 1] = log_cell(cut.lower(z), cut.upper(z), prop);
      const int h = hist_[((y - 1) * A_ + (a - 1)) * static_cast<std::size_t>(L_) + (z - 1)];
      if (h) delta += h * (ncells[z - 1] - fz_cell(y, a, z));
    }
  }
  if (!std::isfinite(delta)) return false;
  if (std::log(rng.uniform()) >= delta) return false;
  st_.nu[a - 1][y - 1] = prop;
  if (include_fz_)
    for (int z = 1; z <= L_; ++z) fz_cell(y, a, z) = ncells[z - 1];
  return true;
}

bool FusionSampler::update_nu_tilde(int y, Rng& rng, int block) {
  const double s = scales_[block];
  const double old = st_.nu_tilde[y - 1];
  const double prop = old + s * rng.normal();
  double lo, hi;
  nu_tilde_support(prior_, st_.phi[y - 1], y, &lo, &hi);
  double delta = ((prop >= lo && prop <= hi) ? -std::log(hi - lo) : -1e10) -
                 ((old >= lo && old <= hi) ? -std::log(hi - lo) : -1e10);
  const double nu_sd = std::sqrt(prior_.nu_conditional_var);
  for (int a = 0; a < A_; ++a)
    delta += normal_logpdf(st_.nu[a][y - 1], prop, nu_sd) -
             normal_logpdf(st_.nu[a][y - 1], old, nu_sd);
  if (!std::isfinite(delta)) return false;
  if (std::log(rng.uniform()) >= delta) return false;
  st_.nu_tilde[y - 1] = prop;
  return true;
}

bool FusionSampler::update_block(int block, Rng& rng) {
  const std::string& name = block_names_[block];
  bool acc = false;
  if (name == "beta") {
    acc = update_beta(rng, block);
  } else if (name == "theta_tilde") {
    acc = update_theta(rng, block);
  } else if (name == "omega") {
    acc = update_omega(rng, block);
  } else if (name.rfind("phi_alpha_y", 0) == 0) {
    acc = update_phi_alpha(std::stoi(name.substr(11)), rng, block);
  } else if (name.rfind("nu_tilde_y", 0) == 0) {
    acc = update_nu_tilde(std::stoi(name.substr(10)), rng, block);
  } else if (name.rfind("nu_y", 0) == 0) {
    const auto sep = name.find("_a");
    acc = update_nu(std::stoi(name.substr(4, sep - 4)), std::stoi(name.substr(sep + 2)), rng, block);
  } else {
    throw std::logic_error("unknown block " + name);
  }
  ++prop_count_[block];
  if (acc) ++acc_count_[block];
  return acc;
}

void FusionSampler::sweep(Rng& rng, bool adapt, int iteration) {
  gibbs_update_y(rng);
  for (int b = 0; b < n_blocks(); ++b) {
    const bool acc = update_block(b, rng);
    if (adapt) {
      const double target = block_dim_[b] > 1 ? target_block_ : target_uni_;
      scales_[b] = adapt_scale(scales_[b], acc, iteration, target, adapt_rate_);
    }
  }
}

void FusionSampler::reset_accept_counts() {
  std::fill(prop_count_.begin(), prop_count_.end(), 0);
  std::fill(acc_count_.begin(), acc_count_.end(), 0);
}

std::vector<double> FusionSampler::acceptance_rates() const {
  std::vector<double> out(block_names_.size(), 0.0);
  for (std::size_t b = 0; b < out.size(); ++b)
    if (prop_count_[b] > 0) out[b] = static_cast<double>(acc_count_[b]) / prop_count_[b];
  return out;
}

// ---------------------------------------------------------------------------

std::pair<ParamState, bool> mh_update_block(const std::string& block, const ParamState& state,
                                            const Dataset& data, const PriorSpec& prior,
                                            double proposal_scale, Rng& rng, ModelVariant variant,
                                            const std::vector<int>& observed_y) {
  FusionSampler eng(data, prior, variant, observed_y);
  eng.set_state(state);
  const auto& names = eng.block_names();
  const auto it = std::find(names.begin(), names.end(), block);
  if (it == names.end()) throw std::invalid_argument("mh_update_block: unknown block " + block);
  const int b = static_cast<int>(it - names.begin());
  eng.set_scale(b, proposal_scale);
  const bool accepted = eng.update_block(b, rng);
  return {eng.state(), accepted};
}

ChainOutput run_chain(const Dataset& data, const PriorSpec& prior, const McmcConfig& cfg,
                      ModelVariant variant, const std::vector<int>& observed_y) {
  cfg.validate();
  data.validate(1e-9);
  FusionSampler eng(data, prior, variant, observed_y);
  eng.set_state(eng.initial_state());
  for (int b = 0; b < eng.n_blocks(); ++b) eng.set_scale(b, cfg.initial_step);
  eng.set_adapt_targets(cfg.adapt_target_block, cfg.adapt_target_univariate, cfg.adapt_rate);

  Rng rng(cfg.seed);
  ChainOutput out;
  out.variant = variant;
  out.block_names = eng.block_names();
  out.log_post_trace.reserve(cfg.iterations);
  for (int t = 1; t <= cfg.iterations; ++t) {
    if (t == cfg.burnin + 1) {
      eng.reset_accept_counts();
      eng.set_collect(true);
    }
    eng.sweep(rng, t <= cfg.burnin, t);
    out.log_post_trace.push_back(eng.log_posterior());
    if (t > cfg.burnin && (t - cfg.burnin) % cfg.thin == 0) out.samples.push_back(eng.state());
  }
  out.acceptance_rates = eng.acceptance_rates();
  out.y_marginals = eng.y_marginals();
  return out;
}

std::vector<double> posterior_predict(const std::vector<double>& x0, const ChainOutput& chain) {
  if (chain.samples.empty()) throw std::invalid_argument("posterior_predict: empty chain");
  const int L = chain.samples.front().L();
  std::vector<double> out(L, 0.0);
  for (const auto& s : chain.samples) {
    if (x0.size() != s.beta.size()) throw std::invalid_argument("posterior_predict: covariate length != p");
    double m = s.beta0;
    for (std::size_t j = 0; j < x0.size(); ++j) m += x0[j] * s.beta[j];
    const auto pmf = ordinal_pmf(m, s.theta);
    for (int y = 0; y < L; ++y) out[y] += pmf[y];
  }
  for (auto& v : out) v /= static_cast<double>(chain.samples.size());
  return out;
}

} // namespace bcfuse
