#include "bcfuse/prior.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "bcfuse/normal.hpp"

namespace bcfuse {

namespace {

constexpr double kPriorFloor = -1e10;
constexpr double kLogSqrt2Pi = 0.9189385332046727;

double normal_logpdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - kLogSqrt2Pi;
}

} // namespace

void PriorSpec::validate() const {
  if (L < 2) throw std::runtime_error("prior: L must be at least 2");
  if (!(beta_sd > 0 && intercept_sd > 0 && omega_sd > 0 && cutoff_log_var > 0 &&
        nu_conditional_var > 0 && nu_tilde_edge_window > 0))
    throw std::runtime_error("prior: variances must be positive");
  if (static_cast<int>(theta_tilde_means.size()) != L - 2)
    throw std::runtime_error("prior: theta_tilde_means must have L-2 entries");
  if (static_cast<int>(phi_tilde_means.size()) != L || static_cast<int>(nu_tilde_centers.size()) != L ||
      static_cast<int>(alpha_concentration.size()) != L)
    throw std::runtime_error("prior: per-category fields must have L entries");
  for (const auto& row : alpha_concentration)
    for (double m : row)
      if (!(m > 0)) throw std::runtime_error("prior: alpha concentrations must be strictly positive");
}

std::vector<double> theta_prior_means(int L) {
  if (L < 3) throw std::invalid_argument("theta_prior_means: L must be at least 3");
  // interior cell of width w has maximum probability 2*Phi(w/2)-1, attained
  // with the latent mean at the cell midpoint; solve for probability 0.5
  const double w = 2.0 * std_normal_quantile(0.75);
  return std::vector<double>(L - 2, std::log(w));
}

AccuracyCutoffs construct_accuracy_cutoffs(int L, double accuracy) {
  if (L < 2) throw std::invalid_argument("construct_accuracy_cutoffs: L must be at least 2");
  if (!(accuracy > 0.0 && accuracy < 1.0))
    throw std::invalid_argument("construct_accuracy_cutoffs: accuracy must be in (0,1)");
  const double off = (1.0 - accuracy) / (L - 1);
  AccuracyCutoffs out;
  out.nu_tilde.resize(L);
  out.phi.resize(L);
  for (int y = 1; y <= L; ++y) {
    // cumulative target probabilities at the L-1 finite cutoffs
    std::vector<double> cum(L - 1);
    double acc = 0.0;
    for (int z = 1; z <= L - 1; ++z) {
      acc += (z == y) ? accuracy : off;
      cum[z - 1] = acc;
    }
    // phi_{y,1} = 0 pins the mean; remaining cutoffs follow from the quantiles
    const double q1 = std_normal_quantile(cum[0]);
    out.nu_tilde[y - 1] = -q1;
    std::vector<double> expanded(L + 1);
    expanded[0] = -std::numeric_limits<double>::infinity();
    for (int z = 1; z <= L - 1; ++z) expanded[z] = std_normal_quantile(cum[z - 1]) - q1;
    expanded[L] = std::numeric_limits<double>::infinity();
    out.phi[y - 1] = CutoffVector::from_expanded(expanded);

    // verify the targets are met
    const auto pmf = ordinal_pmf(out.nu_tilde[y - 1], out.phi[y - 1]);
    double resid = 0.0;
    for (int z = 1; z <= L; ++z) {
      const double target = (z == y) ? accuracy : off;
      resid = std::max(resid, std::fabs(pmf[z - 1] - target));
    }
    if (resid > 1e-10) {
      std::ostringstream msg;
      msg << "construct_accuracy_cutoffs: category " << y << " residual " << resid;
      throw std::runtime_error(msg.str());
    }
  }
  return out;
}

PriorSpec default_prior(int L, int p, int q, int A) {
  if (L < 2) throw std::invalid_argument("default_prior: L must be at least 2");
  PriorSpec spec;
  spec.L = L;
  spec.p = p;
  spec.q = q;
  spec.A = A;
  spec.beta_sd = 1.0;
  spec.intercept_sd = std::sqrt(10.0);
  spec.omega_sd = std::sqrt(10.0);
  spec.cutoff_log_var = 10.0;
  spec.theta_tilde_means = (L >= 3) ? theta_prior_means(L) : std::vector<double>{};
  const auto acc = construct_accuracy_cutoffs(L, 0.95);
  spec.nu_tilde_centers = acc.nu_tilde;
  spec.phi_tilde_means.resize(L);
  for (int y = 0; y < L; ++y) spec.phi_tilde_means[y] = acc.phi[y].raw();
  spec.nu_conditional_var = 0.2;
  spec.annotator_accuracy = 0.95;
  spec.alpha_concentration.assign(L, std::vector<double>(L, 0.6 / (L - 1)));
  for (int y = 0; y < L; ++y) spec.alpha_concentration[y][y] = 0.4;
  return spec;
}

double dirichlet_logpdf(const std::vector<double>& x, const std::vector<double>& conc) {
  if (x.size() != conc.size()) throw std::invalid_argument("dirichlet_logpdf: length mismatch");
  double total = 0.0, lp = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0)) return kPriorFloor;
    total += conc[i];
    lp += (conc[i] - 1.0) * std::log(x[i]) - std::lgamma(conc[i]);
  }
  return lp + std::lgamma(total);
}

// the cell for category y, with half-infinite outer cells truncated to the
// edge window
void nu_tilde_support(const PriorSpec& spec, const CutoffVector& phi, int y,
                      double* lo, double* hi) {
  *lo = phi.lower(y);
  *hi = phi.upper(y);
  if (y == 1) *lo = *hi - spec.nu_tilde_edge_window;
  if (y == spec.L) *hi = *lo + spec.nu_tilde_edge_window;
}

double log_prior(const ParamState& state, const PriorSpec& spec) {
  const int L = spec.L;
  double lp = normal_logpdf(state.beta0, 0.0, spec.intercept_sd);
  for (double b : state.beta) lp += normal_logpdf(b, 0.0, spec.beta_sd);
  lp += normal_logpdf(state.omega0, 0.0, spec.omega_sd);
  for (double w : state.omega) lp += normal_logpdf(w, 0.0, spec.omega_sd);

  const double cut_sd = std::sqrt(spec.cutoff_log_var);
  for (int j = 0; j < L - 2; ++j)
    lp += normal_logpdf(state.theta.raw()[j], spec.theta_tilde_means[j], cut_sd);
  for (int y = 0; y < L; ++y)
    for (int j = 0; j < L - 2; ++j)
      lp += normal_logpdf(state.phi[y].raw()[j], spec.phi_tilde_means[y][j], cut_sd);

  const double nu_sd = std::sqrt(spec.nu_conditional_var);
  for (int y = 1; y <= L; ++y) {
    double lo, hi;
    nu_tilde_support(spec, state.phi[y - 1], y, &lo, &hi);
    const double nt = state.nu_tilde[y - 1];
    if (nt < lo || nt > hi) {
      lp += kPriorFloor;
    } else {
      lp -= std::log(hi - lo);
    }
    for (int a = 0; a < spec.A; ++a) lp += normal_logpdf(state.nu[a][y - 1], nt, nu_sd);
    lp += dirichlet_logpdf(state.alpha[y - 1], spec.alpha_concentration[y - 1]);
  }
  return std::max(lp, kPriorFloor);
}

ParamState prior_sample(const PriorSpec& spec, Rng& rng) {
  const int L = spec.L;
  const double cut_sd = std::sqrt(spec.cutoff_log_var);
  const double nu_sd = std::sqrt(spec.nu_conditional_var);
  ParamState s;
  s.beta0 = rng.normal(0.0, spec.intercept_sd);
  s.beta.resize(spec.p);
  for (auto& b : s.beta) b = rng.normal(0.0, spec.beta_sd);
  s.omega0 = rng.normal(0.0, spec.omega_sd);
  s.omega.resize(spec.q);
  for (auto& w : s.omega) w = rng.normal(0.0, spec.omega_sd);

  std::vector<double> raw(L - 2);
  for (int j = 0; j < L - 2; ++j) raw[j] = rng.normal(spec.theta_tilde_means[j], cut_sd);
  s.theta = CutoffVector::from_raw(raw);

  s.phi.resize(L);
  s.nu_tilde.resize(L);
  s.alpha.resize(L);
  s.nu.assign(spec.A, std::vector<double>(L, 0.0));
  for (int y = 1; y <= L; ++y) {
    for (int j = 0; j < L - 2; ++j) raw[j] = rng.normal(spec.phi_tilde_means[y - 1][j], cut_sd);
    s.phi[y - 1] = CutoffVector::from_raw(raw);
    double lo, hi;
    nu_tilde_support(spec, s.phi[y - 1], y, &lo, &hi);
    s.nu_tilde[y - 1] = lo + rng.uniform() * (hi - lo);
    for (int a = 0; a < spec.A; ++a) s.nu[a][y - 1] = rng.normal(s.nu_tilde[y - 1], nu_sd);
    s.alpha[y - 1] = rng.dirichlet(spec.alpha_concentration[y - 1]);
  }
  return s;
}

} // namespace bcfuse
