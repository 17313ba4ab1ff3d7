#include "bcfuse/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bcfuse/normal.hpp"

namespace bcfuse {

void ParamState::validate() const {
  const int nl = L();
  if (nl < 2) throw std::runtime_error("state: L must be at least 2");
  if (theta.categories() != nl) throw std::runtime_error("state: theta has wrong category count");
  if (static_cast<int>(phi.size()) != nl) throw std::runtime_error("state: phi must have L entries");
  if (static_cast<int>(nu_tilde.size()) != nl) throw std::runtime_error("state: nu_tilde must have L entries");
  for (int y = 1; y <= nl; ++y) {
    const auto& row = alpha[y - 1];
    if (static_cast<int>(row.size()) != nl) throw std::runtime_error("state: alpha row has wrong length");
    double sum = 0.0;
    for (double a : row) {
      if (!(a >= 0.0)) throw std::runtime_error("state: negative alpha entry");
      sum += a;
    }
    if (std::fabs(sum - 1.0) > 1e-9) throw std::runtime_error("state: alpha row does not sum to 1");
    if (phi[y - 1].categories() != nl) throw std::runtime_error("state: phi cutoffs have wrong category count");
    const double lo = phi[y - 1].lower(y), hi = phi[y - 1].upper(y);
    if (!(nu_tilde[y - 1] >= lo && nu_tilde[y - 1] <= hi))
      throw std::runtime_error("state: nu_tilde outside its cutoff cell");
  }
  for (const auto& row : nu)
    if (static_cast<int>(row.size()) != nl) throw std::runtime_error("state: nu row has wrong length");
}

std::vector<double> ordinal_pmf(double mean, const CutoffVector& cutoffs) {
  if (!std::isfinite(mean)) throw std::invalid_argument("ordinal_pmf: non-finite mean (corrupt state)");
  const int L = cutoffs.categories();
  const auto& c = cutoffs.expanded();
  std::vector<double> pmf(L);
  for (int y = 0; y < L; ++y) {
    pmf[y] = std::max(0.0, std_normal_interval(c[y] - mean, c[y + 1] - mean));
  }
  return pmf;
}

double log_f_Z(int z, int y, int annotator, const ParamState& state) {
  const int L = state.L();
  if (z < 1 || z > L || y < 1 || y > L) throw std::invalid_argument("log_f_Z: category outside 1..L");
  if (annotator < 1 || annotator > state.A())
    throw std::invalid_argument("log_f_Z: unknown annotator index");
  const double mean = state.nu[annotator - 1][y - 1];
  const auto& cut = state.phi[y - 1];
  const double p = std::max(0.0, std_normal_interval(cut.lower(z) - mean, cut.upper(z) - mean));
  return std::max(std::log(p), kLogFloor);
}

double log_f_C(const std::vector<double>& c, int y, const std::vector<double>& u,
               const ParamState& state) {
  const int L = state.L();
  if (y < 1 || y > L) throw std::invalid_argument("log_f_C: category outside 1..L");
  if (static_cast<int>(c.size()) != L) throw std::invalid_argument("log_f_C: confidence length != L");
  if (u.size() != state.omega.size()) throw std::invalid_argument("log_f_C: quality covariate length != q");
  double eta = state.omega0;
  for (std::size_t j = 0; j < u.size(); ++j) eta += u[j] * state.omega[j];
  const double s = std::exp(eta);
  const auto& a = state.alpha[y - 1];
  double lp = std::lgamma(s);
  for (int l = 0; l < L; ++l) {
    if (!(c[l] > 0.0))
      throw std::invalid_argument("log_f_C: confidence entries must be strictly positive; apply zeta_adjust first");
    const double sa = s * a[l];
    lp += (sa - 1.0) * std::log(c[l]) - std::lgamma(sa);
  }
  return lp;
}

double log_f_Y(int y, const std::vector<double>& x, const ParamState& state) {
  const int L = state.L();
  if (y < 1 || y > L) throw std::invalid_argument("log_f_Y: category outside 1..L");
  if (x.size() != state.beta.size()) throw std::invalid_argument("log_f_Y: covariate length != p");
  double mean = state.beta0;
  for (std::size_t j = 0; j < x.size(); ++j) mean += x[j] * state.beta[j];
  if (!std::isfinite(mean)) throw std::invalid_argument("log_f_Y: non-finite latent mean (corrupt state)");
  const auto& cut = state.theta;
  const double p = std::max(0.0, std_normal_interval(cut.lower(y) - mean, cut.upper(y) - mean));
  return std::max(std::log(p), kLogFloor);
}

std::vector<double> zeta_adjust(const std::vector<double>& c, double zeta) {
  if (!(zeta > 0.0)) throw std::invalid_argument("zeta_adjust: zeta must be positive");
  double sum = 0.0;
  bool below = false;
  for (double v : c) {
    if (!(v >= 0.0)) throw std::invalid_argument("zeta_adjust: entries must be nonnegative");
    sum += v;
    if (v < zeta) below = true;
  }
  if (std::fabs(sum - 1.0) > 1e-6) throw std::invalid_argument("zeta_adjust: input does not sum to 1");
  if (!below) return c;
  const double denom = sum + zeta * static_cast<double>(c.size());
  std::vector<double> out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) out[i] = (c[i] + zeta) / denom;
  return out;
}

} // namespace bcfuse
