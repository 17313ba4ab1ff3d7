#pragma once

#include <vector>

#include "bcfuse/cutoffs.hpp"
#include "bcfuse/data.hpp"

namespace bcfuse {

// Logs below this are pinned so Metropolis ratios stay finite.
constexpr double kLogFloor = -700.0;

// One full point in parameter space; the MCMC state.
struct ParamState {
  double beta0 = 0.0;
  std::vector<double> beta;            // p
  CutoffVector theta;                  // cutoffs for the latent score
  std::vector<CutoffVector> phi;       // per true category y (L entries)
  std::vector<std::vector<double>> nu; // A x L, nu[a-1][y-1]
  std::vector<double> nu_tilde;        // L
  std::vector<std::vector<double>> alpha; // L x L simplex rows, alpha[y-1]
  double omega0 = 0.0;
  std::vector<double> omega;           // q
  std::vector<int> y;                  // latent ordinal per sequence, 1..L
  double sigma2 = 0.0;                 // noise variance; linear baseline only

  int L() const { return static_cast<int>(alpha.size()); }
  int A() const { return static_cast<int>(nu.size()); }

  // structural invariants: simplex rows, increasing cutoffs, nu_tilde within
  // its cell; throws on violation
  void validate() const;
};

// probit cell probabilities [P(Y=1), ..., P(Y=L)] for a latent N(mean, 1)
// cut at the given thresholds
std::vector<double> ordinal_pmf(double mean, const CutoffVector& cutoffs);

// log probability of annotation z given true category y and annotator (1-based)
double log_f_Z(int z, int y, int annotator, const ParamState& state);

// log Dirichlet density of a confidence vector c given true category y with
// precision exp(omega0 + u.omega); c must be strictly positive (zeta-adjusted)
double log_f_C(const std::vector<double>& c, int y, const std::vector<double>& u,
               const ParamState& state);

// log probability of latent category y given covariates x
double log_f_Y(int y, const std::vector<double>& x, const ParamState& state);

// additive smoothing of a confidence vector: if any element falls below zeta,
// add zeta everywhere and renormalize; otherwise return unchanged
std::vector<double> zeta_adjust(const std::vector<double>& c, double zeta);

} // namespace bcfuse
