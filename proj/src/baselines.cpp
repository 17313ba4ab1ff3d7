#include "bcfuse/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bcfuse {

void ThresholdPolicy::validate() const {
  if (!(T > 0.0 && T <= 1.0)) throw std::runtime_error("threshold policy: T must be in (0,1]");
}

namespace {

// largest confidence entry; used for thresholding
double conf_max(const std::vector<double>& c) {
  double m = c[0];
  for (double v : c) m = std::max(m, v);
  return m;
}

// argmax category, ties toward the lower index
int conf_argmax(const std::vector<double>& c) {
  int best = 0;
  for (int l = 1; l < static_cast<int>(c.size()); ++l)
    if (c[l] > c[best]) best = l;
  return best + 1;
}

} // namespace

std::optional<LinearResponse> extract_linear_response(const Sequence& seq,
                                                      const ThresholdPolicy& policy, int L) {
  policy.validate();
  double ann_sum = 0.0;
  int ann_n = 0;
  for (const auto& im : seq.images) {
    if (im.annotation) {
      ann_sum += im.annotation->score;
      ++ann_n;
    }
  }
  if (ann_n > 0) {
    return LinearResponse{seq.id, ann_sum / ann_n, ResponseSource::kAnnotationMean};
  }
  double w_sum = 0.0;
  int w_n = 0;
  for (const auto& im : seq.images) {
    if (!im.confidence || conf_max(*im.confidence) < policy.T) continue;
    double expected = 0.0;
    for (int l = 0; l < L; ++l) expected += (l + 1) * (*im.confidence)[l];
    w_sum += expected;
    ++w_n;
  }
  if (w_n == 0) return std::nullopt;
  return LinearResponse{seq.id, w_sum / w_n, ResponseSource::kConfidenceWeighted};
}

std::optional<int> extract_maximum_observed(const Sequence& seq, const ThresholdPolicy& policy) {
  policy.validate();
  std::vector<int> scores;
  for (const auto& im : seq.images) {
    if (!im.confidence || conf_max(*im.confidence) < policy.T) continue;
    scores.push_back(conf_argmax(*im.confidence));
  }
  if (scores.empty()) return std::nullopt;
  std::sort(scores.begin(), scores.end());
  // lower median keeps the observed score integral for even counts
  return scores[(scores.size() - 1) / 2];
}

namespace {

// Cholesky factorization in place; lower triangle. Throws when not positive
// definite (non-finite or degenerate design).
void cholesky(std::vector<double>& m, int n) {
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double sum = m[i * n + j];
      for (int k = 0; k < j; ++k) sum -= m[i * n + k] * m[j * n + k];
      if (i == j) {
        if (!(sum > 0.0)) throw std::runtime_error("linear model: rank-deficient design");
        m[i * n + i] = std::sqrt(sum);
      } else {
        m[i * n + j] = sum / m[j * n + j];
      }
    }
    for (int j = i + 1; j < n; ++j) m[i * n + j] = 0.0;
  }
}

void solve_lower(const std::vector<double>& lchol, int n, std::vector<double>& b) {
  for (int i = 0; i < n; ++i) {
    double sum = b[i];
    for (int k = 0; k < i; ++k) sum -= lchol[i * n + k] * b[k];
    b[i] = sum / lchol[i * n + i];
  }
}

void solve_upper(const std::vector<double>& lchol, int n, std::vector<double>& b) {
  for (int i = n - 1; i >= 0; --i) {
    double sum = b[i];
    for (int k = i + 1; k < n; ++k) sum -= lchol[k * n + i] * b[k];
    b[i] = sum / lchol[i * n + i];
  }
}

} // namespace

ChainOutput fit_bayesian_linear(const std::vector<LinearResponse>& responses,
                                const std::vector<std::vector<double>>& X, const McmcConfig& cfg) {
  cfg.validate();
  const int n = static_cast<int>(responses.size());
  if (n == 0 || X.size() != responses.size())
    throw std::runtime_error("linear model: responses and covariate rows must align");
  const int p = static_cast<int>(X[0].size());
  if (n < p + 2) throw std::runtime_error("linear model: need at least p+2 responses");
  const int d = p + 1; // intercept first

  // cross products of the design [1 X]
  std::vector<double> xtx(d * d, 0.0), xty(d, 0.0), yv(n);
  for (int i = 0; i < n; ++i) {
    yv[i] = responses[i].y_tilde;
    std::vector<double> row(d);
    row[0] = 1.0;
    for (int j = 0; j < p; ++j) row[j + 1] = X[i][j];
    for (int a = 0; a < d; ++a) {
      xty[a] += row[a] * yv[i];
      for (int b = 0; b <= a; ++b) xtx[a * d + b] += row[a] * row[b];
    }
  }
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b) xtx[a * d + b] = xtx[b * d + a];

  // prior precision: intercept variance 10, slopes variance 1
  std::vector<double> prior_prec(d, 1.0);
  prior_prec[0] = 0.1;
  const double ig_shape = 0.01, ig_rate = 0.01;

  Rng rng(cfg.seed);
  std::vector<double> coef(d, 0.0);
  double sigma2 = 1.0;
  ChainOutput out;
  out.variant = ModelVariant::kLinear;
  out.block_names = {"coef_gibbs", "sigma2_gibbs"};
  out.acceptance_rates = {1.0, 1.0};
  out.log_post_trace.reserve(cfg.iterations);

  std::vector<double> prec(d * d), rhs(d), draw(d);
  for (int t = 1; t <= cfg.iterations; ++t) {
    // coef | sigma2
    for (int a = 0; a < d; ++a) {
      rhs[a] = xty[a] / sigma2;
      for (int b = 0; b < d; ++b) prec[a * d + b] = xtx[a * d + b] / sigma2;
      prec[a * d + a] += prior_prec[a];
    }
    cholesky(prec, d);
    std::vector<double> mean = rhs;
    solve_lower(prec, d, mean);
    solve_upper(prec, d, mean);
    for (int a = 0; a < d; ++a) draw[a] = rng.normal();
    solve_upper(prec, d, draw);
    for (int a = 0; a < d; ++a) coef[a] = mean[a] + draw[a];

    // sigma2 | coef
    double rss = 0.0;
    for (int i = 0; i < n; ++i) {
      double fit = coef[0];
      for (int j = 0; j < p; ++j) fit += X[i][j] * coef[j + 1];
      rss += (yv[i] - fit) * (yv[i] - fit);
    }
    sigma2 = (ig_rate + 0.5 * rss) / rng.gamma(ig_shape + 0.5 * n);

    double lp = -0.5 * n * std::log(sigma2) - 0.5 * rss / sigma2;
    out.log_post_trace.push_back(lp);
    if (t > cfg.burnin && (t - cfg.burnin) % cfg.thin == 0) {
      ParamState s;
      s.beta0 = coef[0];
      s.beta.assign(coef.begin() + 1, coef.end());
      s.sigma2 = sigma2;
      out.samples.push_back(std::move(s));
    }
  }
  return out;
}

} // namespace bcfuse
