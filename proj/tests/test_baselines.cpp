#include <doctest.h>

#include <cmath>

#include "bcfuse/baselines.hpp"
#include "bcfuse/evaluate.hpp"
#include "oracles.hpp"
#include "testdata.hpp"

using namespace bcfuse;

namespace {

Sequence conf_sequence(const std::vector<std::vector<double>>& confs) {
  Sequence seq;
  seq.id = "s";
  static int n = 0;
  for (const auto& c : confs) {
    Image im;
    im.id = "i" + std::to_string(++n);
    im.confidence = c;
    seq.images.push_back(std::move(im));
  }
  return seq;
}

} // namespace

TEST_CASE("linear response extraction") {
  const ThresholdPolicy pol{0.75};

  // annotated sequences average their scores and ignore the confidences
  Sequence ann = conf_sequence({{0.0, 0.0, 1.0, 0.0, 0.0}});
  ann.images[0].annotation = Annotation{3, 1};
  Image extra;
  extra.id = "extra";
  extra.annotation = Annotation{4, 2};
  ann.images.push_back(extra);
  const auto r = extract_linear_response(ann, pol, 5);
  REQUIRE(r.has_value());
  CHECK(r->y_tilde == doctest::Approx(3.5));
  CHECK(r->source == ResponseSource::kAnnotationMean);

  // a single confidence below the threshold drops the sequence
  const auto dropped =
      extract_linear_response(conf_sequence({{0.0, 0.1, 0.7, 0.2, 0.0}}), pol, 5);
  CHECK_FALSE(dropped.has_value());

  // one-hot confidences give expected scores 3 and 4, mean 3.5
  const auto hot = extract_linear_response(
      conf_sequence({{0, 0, 1, 0, 0}, {0, 0, 0, 1, 0}}), ThresholdPolicy{0.9}, 5);
  REQUIRE(hot.has_value());
  CHECK(hot->y_tilde == doctest::Approx(3.5));
  CHECK(hot->source == ResponseSource::kConfidenceWeighted);

  // mixed: one surviving, one filtered
  const auto mixed = extract_linear_response(
      conf_sequence({{0.8, 0.2, 0, 0, 0}, {0.3, 0.4, 0.3, 0, 0}}), pol, 5);
  REQUIRE(mixed.has_value());
  CHECK(mixed->y_tilde == doctest::Approx(1.2)); // 1*0.8 + 2*0.2

  CHECK_THROWS(extract_linear_response(ann, ThresholdPolicy{0.0}, 5));
  CHECK_THROWS(extract_linear_response(ann, ThresholdPolicy{1.5}, 5));
}

TEST_CASE("maximum-observed extraction") {
  const ThresholdPolicy pol{0.6};
  // argmaxes {3, 3, 4} -> median 3
  const auto odd = extract_maximum_observed(
      conf_sequence({{0, 0, 0.9, 0.1, 0}, {0, 0.2, 0.8, 0, 0}, {0, 0, 0.2, 0.8, 0}}), pol);
  REQUIRE(odd.has_value());
  CHECK(*odd == 3);

  // even count takes the lower median: {3, 4} -> 3
  const auto even = extract_maximum_observed(
      conf_sequence({{0, 0, 0.9, 0.1, 0}, {0, 0, 0.1, 0.9, 0}}), pol);
  REQUIRE(even.has_value());
  CHECK(*even == 3);

  // everything under the threshold: absent
  CHECK_FALSE(extract_maximum_observed(conf_sequence({{0.3, 0.3, 0.4, 0, 0}}), pol).has_value());

  // annotations are ignored even when present
  Sequence withann = conf_sequence({{0, 0, 0, 0.95, 0.05}});
  withann.images[0].annotation = Annotation{1, 1};
  CHECK(*extract_maximum_observed(withann, pol) == 4);

  // argmax ties break toward the lower category
  const auto tie = extract_maximum_observed(conf_sequence({{0.45, 0.45, 0.1, 0, 0}}), ThresholdPolicy{0.4});
  CHECK(*tie == 1);
}

TEST_CASE("threshold filtering is monotone in T") {
  Rng rng(31415);
  std::vector<Sequence> seqs;
  for (int i = 0; i < 200; ++i) {
    std::vector<std::vector<double>> confs;
    const int r = 1 + rng.uniform_int(4);
    for (int k = 0; k < r; ++k) {
      auto c = rng.dirichlet({1.2, 0.8, 0.5, 0.5, 0.5});
      confs.push_back(c);
    }
    seqs.push_back(conf_sequence(confs));
  }
  int prev_lin = 201, prev_max = 201;
  for (double T : {0.3, 0.5, 0.75, 0.9, 0.99, 1.0}) {
    const ThresholdPolicy pol{T};
    int lin = 0, mx = 0;
    for (const auto& s : seqs) {
      lin += extract_linear_response(s, pol, 5).has_value();
      mx += extract_maximum_observed(s, pol).has_value();
    }
    CHECK(lin <= prev_lin);
    CHECK(mx <= prev_max);
    prev_lin = lin;
    prev_max = mx;
  }

  // single one-hot image: the weighted mean equals the extracted maximum
  const auto s = conf_sequence({{0, 0, 0, 1, 0}});
  CHECK(extract_linear_response(s, ThresholdPolicy{0.9}, 5)->y_tilde ==
        doctest::Approx((double)*extract_maximum_observed(s, ThresholdPolicy{0.9})));
}

TEST_CASE("bayesian linear regression recovers a noiseless line") {
  Rng rng(271);
  const int n = 500, p = 3;
  const std::vector<double> beta_true = {0.8, -0.5, 0.25};
  const double b0_true = 2.0;
  std::vector<LinearResponse> resp;
  std::vector<std::vector<double>> X;
  for (int i = 0; i < n; ++i) {
    std::vector<double> x(p);
    for (auto& v : x) v = rng.normal();
    double y = b0_true;
    for (int j = 0; j < p; ++j) y += x[j] * beta_true[j];
    resp.push_back({"s" + std::to_string(i), y, ResponseSource::kAnnotationMean});
    X.push_back(std::move(x));
  }
  McmcConfig cfg;
  cfg.iterations = 4000;
  cfg.burnin = 1000;
  cfg.seed = 5;
  const ChainOutput chain = fit_bayesian_linear(resp, X, cfg);
  const auto summ = summarize_beta(chain);
  for (int j = 0; j < p; ++j) CHECK(std::fabs(summ[j].post_mean - beta_true[j]) < 1e-2);
  double b0 = 0;
  for (const auto& s : chain.samples) b0 += s.beta0;
  CHECK(std::fabs(b0 / chain.samples.size() - b0_true) < 1e-2);
}

TEST_CASE("uninformative design returns the coefficient prior") {
  Rng rng(272);
  const int n = 60;
  std::vector<LinearResponse> resp;
  std::vector<std::vector<double>> X;
  for (int i = 0; i < n; ++i) {
    resp.push_back({"s", rng.normal(), ResponseSource::kAnnotationMean});
    X.push_back({0.0}); // the slope column carries no information
  }
  McmcConfig cfg;
  cfg.iterations = 6000;
  cfg.burnin = 1000;
  cfg.seed = 6;
  const ChainOutput chain = fit_bayesian_linear(resp, X, cfg);
  std::vector<double> draws;
  for (const auto& s : chain.samples) draws.push_back(s.beta[0]);
  const double ks = oracle::ks_statistic(draws, [](double x) { return oracle::phi(x); });
  CHECK(ks < 0.02);
}

TEST_CASE("posterior mean matches the ridge formula at concentrated noise") {
  Rng rng(273);
  const int n = 2000, p = 2;
  const double sigma = 0.5;
  std::vector<LinearResponse> resp;
  std::vector<std::vector<double>> X;
  for (int i = 0; i < n; ++i) {
    std::vector<double> x = {rng.normal(), rng.normal()};
    const double y = 1.0 + 0.6 * x[0] - 0.4 * x[1] + sigma * rng.normal();
    resp.push_back({"s", y, ResponseSource::kAnnotationMean});
    X.push_back(std::move(x));
  }
  McmcConfig cfg;
  cfg.iterations = 5000;
  cfg.burnin = 1000;
  cfg.seed = 7;
  const ChainOutput chain = fit_bayesian_linear(resp, X, cfg);

  // analytic conditional mean at the posterior-mean noise variance
  double s2 = 0;
  for (const auto& s : chain.samples) s2 += s.sigma2;
  s2 /= chain.samples.size();
  const int d = p + 1;
  std::vector<double> xtx(d * d, 0.0), xty(d, 0.0);
  for (int i = 0; i < n; ++i) {
    const double row[3] = {1.0, X[i][0], X[i][1]};
    for (int a = 0; a < d; ++a) {
      xty[a] += row[a] * resp[i].y_tilde;
      for (int b = 0; b < d; ++b) xtx[a * d + b] += row[a] * row[b];
    }
  }
  // solve (XtX/s2 + P) m = Xty/s2 with P = diag(0.1, 1, 1) via Gaussian elimination
  std::vector<double> A(d * d), rhs(d);
  for (int a = 0; a < d; ++a) {
    rhs[a] = xty[a] / s2;
    for (int b = 0; b < d; ++b) A[a * d + b] = xtx[a * d + b] / s2;
    A[a * d + a] += (a == 0) ? 0.1 : 1.0;
  }
  for (int c = 0; c < d; ++c) {
    for (int rr = c + 1; rr < d; ++rr) {
      const double f = A[rr * d + c] / A[c * d + c];
      for (int cc = c; cc < d; ++cc) A[rr * d + cc] -= f * A[c * d + cc];
      rhs[rr] -= f * rhs[c];
    }
  }
  std::vector<double> m(d);
  for (int rr = d - 1; rr >= 0; --rr) {
    double v = rhs[rr];
    for (int cc = rr + 1; cc < d; ++cc) v -= A[rr * d + cc] * m[cc];
    m[rr] = v / A[rr * d + rr];
  }
  const auto summ = summarize_beta(chain);
  CHECK(std::fabs(summ[0].post_mean - m[1]) < 2e-2);
  CHECK(std::fabs(summ[1].post_mean - m[2]) < 2e-2);

  // error paths
  CHECK_THROWS(fit_bayesian_linear({resp[0], resp[1]}, {X[0], X[1]}, cfg)); // too few
  auto bad = X;
  bad[0][0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS(fit_bayesian_linear(resp, bad, cfg));
}
