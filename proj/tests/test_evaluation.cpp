#include <doctest.h>

#include <cmath>

#include "bcfuse/evaluate.hpp"
#include "oracles.hpp"
#include "testdata.hpp"

using namespace bcfuse;

TEST_CASE("ranked probability score hand arithmetic") {
  // point mass on the truth is a perfect forecast
  CHECK_CLOSE(rps({0, 0, 1, 0, 0}, 3), 0.0, 1e-15);
  // maximal miss across five categories
  CHECK(rps({1, 0, 0, 0, 0}, 5) == doctest::Approx(1.0));
  // interior example: (1/2) [(0.2)^2 + (0.7-1)^2]
  CHECK_CLOSE(rps({0.2, 0.5, 0.3}, 2), 0.065, 1e-12);
  CHECK_CLOSE(rps({0.2, 0.5, 0.3}, 1), 0.5 * (0.64 + 0.09), 1e-12);

  CHECK_THROWS(rps({0.2, 0.5, 0.3}, 0));
  CHECK_THROWS(rps({0.2, 0.5, 0.3}, 4));
  CHECK_THROWS(rps({0.5, 0.6, 0.3}, 1));

  // deterministic: identical inputs give identical outputs
  CHECK(rps({0.25, 0.25, 0.5}, 2) == rps({0.25, 0.25, 0.5}, 2));
}

TEST_CASE("rps is a proper score") {
  // expected score under the true pmf is minimized by forecasting the truth
  const std::vector<double> truth_pmf = {0.5, 0.3, 0.2};
  auto expected_rps = [&](const std::vector<double>& forecast) {
    double e = 0;
    for (int y = 1; y <= 3; ++y) e += truth_pmf[y - 1] * rps(forecast, y);
    return e;
  };
  const double at_truth = expected_rps(truth_pmf);
  Rng rng(55);
  for (int rep = 0; rep < 10000; ++rep) {
    const auto q = rng.dirichlet({1.0, 1.0, 1.0});
    CHECK(expected_rps(q) >= at_truth - 1e-12);
  }
}

TEST_CASE("in-sample rps uses the stored posterior marginals") {
  ChainOutput chain;
  chain.y_marginals = {{1.0, 0.0, 0.0}, {0.1, 0.6, 0.3}};
  const auto r = in_sample_rps(chain, {1, 2});
  REQUIRE(r.has_value());
  CHECK_CLOSE((*r)[0], 0.0, 1e-15);
  CHECK((*r)[1] == doctest::Approx(rps({0.1, 0.6, 0.3}, 2)));

  // order permutes with the sequences
  ChainOutput swapped;
  swapped.y_marginals = {chain.y_marginals[1], chain.y_marginals[0]};
  const auto r2 = in_sample_rps(swapped, {2, 1});
  CHECK((*r2)[0] == (*r)[1]);
  CHECK((*r2)[1] == (*r)[0]);

  // variants without latent scores report not-applicable
  ChainOutput maximum;
  maximum.variant = ModelVariant::kMaximumObserved;
  CHECK_FALSE(in_sample_rps(maximum, {1, 2}).has_value());

  CHECK_THROWS(in_sample_rps(chain, {1}));
}

TEST_CASE("out-of-sample rps averages over the stored samples") {
  Rng rng(66);
  ChainOutput chain;
  for (int s = 0; s < 3; ++s) chain.samples.push_back(testdata::moderate_state(4, 2, 0, 1, rng));
  const std::vector<std::vector<double>> X = {{0.2, -0.1}, {1.0, 0.4}};
  const std::vector<int> y = {2, 4};
  const auto scores = out_sample_rps(chain, X, y);
  REQUIRE(scores.size() == 2);
  for (int i = 0; i < 2; ++i) {
    // brute-force average of per-sample pmfs
    std::vector<double> avg(4, 0.0);
    for (const auto& st : chain.samples) {
      for (int cat = 1; cat <= 4; ++cat) avg[cat - 1] += std::exp(log_f_Y(cat, X[i], st)) / 3.0;
    }
    CHECK_CLOSE(scores[i], rps(avg, y[i]), 1e-12);
  }

  // constant model scores every row identically
  ChainOutput flat;
  ParamState st = testdata::moderate_state(4, 2, 0, 1, rng);
  st.beta = {0.0, 0.0};
  flat.samples = {st};
  const auto s2 = out_sample_rps(flat, {{5.0, 5.0}, {-5.0, 2.0}}, {1, 1});
  CHECK(s2[0] == doctest::Approx(s2[1]));

  CHECK_THROWS(out_sample_rps(chain, X, {1}));
}

TEST_CASE("coefficient metrics across replicates") {
  const std::vector<double> beta_true = {0.2, 0.0};

  // degenerate chains equal to the truth: zero-width intervals still cover
  std::vector<std::vector<CoefSummary>> reps(4);
  for (auto& r : reps) r = {{0.2, 0.2, 0.2}, {0.0, 0.0, 0.0}};
  const auto m = beta_metrics_from_summaries(reps, beta_true);
  CHECK(m.mse[0] == 0.0);
  CHECK(m.mse[1] == 0.0);
  CHECK(m.coverage[0] == 1.0);
  CHECK(m.coverage[1] == 1.0);
  CHECK(m.detection[0] == 1.0); // [0.2, 0.2] excludes zero
  CHECK(m.detection[1] == 1.0); // [0, 0] contains zero

  // mixed case with known counts
  std::vector<std::vector<CoefSummary>> mixed = {
      {{0.25, 0.1, 0.4}, {0.05, -0.1, 0.2}}, // covers both, detects beta1, correct null
      {{0.5, 0.4, 0.6}, {0.3, 0.2, 0.4}},    // misses both, detects beta1, wrong null
  };
  const auto m2 = beta_metrics_from_summaries(mixed, beta_true);
  CHECK(m2.mse[0] == doctest::Approx(0.5 * (0.05 * 0.05 + 0.3 * 0.3)));
  CHECK(m2.coverage[0] == doctest::Approx(0.5));
  CHECK(m2.coverage[1] == doctest::Approx(0.5));
  CHECK(m2.detection[0] == doctest::Approx(1.0));
  CHECK(m2.detection[1] == doctest::Approx(0.5));

  // replicate order does not matter
  std::swap(mixed[0], mixed[1]);
  const auto m3 = beta_metrics_from_summaries(mixed, beta_true);
  CHECK(m3.mse[0] == doctest::Approx(m2.mse[0]));
  CHECK(m3.coverage[0] == doctest::Approx(m2.coverage[0]));
  CHECK(m3.detection[1] == doctest::Approx(m2.detection[1]));

  for (double v : m2.coverage) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  for (double v : m2.detection) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  CHECK_THROWS(beta_metrics_from_summaries({}, beta_true));
}

TEST_CASE("quantiles and summaries") {
  CHECK(empirical_quantile({1, 2, 3, 4, 5}, 0.5) == doctest::Approx(3.0));
  CHECK(empirical_quantile({1, 2, 3, 4}, 0.5) == doctest::Approx(2.5));
  CHECK(empirical_quantile({5, 1, 4, 2, 3}, 0.0) == doctest::Approx(1.0));
  CHECK(empirical_quantile({5, 1, 4, 2, 3}, 1.0) == doctest::Approx(5.0));
  CHECK(empirical_quantile({1, 2, 3, 4}, 0.025) == doctest::Approx(1.075));
  CHECK(median_of({3.0, 1.0, 2.0}) == doctest::Approx(2.0));
  CHECK(mean_of({1.0, 2.0, 6.0}) == doctest::Approx(3.0));
  CHECK_THROWS(empirical_quantile({}, 0.5));
}

TEST_CASE("beta metrics from full chains match the summary path") {
  Rng rng(77);
  ChainOutput c1, c2;
  for (int s = 0; s < 200; ++s) {
    ParamState st;
    st.beta = {0.2 + 0.05 * rng.normal(), 0.01 * rng.normal()};
    c1.samples.push_back(st);
    ParamState st2;
    st2.beta = {0.25 + 0.05 * rng.normal(), 0.3 + 0.01 * rng.normal()};
    c2.samples.push_back(st2);
  }
  const auto direct = beta_metrics({&c1, &c2}, {0.2, 0.0});
  const auto via = beta_metrics_from_summaries({summarize_beta(c1), summarize_beta(c2)}, {0.2, 0.0});
  CHECK(direct.mse == via.mse);
  CHECK(direct.coverage == via.coverage);
  CHECK(direct.detection == via.detection);
}
