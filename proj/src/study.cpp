#include "bcfuse/study.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "bcfuse/baselines.hpp"
#include "bcfuse/csv.hpp"

namespace bcfuse {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::vector<std::vector<double>> test_covariates(const Dataset& test) {
  std::vector<std::vector<double>> x;
  x.reserve(test.sequences.size());
  for (const auto& s : test.sequences) x.push_back(s.x);
  return x;
}

std::vector<int> true_scores(const Dataset& d) {
  std::vector<int> out;
  out.reserve(d.sequences.size());
  for (const auto& s : d.sequences) {
    if (!s.true_y) throw std::runtime_error("study: sequence " + s.id + " lacks simulation truth");
    out.push_back(*s.true_y);
  }
  return out;
}

} // namespace

SettingReplicateResult fit_and_score(const StudySetting& setting, const SimulatedData& sim_data,
                                     const PriorOverrides& prior_over, const McmcConfig& mcmc,
                                     int replicate, std::uint64_t chain_seed) {
  const Dataset& train = sim_data.train;
  const Dataset& test = sim_data.test;
  SettingReplicateResult res;
  res.label = setting.label();
  res.replicate = replicate;
  res.n_train = train.n_sequences();
  res.survivors = train.n_sequences();

  McmcConfig cfg = mcmc;
  cfg.seed = chain_seed;
  const PriorSpec prior = prior_over.build(train.L, train.p, train.q, std::max(train.A, 1));

  const auto test_x = test_covariates(test);
  const auto test_y = true_scores(test);

  if (setting.setting == "linear") {
    ThresholdPolicy pol{*setting.threshold};
    std::vector<LinearResponse> responses;
    std::vector<std::vector<double>> X;
    for (const auto& seq : train.sequences) {
      if (auto r = extract_linear_response(seq, pol, train.L)) {
        responses.push_back(*r);
        X.push_back(seq.x);
      }
    }
    res.survivors = static_cast<int>(responses.size());
    const ChainOutput chain = fit_bayesian_linear(responses, X, cfg);
    res.beta = summarize_beta(chain);
    return res; // continuous responses: RPS omitted
  }

  if (setting.setting == "maximum") {
    ThresholdPolicy pol{*setting.threshold};
    Dataset survivors;
    survivors.L = train.L;
    survivors.p = train.p;
    survivors.q = train.q;
    survivors.A = train.A;
    std::vector<int> observed;
    for (const auto& seq : train.sequences) {
      if (auto y = extract_maximum_observed(seq, pol)) {
        survivors.sequences.push_back(seq);
        observed.push_back(*y);
      }
    }
    res.survivors = survivors.n_sequences();
    const ChainOutput chain = run_chain(survivors, prior, cfg, ModelVariant::kMaximumObserved, observed);
    res.beta = summarize_beta(chain);
    res.out_rps = out_sample_rps(chain, test_x, test_y);
    res.out_rps_mean = mean_of(res.out_rps);
    return res;
  }

  const ModelVariant variant = variant_from_name(setting.setting);
  const ChainOutput chain = run_chain(train, prior, cfg, variant);
  res.beta = summarize_beta(chain);
  if (auto in = in_sample_rps(chain, true_scores(train))) {
    res.in_rps = std::move(*in);
    res.in_rps_mean = mean_of(res.in_rps);
  }
  res.out_rps = out_sample_rps(chain, test_x, test_y);
  res.out_rps_mean = mean_of(res.out_rps);
  return res;
}

// ---------------------------------------------------------------------------
// checkpoints

namespace {

json result_to_json(const SettingReplicateResult& r) {
  json j;
  j["label"] = r.label;
  j["replicate"] = r.replicate;
  j["in_rps_mean"] = r.in_rps_mean;
  j["out_rps_mean"] = r.out_rps_mean;
  j["in_rps"] = r.in_rps;
  j["out_rps"] = r.out_rps;
  j["survivors"] = r.survivors;
  j["n_train"] = r.n_train;
  json betas = json::array();
  for (const auto& b : r.beta) betas.push_back({{"post_mean", b.post_mean}, {"lo", b.lo}, {"hi", b.hi}});
  j["beta"] = betas;
  return j;
}

SettingReplicateResult result_from_json(const json& j) {
  SettingReplicateResult r;
  r.label = j.at("label").get<std::string>();
  r.replicate = j.at("replicate").get<int>();
  r.in_rps_mean = j.at("in_rps_mean").is_null() ? kNan : j.at("in_rps_mean").get<double>();
  r.out_rps_mean = j.at("out_rps_mean").is_null() ? kNan : j.at("out_rps_mean").get<double>();
  r.in_rps = j.at("in_rps").get<std::vector<double>>();
  r.out_rps = j.at("out_rps").get<std::vector<double>>();
  r.survivors = j.at("survivors").get<int>();
  r.n_train = j.at("n_train").get<int>();
  for (const auto& b : j.at("beta"))
    r.beta.push_back({b.at("post_mean").get<double>(), b.at("lo").get<double>(), b.at("hi").get<double>()});
  return r;
}

std::string study_signature(const RunConfig& cfg) {
  std::ostringstream sig;
  sig << cfg.mcmc.seed << '|' << cfg.replicates << '|' << cfg.mcmc.iterations << '|'
      << cfg.mcmc.burnin << '|' << cfg.sim.n_train << '|' << cfg.sim.n_test << '|'
      << cfg.sim.annotated_fraction;
  for (const auto& s : cfg.settings) sig << '|' << s.label();
  return sig.str();
}

} // namespace

StudyResult run_study(const RunConfig& cfg, bool verbose) {
  fs::create_directories(cfg.output_dir);
  const std::string sig = study_signature(cfg);
  const std::uint64_t master = cfg.mcmc.seed;

  StudyResult study;
  study.settings = cfg.settings;
  study.beta_true = cfg.sim.beta_true;
  study.per_setting.assign(cfg.settings.size(), {});

  for (int r = 1; r <= cfg.replicates; ++r) {
    const fs::path ckpt = fs::path(cfg.output_dir) / ("checkpoint_r" + std::to_string(r) + ".json");
    if (fs::exists(ckpt)) {
      std::ifstream in(ckpt);
      json j = json::parse(in);
      if (j.at("signature").get<std::string>() != sig)
        throw std::runtime_error("study: checkpoint " + ckpt.string() +
                                 " belongs to a different study configuration; remove it or change output_dir");
      for (std::size_t s = 0; s < cfg.settings.size(); ++s)
        study.per_setting[s].push_back(result_from_json(j.at("results").at(s)));
      if (verbose) std::fprintf(stderr, "[study] replicate %d restored from checkpoint\n", r);
      continue;
    }

    // one dataset per distinct annotated fraction; settings that ignore
    // annotations share the base dataset
    const double base_fraction = cfg.sim.annotated_fraction;
    std::map<long, SimulatedData> data_by_fraction;
    auto dataset_for = [&](double fraction) -> const SimulatedData& {
      const long key = std::lround(fraction * 1e6);
      auto it = data_by_fraction.find(key);
      if (it == data_by_fraction.end()) {
        SimConfig sc = cfg.sim;
        sc.annotated_fraction = fraction;
        Rng gen(hash_seed(master, static_cast<std::uint64_t>(r), 0x0D5EED + static_cast<std::uint64_t>(key)));
        Rng pool_rng(hash_seed(master, static_cast<std::uint64_t>(r), 0x706f6f6cULL));
        CovariatePool pool = covariate_pool_standard_normal(sc.p, sc.q(), 4096, pool_rng);
        it = data_by_fraction.emplace(key, generate_dataset(sc, pool, gen)).first;
      }
      return it->second;
    };

    json results = json::array();
    for (std::size_t s = 0; s < cfg.settings.size(); ++s) {
      const auto& setting = cfg.settings[s];
      const double fraction = setting.annotated_fraction.value_or(base_fraction);
      const bool uses_annotations =
          setting.setting == "full" || setting.setting == "ordinal-only" || setting.setting == "linear";
      const SimulatedData& data = dataset_for(uses_annotations ? fraction : base_fraction);
      const std::uint64_t chain_seed = hash_seed(master, static_cast<std::uint64_t>(r), 1 + s);
      if (verbose) std::fprintf(stderr, "[study] replicate %d/%d: fitting %s\n", r, cfg.replicates, setting.label().c_str());
      SettingReplicateResult res = fit_and_score(setting, data, cfg.prior, cfg.mcmc, r, chain_seed);
      results.push_back(result_to_json(res));
      study.per_setting[s].push_back(std::move(res));
    }
    json j;
    j["signature"] = sig;
    j["results"] = std::move(results);
    atomic_write_text(ckpt.string(), j.dump() + "\n");
  }
  return study;
}

// ---------------------------------------------------------------------------
// report files

void write_study_report(const StudyResult& study, const std::string& output_dir) {
  fs::create_directories(output_dir);
  const int p = static_cast<int>(study.beta_true.size());

  std::ostringstream mse, cov, det, repcsv, seqcsv, summary;
  std::string hdr = "setting";
  for (int j = 1; j <= p; ++j) hdr += ",beta" + std::to_string(j);
  hdr += "\n";
  mse << hdr;
  cov << hdr;
  det << hdr;
  repcsv << "setting,replicate,in_sample_rps_mean,out_sample_rps_mean,survivors,n_train\n";
  seqcsv << "setting,replicate,sample,sequence,rps\n";
  summary << "setting,out_median,out_q1,out_q3,in_median,in_q1,in_q3,relative_out_median,mean_survivors\n";

  // reference setting for the relative column: first entry named "full"
  int full_idx = -1;
  for (std::size_t s = 0; s < study.settings.size(); ++s)
    if (study.settings[s].setting == "full" && full_idx < 0) full_idx = static_cast<int>(s);

  json report;
  report["beta_true"] = study.beta_true;
  json settings_json = json::array();

  for (std::size_t s = 0; s < study.settings.size(); ++s) {
    const auto& reps = study.per_setting[s];
    const std::string label = study.settings[s].label();
    std::vector<std::vector<CoefSummary>> summaries;
    std::vector<double> in_means, out_means, rel;
    double surv = 0.0;
    for (std::size_t r = 0; r < reps.size(); ++r) {
      const auto& res = reps[r];
      summaries.push_back(res.beta);
      surv += res.survivors;
      repcsv << label << ',' << res.replicate << ','
             << (std::isnan(res.in_rps_mean) ? "" : fmt_double(res.in_rps_mean)) << ','
             << (std::isnan(res.out_rps_mean) ? "" : fmt_double(res.out_rps_mean)) << ','
             << res.survivors << ',' << res.n_train << "\n";
      for (std::size_t i = 0; i < res.in_rps.size(); ++i)
        seqcsv << label << ',' << res.replicate << ",in," << (i + 1) << ',' << fmt_double(res.in_rps[i]) << "\n";
      for (std::size_t i = 0; i < res.out_rps.size(); ++i)
        seqcsv << label << ',' << res.replicate << ",out," << (i + 1) << ',' << fmt_double(res.out_rps[i]) << "\n";
      if (!std::isnan(res.in_rps_mean)) in_means.push_back(res.in_rps_mean);
      if (!std::isnan(res.out_rps_mean)) {
        out_means.push_back(res.out_rps_mean);
        if (full_idx >= 0 && r < study.per_setting[full_idx].size()) {
          const double ref = study.per_setting[full_idx][r].out_rps_mean;
          if (!std::isnan(ref) && ref > 0.0) rel.push_back(res.out_rps_mean / ref);
        }
      }
    }
    const BetaMetrics bm = beta_metrics_from_summaries(summaries, study.beta_true);
    mse << label;
    cov << label;
    det << label;
    for (int j = 0; j < p; ++j) {
      mse << ',' << fmt_double(bm.mse[j]);
      cov << ',' << fmt_double(bm.coverage[j]);
      det << ',' << fmt_double(bm.detection[j]);
    }
    mse << "\n";
    cov << "\n";
    det << "\n";

    auto q_or_blank = [](std::vector<double> v, double prob) {
      return v.empty() ? std::string() : fmt_double(empirical_quantile(std::move(v), prob));
    };
    summary << label << ',' << q_or_blank(out_means, 0.5) << ',' << q_or_blank(out_means, 0.25)
            << ',' << q_or_blank(out_means, 0.75) << ',' << q_or_blank(in_means, 0.5) << ','
            << q_or_blank(in_means, 0.25) << ',' << q_or_blank(in_means, 0.75) << ','
            << q_or_blank(rel, 0.5) << ','
            << fmt_double(reps.empty() ? 0.0 : surv / reps.size()) << "\n";

    json sj;
    sj["label"] = label;
    sj["mse"] = bm.mse;
    sj["coverage"] = bm.coverage;
    sj["detection"] = bm.detection;
    sj["out_rps_replicate_means"] = out_means;
    sj["in_rps_replicate_means"] = in_means;
    sj["out_rps_median"] = out_means.empty() ? kNan : median_of(out_means);
    sj["in_rps_median"] = in_means.empty() ? kNan : median_of(in_means);
    sj["mean_survivors"] = reps.empty() ? 0.0 : surv / reps.size();
    settings_json.push_back(std::move(sj));
  }
  report["settings"] = std::move(settings_json);

  const fs::path dir(output_dir);
  atomic_write_text((dir / "mse.csv").string(), mse.str());
  atomic_write_text((dir / "coverage.csv").string(), cov.str());
  atomic_write_text((dir / "detection.csv").string(), det.str());
  atomic_write_text((dir / "rps_replicates.csv").string(), repcsv.str());
  atomic_write_text((dir / "rps_sequences.csv").string(), seqcsv.str());
  atomic_write_text((dir / "rps_summary.csv").string(), summary.str());
  atomic_write_text((dir / "report.json").string(), report.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// mode dispatcher

namespace {

void run_simulate(const RunConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  Rng pool_rng(hash_seed(cfg.sim.seed, 0, 0x706f6f6cULL));
  CovariatePool pool = covariate_pool_standard_normal(cfg.sim.p, cfg.sim.q(), 4096, pool_rng);
  Rng rng(hash_seed(cfg.sim.seed, 0, 0x0D5EED));
  const SimulatedData data = generate_dataset(cfg.sim, pool, rng);
  const fs::path dir(cfg.output_dir);
  write_dataset(data.train, DataPaths{(dir / "train_sequences.csv").string(),
                                      (dir / "train_images.csv").string(),
                                      (dir / "train_annotations.csv").string(),
                                      (dir / "train_confidences.csv").string()});
  write_dataset(data.test, DataPaths{(dir / "test_sequences.csv").string(),
                                     (dir / "test_images.csv").string(),
                                     (dir / "test_annotations.csv").string(),
                                     (dir / "test_confidences.csv").string()});
  write_truth_json((dir / "truth.json").string(), data.truth);
}

int infer_L(const RunConfig& cfg) {
  if (!cfg.train.confidences.empty() && fs::exists(cfg.train.confidences)) {
    const CsvTable t = read_csv(cfg.train.confidences);
    int L = 0;
    while (t.col("c" + std::to_string(L + 1)) >= 0) ++L;
    if (L >= 2) return L;
  }
  return cfg.sim.L;
}

IngestResult ingest_train(const RunConfig& cfg) {
  IngestOptions opt;
  opt.L = infer_L(cfg);
  opt.zeta = cfg.zeta;
  opt.max_images = cfg.max_images;
  opt.seed = cfg.mcmc.seed;
  opt.standardize = cfg.standardize;
  return ingest(cfg.train, opt);
}

void run_fit(const RunConfig& cfg, bool verbose) {
  fs::create_directories(cfg.output_dir);
  const IngestResult ing = ingest_train(cfg);
  const Dataset& data = ing.data;
  if (verbose)
    std::fprintf(stderr, "[fit] %s: N=%d images=%d annotations=%d confidences=%d\n",
                 cfg.setting.c_str(), data.n_sequences(), data.n_images(), data.n_annotations(),
                 data.n_confidences());
  const PriorSpec prior = cfg.prior.build(data.L, data.p, data.q, std::max(data.A, 1));
  const fs::path dir(cfg.output_dir);

  ChainOutput chain;
  std::vector<std::string> ids;
  for (const auto& s : data.sequences) ids.push_back(s.id);
  json meta;
  meta["setting"] = cfg.setting;
  meta["L"] = data.L;
  meta["p"] = data.p;
  meta["q"] = data.q;
  meta["A"] = data.A;
  meta["seed"] = cfg.mcmc.seed;
  meta["iterations"] = cfg.mcmc.iterations;
  meta["burnin"] = cfg.mcmc.burnin;
  meta["thin"] = cfg.mcmc.thin;

  if (cfg.setting == "linear") {
    ThresholdPolicy pol{cfg.threshold.value()};
    std::vector<LinearResponse> responses;
    std::vector<std::vector<double>> X;
    std::ostringstream surv;
    surv << "sequence_id,y_tilde,source\n";
    for (const auto& seq : data.sequences) {
      if (auto r = extract_linear_response(seq, pol, data.L)) {
        responses.push_back(*r);
        X.push_back(seq.x);
        surv << seq.id << ',' << fmt_double(r->y_tilde) << ','
             << (r->source == ResponseSource::kAnnotationMean ? "annotation-mean" : "confidence-weighted")
             << "\n";
      }
    }
    chain = fit_bayesian_linear(responses, X, cfg.mcmc);
    meta["survivors"] = static_cast<int>(responses.size());
    atomic_write_text((dir / "responses.csv").string(), surv.str());
  } else if (cfg.setting == "maximum") {
    ThresholdPolicy pol{cfg.threshold.value()};
    Dataset survivors;
    survivors.L = data.L;
    survivors.p = data.p;
    survivors.q = data.q;
    survivors.A = data.A;
    std::vector<int> observed;
    std::ostringstream surv;
    surv << "sequence_id,observed_y\n";
    ids.clear();
    for (const auto& seq : data.sequences) {
      if (auto y = extract_maximum_observed(seq, pol)) {
        survivors.sequences.push_back(seq);
        observed.push_back(*y);
        ids.push_back(seq.id);
        surv << seq.id << ',' << *y << "\n";
      }
    }
    chain = run_chain(survivors, prior, cfg.mcmc, ModelVariant::kMaximumObserved, observed);
    meta["survivors"] = survivors.n_sequences();
    atomic_write_text((dir / "observed_y.csv").string(), surv.str());
  } else {
    chain = run_chain(data, prior, cfg.mcmc, variant_from_name(cfg.setting));
    meta["survivors"] = data.n_sequences();
  }

  write_samples_csv((dir / "samples.csv").string(), chain, cfg.mcmc);
  write_acceptance_csv((dir / "acceptance.csv").string(), chain);
  if (!chain.y_marginals.empty())
    write_y_marginals_csv((dir / "y_marginals.csv").string(), chain, ids);
  write_transform_json((dir / "transform.json").string(), ing.transform);
  std::ostringstream trace;
  trace << "iteration,log_posterior\n";
  for (std::size_t t = 0; t < chain.log_post_trace.size(); ++t)
    trace << (t + 1) << ',' << fmt_double(chain.log_post_trace[t]) << "\n";
  atomic_write_text((dir / "trace.csv").string(), trace.str());
  atomic_write_text((dir / "meta.json").string(), meta.dump(2) + "\n");
}

std::string fit_artifact(const RunConfig& cfg, const std::string& name) {
  if (!cfg.fit_dir.empty()) return (fs::path(cfg.fit_dir) / name).string();
  return name;
}

void run_predict(const RunConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  const std::string samples_path = cfg.samples.empty() ? fit_artifact(cfg, "samples.csv") : cfg.samples;
  const ChainOutput chain = read_samples_csv(samples_path);
  StandardizeTransform transform;
  const std::string tpath = fit_artifact(cfg, "transform.json");
  if (!cfg.fit_dir.empty() && fs::exists(tpath)) transform = read_transform_json(tpath);

  const CsvTable grid = read_csv(cfg.grid);
  const int c_rid = grid.require_col("row_id", cfg.grid);
  std::vector<int> x_cols;
  for (int j = 1;; ++j) {
    const int c = grid.col("x" + std::to_string(j));
    if (c < 0) break;
    x_cols.push_back(c);
  }
  int L = chain.samples.front().L();
  if (L == 0) L = chain.samples.front().theta.categories();
  if (L < 2) throw std::runtime_error("predict: samples file does not contain an ordinal chain");
  std::ostringstream out;
  out << "row_id";
  for (int l = 1; l <= L; ++l) out << ",p" << l;
  out << ",p_high\n";
  for (std::size_t r = 0; r < grid.rows.size(); ++r) {
    const auto& row = grid.rows[r];
    const std::string ctx = cfg.grid + " row " + std::to_string(r + 2);
    std::vector<double> x(x_cols.size());
    for (std::size_t j = 0; j < x_cols.size(); ++j) x[j] = parse_double(row[x_cols[j]], ctx);
    const auto pmf = posterior_predict(transform.apply(x), chain);
    out << row[c_rid];
    for (double v : pmf) out << ',' << fmt_double(v);
    // probability of a high score: the top two categories
    out << ',' << fmt_double(pmf[L - 2] + pmf[L - 1]) << "\n";
  }
  atomic_write_text((fs::path(cfg.output_dir) / "predictions.csv").string(), out.str());
}

void run_evaluate(const RunConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  const std::string samples_path = cfg.samples.empty() ? fit_artifact(cfg, "samples.csv") : cfg.samples;
  const ChainOutput chain = read_samples_csv(samples_path);
  StandardizeTransform transform;
  const std::string tpath = fit_artifact(cfg, "transform.json");
  if (fs::exists(tpath)) transform = read_transform_json(tpath);

  json report;
  const fs::path dir(cfg.output_dir);

  // in-sample: stored marginals against the training truth
  IngestOptions opt;
  opt.L = infer_L(cfg);
  opt.zeta = cfg.zeta;
  opt.max_images = cfg.max_images;
  opt.seed = cfg.mcmc.seed;
  opt.standardize = false;
  const IngestResult train_ing = ingest(cfg.train, opt);
  const std::string marg_path = fit_artifact(cfg, "y_marginals.csv");
  if (fs::exists(marg_path)) {
    const CsvTable marg = read_csv(marg_path);
    std::map<std::string, std::vector<double>> by_id;
    std::vector<int> pcols;
    for (int l = 1;; ++l) {
      const int c = marg.col("p" + std::to_string(l));
      if (c < 0) break;
      pcols.push_back(c);
    }
    const int c_sid = marg.require_col("sequence_id", marg_path);
    for (const auto& row : marg.rows) {
      std::vector<double> pm(pcols.size());
      for (std::size_t l = 0; l < pcols.size(); ++l) pm[l] = parse_double(row[pcols[l]], marg_path);
      by_id[row[c_sid]] = std::move(pm);
    }
    std::vector<double> in_rps;
    std::ostringstream incsv;
    incsv << "sequence_id,rps\n";
    for (const auto& seq : train_ing.data.sequences) {
      const auto it = by_id.find(seq.id);
      if (it == by_id.end() || !seq.true_y) continue;
      const double v = rps(it->second, *seq.true_y);
      in_rps.push_back(v);
      incsv << seq.id << ',' << fmt_double(v) << "\n";
    }
    if (!in_rps.empty()) {
      report["in_sample_rps_mean"] = mean_of(in_rps);
      report["in_sample_rps_median"] = median_of(in_rps);
      atomic_write_text((dir / "in_sample_rps.csv").string(), incsv.str());
    }
  }

  // out-of-sample: posterior predictive at the test covariates
  if (!cfg.test.empty()) {
    IngestOptions topt = opt;
    const IngestResult test_ing = ingest(cfg.test, topt);
    std::vector<double> out_rps;
    std::ostringstream outcsv;
    outcsv << "sequence_id,rps\n";
    for (const auto& seq : test_ing.data.sequences) {
      if (!seq.true_y) continue;
      const double v = rps(posterior_predict(transform.apply(seq.x), chain), *seq.true_y);
      out_rps.push_back(v);
      outcsv << seq.id << ',' << fmt_double(v) << "\n";
    }
    if (!out_rps.empty()) {
      report["out_sample_rps_mean"] = mean_of(out_rps);
      report["out_sample_rps_median"] = median_of(out_rps);
      atomic_write_text((dir / "out_sample_rps.csv").string(), outcsv.str());
    }
  }

  // coefficient summaries, plus errors against simulation truth when given
  const auto beta_sum = summarize_beta(chain);
  json betas = json::array();
  for (const auto& b : beta_sum)
    betas.push_back({{"post_mean", b.post_mean}, {"lo", b.lo}, {"hi", b.hi}});
  report["beta"] = betas;
  if (!cfg.truth.empty()) {
    const ParamState truth = read_truth_json(cfg.truth);
    json err = json::array();
    for (std::size_t j = 0; j < beta_sum.size() && j < truth.beta.size(); ++j) {
      const double d = beta_sum[j].post_mean - truth.beta[j];
      err.push_back({{"true", truth.beta[j]},
                     {"sq_error", d * d},
                     {"covered", truth.beta[j] >= beta_sum[j].lo && truth.beta[j] <= beta_sum[j].hi}});
    }
    report["beta_vs_truth"] = err;
  }
  atomic_write_text((dir / "eval.json").string(), report.dump(2) + "\n");
}

} // namespace

void run(const RunConfig& cfg, bool verbose) {
  cfg.validate();
  if (cfg.mode == "simulate") {
    run_simulate(cfg);
  } else if (cfg.mode == "fit") {
    run_fit(cfg, verbose);
  } else if (cfg.mode == "evaluate") {
    run_evaluate(cfg);
  } else if (cfg.mode == "predict") {
    run_predict(cfg);
  } else {
    const StudyResult res = run_study(cfg, verbose);
    write_study_report(res, cfg.output_dir);
  }
}

} // namespace bcfuse
