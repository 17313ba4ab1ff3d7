#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>

#include "bcfuse/csv.hpp"
#include "bcfuse/io.hpp"
#include "bcfuse/study.hpp"
#include "oracles.hpp"
#include "testdata.hpp"

using namespace bcfuse;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("bcfuse_test_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

DataPaths paths_in(const TempDir& dir, const std::string& prefix = "") {
  return DataPaths{dir.file(prefix + "sequences.csv"), dir.file(prefix + "images.csv"),
                   dir.file(prefix + "annotations.csv"), dir.file(prefix + "confidences.csv")};
}

Dataset small_sim(int n, std::uint64_t seed, double ann_frac = 0.4) {
  SimConfig cfg;
  cfg.n_train = n;
  cfg.n_test = 0;
  cfg.annotated_fraction = ann_frac;
  cfg.seed = seed;
  Rng pr(seed);
  const CovariatePool pool = covariate_pool_standard_normal(cfg.p, cfg.q(), 200, pr);
  Rng rng(hash_seed(seed, 7, 7));
  return generate_dataset(cfg, pool, rng).train;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

bool same_dataset(const Dataset& a, const Dataset& b) {
  if (a.L != b.L || a.p != b.p || a.q != b.q || a.A != b.A) return false;
  if (a.sequences.size() != b.sequences.size()) return false;
  for (std::size_t i = 0; i < a.sequences.size(); ++i) {
    const auto& sa = a.sequences[i];
    const auto& sb = b.sequences[i];
    if (sa.id != sb.id || sa.x != sb.x || sa.true_y != sb.true_y) return false;
    if (sa.images.size() != sb.images.size()) return false;
    for (std::size_t k = 0; k < sa.images.size(); ++k) {
      const auto& ia = sa.images[k];
      const auto& ib = sb.images[k];
      if (ia.id != ib.id || ia.u != ib.u) return false;
      if (ia.annotation.has_value() != ib.annotation.has_value()) return false;
      if (ia.annotation && (ia.annotation->score != ib.annotation->score ||
                            ia.annotation->annotator != ib.annotation->annotator))
        return false;
      if (ia.confidence.has_value() != ib.confidence.has_value()) return false;
      if (ia.confidence && *ia.confidence != *ib.confidence) return false;
    }
  }
  return true;
}

} // namespace

TEST_CASE("ingest round-trips through export") {
  TempDir dir;
  const Dataset sim = small_sim(30, 12);
  write_dataset(sim, paths_in(dir));

  IngestOptions opt;
  opt.L = 5;
  opt.zeta = 1e-12;
  opt.standardize = false;
  const IngestResult first = ingest(paths_in(dir), opt);
  TempDir dir2;
  write_dataset(first.data, paths_in(dir2));
  const IngestResult second = ingest(paths_in(dir2), opt);
  CHECK(same_dataset(first.data, second.data));
}

TEST_CASE("ingest applies standardization and records the transform") {
  TempDir dir;
  const Dataset sim = small_sim(50, 13);
  write_dataset(sim, paths_in(dir));
  IngestOptions opt;
  opt.L = 5;
  opt.standardize = true;
  const IngestResult res = ingest(paths_in(dir), opt);
  for (int j = 0; j < res.data.p; ++j) {
    double m = 0, v = 0;
    for (const auto& s : res.data.sequences) m += s.x[j];
    m /= res.data.n_sequences();
    for (const auto& s : res.data.sequences) v += (s.x[j] - m) * (s.x[j] - m);
    v /= (res.data.n_sequences() - 1);
    CHECK(std::fabs(m) < 1e-12);
    CHECK(v == doctest::Approx(1.0).epsilon(1e-10));
  }
  // the stored transform reproduces the fitted scale from raw covariates
  const auto mapped = res.transform.apply(sim.sequences[7].x);
  CHECK(mapped == res.data.sequences[7].x);

  // transform json round trip
  TempDir dir3;
  write_transform_json(dir3.file("t.json"), res.transform);
  const auto back = read_transform_json(dir3.file("t.json"));
  CHECK(back.applied == res.transform.applied);
  CHECK(back.mean == res.transform.mean);
  CHECK(back.sd == res.transform.sd);
}

TEST_CASE("ingest rejects malformed inputs with row context") {
  TempDir dir;
  const Dataset sim = small_sim(10, 14);
  write_dataset(sim, paths_in(dir));
  IngestOptions opt;
  opt.L = 5;

  // a score outside 1..L
  {
    std::ofstream ann(dir.file("annotations.csv"), std::ios::app);
    ann << sim.sequences[0].id << ',' << sim.sequences[0].images[0].id << ",1,6\n";
  }
  CHECK_THROWS_WITH_AS(ingest(paths_in(dir), opt), doctest::Contains("score"), std::runtime_error);

  // duplicate annotation row
  TempDir d2;
  write_dataset(sim, paths_in(d2));
  std::string first_ann;
  {
    std::ifstream in(d2.file("annotations.csv"));
    std::string header;
    std::getline(in, header);
    std::getline(in, first_ann);
  }
  {
    std::ofstream ann(d2.file("annotations.csv"), std::ios::app);
    ann << first_ann << "\n";
  }
  CHECK_THROWS_WITH_AS(ingest(paths_in(d2), opt), doctest::Contains("duplicate"), std::runtime_error);

  // unknown sequence reference
  TempDir d3;
  write_dataset(sim, paths_in(d3));
  {
    std::ofstream img(d3.file("images.csv"), std::ios::app);
    img << "ghost,img_x,0.0\n";
  }
  CHECK_THROWS_WITH_AS(ingest(paths_in(d3), opt), doctest::Contains("unknown sequence"),
                       std::runtime_error);

  // simplex violation beyond tolerance (hand-written minimal files)
  TempDir d4;
  {
    std::ofstream(d4.file("sequences.csv")) << "sequence_id,x1\ns1,0.5\n";
    std::ofstream(d4.file("images.csv")) << "sequence_id,image_id\ns1,i1\n";
    std::ofstream(d4.file("annotations.csv")) << "sequence_id,image_id,annotator_id,score\n";
    std::ofstream(d4.file("confidences.csv"))
        << "sequence_id,image_id,c1,c2,c3,c4,c5\ns1,i1,0.5,0.2,0.2,0.2,0.2\n";
  }
  IngestOptions opt4 = opt;
  opt4.standardize = false;
  CHECK_THROWS_WITH_AS(ingest(paths_in(d4), opt4), doctest::Contains("sums to"), std::runtime_error);

  // a row summing to 0.999999 is accepted and renormalized
  TempDir d5;
  Dataset ok = sim;
  for (auto& seq : ok.sequences)
    for (auto& im : seq.images) im.confidence.reset();
  ok.sequences[0].images[0].confidence = std::vector<double>{0.299999, 0.3, 0.2, 0.1, 0.1};
  // keep all images observed for the write
  for (auto& seq : ok.sequences)
    for (auto& im : seq.images)
      if (!im.annotation && !im.confidence) im.annotation = Annotation{1, 1};
  ok.A = std::max(ok.A, 1);
  write_dataset(ok, paths_in(d5));
  const IngestResult res = ingest(paths_in(d5), opt);
  double sum = 0;
  for (double v : *res.data.sequences[0].images[0].confidence) sum += v;
  CHECK_CLOSE(sum, 1.0, 1e-12);
}

TEST_CASE("long sequences are capped by deterministic subsampling") {
  Dataset d;
  d.L = 5;
  d.p = 1;
  d.q = 0;
  d.A = 1;
  Sequence seq;
  seq.id = "big";
  seq.x = {0.5};
  for (int k = 0; k < 40; ++k) {
    Image im;
    im.id = "im" + std::to_string(k + 1);
    im.confidence = std::vector<double>{0.2, 0.2, 0.2, 0.2, 0.2};
    seq.images.push_back(im);
  }
  Sequence other = seq;
  other.id = "small";
  other.images.resize(3);
  d.sequences = {seq, other};

  TempDir dir;
  write_dataset(d, paths_in(dir));
  IngestOptions opt;
  opt.L = 5;
  opt.max_images = 30;
  opt.standardize = false;
  opt.seed = 99;
  const IngestResult a = ingest(paths_in(dir), opt);
  CHECK(a.data.sequences[0].images.size() == 30);
  CHECK(a.data.sequences[1].images.size() == 3);
  const IngestResult b = ingest(paths_in(dir), opt);
  CHECK(same_dataset(a.data, b.data));
  // a different seed picks a different subset
  opt.seed = 100;
  const IngestResult c = ingest(paths_in(dir), opt);
  bool differs = false;
  for (std::size_t k = 0; k < 30; ++k)
    if (a.data.sequences[0].images[k].id != c.data.sequences[0].images[k].id) differs = true;
  CHECK(differs);
}

TEST_CASE("atomic write leaves no partial files") {
  TempDir dir;
  const std::string path = dir.file("out.txt");
  atomic_write_text(path, "hello\nworld\n");
  CHECK(slurp(path) == "hello\nworld\n");
  CHECK_FALSE(fs::exists(path + ".tmp"));
  atomic_write_text(path, "second\n");
  CHECK(slurp(path) == "second\n");
}

TEST_CASE("run configuration parsing") {
  const std::string good = R"({
    "mode": "study",
    "replicates": 2,
    "mcmc": {"iterations": 100, "burnin": 50, "seed": 7},
    "sim": {"n_train": 20, "n_test": 10},
    "settings": [
      {"setting": "full", "annotated_fraction": 0.5},
      {"setting": "maximum", "threshold": 0.75}
    ],
    "paths": {"output_dir": "/tmp/bcfuse_cfg_test"}
  })";
  const RunConfig cfg = parse_run_config(good);
  CHECK(cfg.replicates == 2);
  CHECK(cfg.mcmc.iterations == 100);
  CHECK(cfg.sim.n_train == 20);
  REQUIRE(cfg.settings.size() == 2);
  CHECK(cfg.settings[0].label() == "full_ann50");
  CHECK(cfg.settings[1].label() == "maximum_t75");

  // unknown keys are rejected at every level
  CHECK_THROWS_WITH_AS(parse_run_config(R"({"mode": "simulate", "bogus": 1})"),
                       doctest::Contains("unknown key"), std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_run_config(R"({"mode": "simulate", "mcmc": {"iter": 5}})"),
                       doctest::Contains("unknown key"), std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_run_config(R"({"mode": "simulate", "sim": {"n": 5}})"),
                       doctest::Contains("unknown key"), std::runtime_error);

  // threshold requirements per setting
  CHECK_THROWS(parse_run_config(R"({"mode": "study", "replicates": 1,
    "settings": [{"setting": "maximum"}]})"));
  CHECK_THROWS(parse_run_config(R"({"mode": "study", "replicates": 1,
    "settings": [{"setting": "full", "threshold": 0.9}]})"));
  CHECK_THROWS(parse_run_config(R"({"mode": "nope"})"));
  // missing input files fail validation
  CHECK_THROWS(parse_run_config(R"({"mode": "fit", "setting": "full",
    "paths": {"sequences": "/nonexistent/seq.csv", "images": "/nonexistent/img.csv",
              "confidences": "/nonexistent/conf.csv"}})"));
}

TEST_CASE("posterior samples round-trip through csv") {
  Rng rng(21);
  Dataset d = testdata::toy_dataset(12, 3, 2, 1, 2, rng, 0.7, 0.9);
  const PriorSpec prior = default_prior(3, 2, 1, 2);
  McmcConfig cfg;
  cfg.iterations = 60;
  cfg.burnin = 30;
  cfg.seed = 3;
  const ChainOutput chain = run_chain(d, prior, cfg, ModelVariant::kFull);

  TempDir dir;
  write_samples_csv(dir.file("samples.csv"), chain, cfg);
  const ChainOutput back = read_samples_csv(dir.file("samples.csv"));
  REQUIRE(back.samples.size() == chain.samples.size());
  for (std::size_t s = 0; s < chain.samples.size(); ++s) {
    CHECK(back.samples[s].beta0 == chain.samples[s].beta0);
    CHECK(back.samples[s].beta == chain.samples[s].beta);
    CHECK(back.samples[s].omega0 == chain.samples[s].omega0);
    CHECK(back.samples[s].theta.expanded() == chain.samples[s].theta.expanded());
    CHECK(back.samples[s].alpha == chain.samples[s].alpha);
    CHECK(back.samples[s].nu == chain.samples[s].nu);
  }

  // a fresh run with the same seed produces byte-identical samples
  const ChainOutput chain2 = run_chain(d, prior, cfg, ModelVariant::kFull);
  write_samples_csv(dir.file("samples2.csv"), chain2, cfg);
  CHECK(slurp(dir.file("samples.csv")) == slurp(dir.file("samples2.csv")));
}

TEST_CASE("full pipeline: simulate, fit, evaluate, predict") {
  TempDir dir;
  RunConfig sim;
  sim.mode = "simulate";
  sim.output_dir = dir.file("data");
  sim.sim.n_train = 25;
  sim.sim.n_test = 15;
  sim.sim.annotated_fraction = 0.5;
  sim.sim.seed = 41;
  run(sim, false);
  CHECK(fs::exists(dir.file("data/train_sequences.csv")));
  CHECK(fs::exists(dir.file("data/test_confidences.csv")));
  CHECK(fs::exists(dir.file("data/truth.json")));

  RunConfig fit;
  fit.mode = "fit";
  fit.setting = "full";
  fit.train = DataPaths{dir.file("data/train_sequences.csv"), dir.file("data/train_images.csv"),
                        dir.file("data/train_annotations.csv"), dir.file("data/train_confidences.csv")};
  fit.output_dir = dir.file("fit");
  fit.standardize = false;
  fit.mcmc.iterations = 120;
  fit.mcmc.burnin = 60;
  fit.mcmc.seed = 5;
  run(fit, false);
  CHECK(fs::exists(dir.file("fit/samples.csv")));
  CHECK(fs::exists(dir.file("fit/y_marginals.csv")));
  CHECK(fs::exists(dir.file("fit/acceptance.csv")));
  CHECK(fs::exists(dir.file("fit/trace.csv")));

  RunConfig ev;
  ev.mode = "evaluate";
  ev.fit_dir = dir.file("fit");
  ev.train = fit.train;
  ev.test = DataPaths{dir.file("data/test_sequences.csv"), dir.file("data/test_images.csv"),
                      "", dir.file("data/test_confidences.csv")};
  ev.truth = dir.file("data/truth.json");
  ev.output_dir = dir.file("eval");
  run(ev, false);
  CHECK(fs::exists(dir.file("eval/eval.json")));
  CHECK(fs::exists(dir.file("eval/in_sample_rps.csv")));
  CHECK(fs::exists(dir.file("eval/out_sample_rps.csv")));

  // prediction grid on the raw covariate scale
  {
    std::ofstream grid(dir.file("grid.csv"));
    grid << "row_id,x1,x2,x3,x4,x5,x6\n";
    grid << "a,0,0,0,0,0,0\n";
    grid << "b,1,-1,0.5,0,0.2,-0.2\n";
  }
  RunConfig pred;
  pred.mode = "predict";
  pred.fit_dir = dir.file("fit");
  pred.grid = dir.file("grid.csv");
  pred.output_dir = dir.file("pred");
  run(pred, false);
  const std::string out = slurp(dir.file("pred/predictions.csv"));
  CHECK(out.find("row_id,p1,p2,p3,p4,p5,p_high") == 0);
  CHECK(out.find("\na,") != std::string::npos);
  CHECK(out.find("\nb,") != std::string::npos);

  // a one-sample chain predicts exactly the per-state pmf
  {
    McmcConfig one;
    one.iterations = 61;
    one.burnin = 60;
    one.seed = 5;
    RunConfig fit1 = fit;
    fit1.mcmc = one;
    fit1.output_dir = dir.file("fit1");
    run(fit1, false);
    const ChainOutput c = read_samples_csv(dir.file("fit1/samples.csv"));
    REQUIRE(c.samples.size() == 1);
    RunConfig pred1 = pred;
    pred1.fit_dir = dir.file("fit1");
    pred1.output_dir = dir.file("pred1");
    run(pred1, false);
    const CsvTable t = read_csv(dir.file("pred1/predictions.csv"));
    const auto& st = c.samples[0];
    for (int y = 1; y <= 5; ++y) {
      const double want = std::exp(log_f_Y(y, {0, 0, 0, 0, 0, 0}, st));
      CHECK_CLOSE(parse_double(t.rows[0][y], "pred"), want, 1e-12);
    }
  }
}

TEST_CASE("replicate study checkpoints and resumes deterministically") {
  TempDir dir;
  auto make_cfg = [&](const std::string& out) {
    RunConfig cfg;
    cfg.mode = "study";
    cfg.replicates = 2;
    cfg.output_dir = dir.file(out);
    cfg.mcmc.iterations = 80;
    cfg.mcmc.burnin = 40;
    cfg.mcmc.seed = 17;
    cfg.sim.n_train = 16;
    cfg.sim.n_test = 12;
    cfg.sim.annotated_fraction = 0.5;
    cfg.settings = {StudySetting{"full", std::nullopt, std::nullopt},
                    StudySetting{"maximum", 0.5, std::nullopt},
                    StudySetting{"linear", 0.5, std::nullopt},
                    StudySetting{"compositional-only", std::nullopt, std::nullopt}};
    return cfg;
  };
  run(make_cfg("s1"), false);
  CHECK(fs::exists(dir.file("s1/report.json")));
  CHECK(fs::exists(dir.file("s1/mse.csv")));
  CHECK(fs::exists(dir.file("s1/coverage.csv")));
  CHECK(fs::exists(dir.file("s1/detection.csv")));
  CHECK(fs::exists(dir.file("s1/rps_replicates.csv")));
  CHECK(fs::exists(dir.file("s1/rps_summary.csv")));
  CHECK(fs::exists(dir.file("s1/checkpoint_r1.json")));

  // identical config into a fresh directory: byte-identical reports
  run(make_cfg("s2"), false);
  CHECK(slurp(dir.file("s1/report.json")) == slurp(dir.file("s2/report.json")));
  CHECK(slurp(dir.file("s1/mse.csv")) == slurp(dir.file("s2/mse.csv")));
  CHECK(slurp(dir.file("s1/rps_replicates.csv")) == slurp(dir.file("s2/rps_replicates.csv")));

  // resuming from existing checkpoints reproduces the same report
  fs::remove(dir.file("s1/report.json"));
  run(make_cfg("s1"), false);
  CHECK(slurp(dir.file("s1/report.json")) == slurp(dir.file("s2/report.json")));

  // checkpoints from a different configuration are refused
  RunConfig other = make_cfg("s1");
  other.mcmc.seed = 18;
  CHECK_THROWS_WITH_AS(run(other, false), doctest::Contains("different study"), std::runtime_error);
}
