// Command-line driver: simulate, fit, evaluate, predict, study.
// All options of a subcommand can also come from a JSON config file
// (--config); explicit flags override the file.

#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "bcfuse/io.hpp"
#include "bcfuse/study.hpp"

using namespace bcfuse;

namespace {

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> iterations, burnin, thin;
  std::optional<std::string> output_dir;
  bool verbose = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON run configuration");
  cmd->add_option("--seed", args.seed, "master RNG seed");
  cmd->add_option("--iterations", args.iterations, "MCMC iterations");
  cmd->add_option("--burnin", args.burnin, "burn-in iterations");
  cmd->add_option("--thin", args.thin, "thinning interval");
  cmd->add_option("--output", args.output_dir, "output directory");
  cmd->add_flag("--verbose", args.verbose, "progress notes on stderr");
}

RunConfig base_config(const CommonArgs& args, const std::string& mode) {
  RunConfig cfg;
  if (!args.config_path.empty()) {
    cfg = load_run_config(args.config_path);
    if (cfg.mode != mode)
      throw std::runtime_error("config mode '" + cfg.mode + "' does not match subcommand '" + mode + "'");
  } else {
    cfg.mode = mode;
  }
  if (args.seed) {
    cfg.mcmc.seed = *args.seed;
    cfg.sim.seed = *args.seed;
  }
  if (args.iterations) cfg.mcmc.iterations = *args.iterations;
  if (args.burnin) cfg.mcmc.burnin = *args.burnin;
  if (args.thin) cfg.mcmc.thin = *args.thin;
  if (args.output_dir) cfg.output_dir = *args.output_dir;
  return cfg;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical data fusion of ordinal annotations and AI confidence vectors"};
  app.require_subcommand(1);

  CommonArgs sim_args, fit_args, eval_args, pred_args, study_args;

  auto* sim_cmd = app.add_subcommand("simulate", "generate a synthetic train/test dataset");
  add_common(sim_cmd, sim_args);
  std::optional<int> sim_ntrain, sim_ntest;
  std::optional<double> sim_fraction;
  sim_cmd->add_option("--n-train", sim_ntrain, "training sequences");
  sim_cmd->add_option("--n-test", sim_ntest, "test sequences");
  sim_cmd->add_option("--annotated-fraction", sim_fraction, "fraction of training images annotated");

  auto* fit_cmd = app.add_subcommand("fit", "fit one setting to a dataset");
  add_common(fit_cmd, fit_args);
  std::optional<std::string> fit_setting, fit_seq, fit_img, fit_ann, fit_conf;
  std::optional<double> fit_threshold, fit_zeta;
  std::optional<int> fit_max_images;
  std::optional<bool> fit_standardize;
  fit_cmd->add_option("--setting", fit_setting, "linear|maximum|ordinal-only|compositional-only|full");
  fit_cmd->add_option("--sequences", fit_seq, "sequences.csv");
  fit_cmd->add_option("--images", fit_img, "images.csv");
  fit_cmd->add_option("--annotations", fit_ann, "annotations.csv");
  fit_cmd->add_option("--confidences", fit_conf, "confidences.csv");
  fit_cmd->add_option("--threshold", fit_threshold, "confidence threshold (linear/maximum)");
  fit_cmd->add_option("--zeta", fit_zeta, "confidence smoothing constant");
  fit_cmd->add_option("--max-images", fit_max_images, "cap on images per sequence");
  fit_cmd->add_option("--standardize", fit_standardize, "center/scale covariates (default true)");

  auto* eval_cmd = app.add_subcommand("evaluate", "score a fitted chain against data with truth");
  add_common(eval_cmd, eval_args);
  std::optional<std::string> ev_fitdir, ev_seq, ev_img, ev_ann, ev_conf, ev_tseq, ev_timg, ev_tconf,
      ev_truth;
  eval_cmd->add_option("--fit-dir", ev_fitdir, "directory with fit artifacts");
  eval_cmd->add_option("--sequences", ev_seq, "training sequences.csv (with true_y)");
  eval_cmd->add_option("--images", ev_img, "training images.csv");
  eval_cmd->add_option("--annotations", ev_ann, "training annotations.csv");
  eval_cmd->add_option("--confidences", ev_conf, "training confidences.csv");
  eval_cmd->add_option("--test-sequences", ev_tseq, "test sequences.csv");
  eval_cmd->add_option("--test-images", ev_timg, "test images.csv");
  eval_cmd->add_option("--test-confidences", ev_tconf, "test confidences.csv");
  eval_cmd->add_option("--truth", ev_truth, "truth.json from simulate");

  auto* pred_cmd = app.add_subcommand("predict", "posterior category probabilities over a grid");
  add_common(pred_cmd, pred_args);
  std::optional<std::string> pr_fitdir, pr_samples, pr_grid;
  pred_cmd->add_option("--fit-dir", pr_fitdir, "directory with fit artifacts");
  pred_cmd->add_option("--samples", pr_samples, "samples.csv");
  pred_cmd->add_option("--grid", pr_grid, "grid.csv of covariate rows");

  auto* study_cmd = app.add_subcommand("study", "replicate simulation study over settings");
  add_common(study_cmd, study_args);
  std::optional<int> st_replicates;
  study_cmd->add_option("--replicates", st_replicates, "number of replicates");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim_cmd->parsed()) {
      RunConfig cfg = base_config(sim_args, "simulate");
      if (sim_ntrain) cfg.sim.n_train = *sim_ntrain;
      if (sim_ntest) cfg.sim.n_test = *sim_ntest;
      if (sim_fraction) cfg.sim.annotated_fraction = *sim_fraction;
      run(cfg, sim_args.verbose);
    } else if (fit_cmd->parsed()) {
      RunConfig cfg = base_config(fit_args, "fit");
      if (fit_setting) cfg.setting = *fit_setting;
      if (fit_seq) cfg.train.sequences = *fit_seq;
      if (fit_img) cfg.train.images = *fit_img;
      if (fit_ann) cfg.train.annotations = *fit_ann;
      if (fit_conf) cfg.train.confidences = *fit_conf;
      if (fit_threshold) cfg.threshold = *fit_threshold;
      if (fit_zeta) cfg.zeta = *fit_zeta;
      if (fit_max_images) cfg.max_images = *fit_max_images;
      if (fit_standardize) cfg.standardize = *fit_standardize;
      run(cfg, fit_args.verbose);
    } else if (eval_cmd->parsed()) {
      RunConfig cfg = base_config(eval_args, "evaluate");
      if (ev_fitdir) cfg.fit_dir = *ev_fitdir;
      if (ev_seq) cfg.train.sequences = *ev_seq;
      if (ev_img) cfg.train.images = *ev_img;
      if (ev_ann) cfg.train.annotations = *ev_ann;
      if (ev_conf) cfg.train.confidences = *ev_conf;
      if (ev_tseq) cfg.test.sequences = *ev_tseq;
      if (ev_timg) cfg.test.images = *ev_timg;
      if (ev_tconf) cfg.test.confidences = *ev_tconf;
      if (ev_truth) cfg.truth = *ev_truth;
      run(cfg, eval_args.verbose);
    } else if (pred_cmd->parsed()) {
      RunConfig cfg = base_config(pred_args, "predict");
      if (pr_fitdir) cfg.fit_dir = *pr_fitdir;
      if (pr_samples) cfg.samples = *pr_samples;
      if (pr_grid) cfg.grid = *pr_grid;
      run(cfg, pred_args.verbose);
    } else if (study_cmd->parsed()) {
      RunConfig cfg = base_config(study_args, "study");
      if (st_replicates) cfg.replicates = *st_replicates;
      run(cfg, study_args.verbose);
    }
  } catch (const std::exception& e) {
    nlohmann::json err;
    err["error"] = e.what();
    std::fprintf(stderr, "%s\n", err.dump().c_str());
    return 1;
  }
  return 0;
}
