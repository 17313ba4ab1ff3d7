#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bcfuse/data.hpp"
#include "bcfuse/mcmc.hpp"
#include "bcfuse/prior.hpp"
#include "bcfuse/simulate.hpp"

namespace bcfuse {

// CSV locations for one dataset. annotations/confidences may be empty strings
// (treated as absent files).
struct DataPaths {
  std::string sequences;
  std::string images;
  std::string annotations;
  std::string confidences;

  bool empty() const { return sequences.empty(); }
};

// per-column centering/scaling of the latent-score covariates, recorded at
// ingestion so prediction grids can be mapped onto the fitted scale
struct StandardizeTransform {
  bool applied = false;
  std::vector<double> mean;
  std::vector<double> sd;

  std::vector<double> apply(const std::vector<double>& raw) const;
};

struct IngestOptions {
  int L = 5;
  double zeta = 1e-12;
  int max_images = 30;       // sequences above this are uniformly subsampled
  std::uint64_t seed = 1;    // drives the subsampling
  bool standardize = true;
  double simplex_tol = 1e-6; // file-side tolerance before renormalization
};

struct IngestResult {
  Dataset data;
  StandardizeTransform transform;
};

// Assemble a Dataset from the CSV schema: renormalize and zeta-adjust every
// confidence row, standardize covariate columns, cap over-long sequences.
IngestResult ingest(const DataPaths& paths, const IngestOptions& opt);

// inverse of ingest, minus standardization: writes the four CSVs as stored
void write_dataset(const Dataset& data, const DataPaths& paths);

void write_samples_csv(const std::string& path, const ChainOutput& chain, const McmcConfig& cfg);
ChainOutput read_samples_csv(const std::string& path);

void write_y_marginals_csv(const std::string& path, const ChainOutput& chain,
                           const std::vector<std::string>& sequence_ids);
void write_acceptance_csv(const std::string& path, const ChainOutput& chain);

void write_transform_json(const std::string& path, const StandardizeTransform& t);
StandardizeTransform read_transform_json(const std::string& path);

void write_truth_json(const std::string& path, const ParamState& truth);
ParamState read_truth_json(const std::string& path);

// one fitted setting within a study
struct StudySetting {
  std::string setting;                      // linear | maximum | ordinal-only | compositional-only | full
  std::optional<double> threshold;          // required for linear/maximum
  std::optional<double> annotated_fraction; // overrides the base simulation fraction

  std::string label() const;
  void validate() const;
};

// scalar hyperparameter overrides applied on top of default_prior
struct PriorOverrides {
  std::optional<double> beta_sd, intercept_sd, omega_sd, cutoff_log_var;
  std::optional<double> nu_conditional_var, annotator_accuracy, nu_tilde_edge_window;

  PriorSpec build(int L, int p, int q, int A) const;
};

// Run configuration; a JSON file with keys matching these field names.
// Unknown keys are rejected.
struct RunConfig {
  std::string mode; // simulate | fit | evaluate | predict | study
  std::string setting = "full";
  std::optional<double> threshold;
  std::optional<double> annotated_fraction;
  DataPaths train;
  DataPaths test;
  std::string grid;
  std::string samples;
  std::string truth;
  std::string fit_dir;    // artifacts of a previous fit (evaluate/predict)
  std::string output_dir = ".";
  McmcConfig mcmc;
  SimConfig sim;
  PriorOverrides prior;
  double zeta = 1e-12;
  int max_images = 30;
  bool standardize = true;
  int replicates = 20;
  std::vector<StudySetting> settings;

  void validate() const;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

} // namespace bcfuse
