#pragma once

#include <string>
#include <vector>

#include "bcfuse/evaluate.hpp"
#include "bcfuse/io.hpp"

namespace bcfuse {

// everything kept from one fitted setting on one replicate
struct SettingReplicateResult {
  std::string label;
  int replicate = 0;
  double in_rps_mean = std::numeric_limits<double>::quiet_NaN();
  double out_rps_mean = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> in_rps;  // per sequence (empty when not applicable)
  std::vector<double> out_rps; // per sequence (empty when not applicable)
  std::vector<CoefSummary> beta;
  int survivors = 0;
  int n_train = 0;
};

struct StudyResult {
  std::vector<StudySetting> settings;
  // per_setting[s][r]
  std::vector<std::vector<SettingReplicateResult>> per_setting;
  std::vector<double> beta_true;
};

// Fits one setting to a generated replicate and scores it.
SettingReplicateResult fit_and_score(const StudySetting& setting, const SimulatedData& sim_data,
                                     const PriorOverrides& prior, const McmcConfig& mcmc,
                                     int replicate, std::uint64_t chain_seed);

// Generates cfg.replicates datasets, fits every configured setting to each,
// and aggregates MSE/coverage/detection and RPS summaries. Completed
// replicates are checkpointed under cfg.output_dir and skipped on rerun.
StudyResult run_study(const RunConfig& cfg, bool verbose);

void write_study_report(const StudyResult& result, const std::string& output_dir);

// mode dispatcher backing the CLI: simulate | fit | evaluate | predict | study
void run(const RunConfig& cfg, bool verbose);

} // namespace bcfuse
