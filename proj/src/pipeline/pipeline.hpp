#ifndef LINKMSE_PIPELINE_PIPELINE_HPP
#define LINKMSE_PIPELINE_PIPELINE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "averaging/averaging.hpp"
#include "diagnostics/diagnostics.hpp"
#include "linkage/sampler.hpp"
#include "mse/lcmcr.hpp"

namespace linkmse {

inline constexpr const char* kLinkmseVersion = "0.1.0";

// Population-size stage settings applied to each linkage draw's table.
struct MseSettings {
  std::string model = "bma";  // "bma", "lcmcr", or a graphical model name
  double alpha = 1.0;
  SizePrior prior;
  int lcmcr_strata = 10;
  McmcConfig lcmcr_mcmc{2000, 500, 3};
  long draws_used = 100;       // linkage draws fed into the size stage
  std::vector<int> keep_lists; // 1-based subset; empty = all lists
};

struct AverageOutcome {
  AveragedPosterior averaged;
  std::vector<SizePosterior> per_draw;  // normalized, one per used linkage draw
  std::vector<std::string> model_names; // bma only
  std::vector<double> model_weight_mean;
  bool lcmcr = false;
  bool lcmcr_cap_hit = false;     // any draw truncated by the memory-guard grid cap
  std::size_t unique_tables = 0;  // distinct capture-history tables seen
};

// Runs the size model on each selected draw's capture-history table (cached
// by table content) and pools the posteriors with equal draw weight. Under
// "bma" the decomposition is the three-term linkage/model/residual split.
AverageOutcome average_over_chain(const LinkageChain& chain, const MseSettings& settings,
                                  std::uint64_t seed);

// Long-format curves: one series for the pooled posterior, one per draw.
void emit_plot_data(const SizePosterior& pooled, const std::vector<SizePosterior>& per_draw,
                    const std::string& path);

void write_size_posterior_csv(const SizePosterior& p, const std::string& path);
SizePosterior read_size_posterior_csv(const std::string& path);
void write_size_summary_json(const SizePosterior& p, const std::vector<std::string>& model_names,
                             const std::vector<double>& model_weights, const std::string& path);
void write_outcome(const AverageOutcome& outcome, const std::string& dir);
void write_diagnostics(const PartitionSummaries& s, const std::string& dir);

// Rebuild the plot bundle from a finished run directory (averaged.csv plus,
// when present, per_draw_posteriors.csv).
void emit_plots_from_run(const std::string& run_dir, const std::string& out_path);

struct PipelineConfig {
  std::string config_path;  // the file this was read from (hashed in the manifest)
  std::vector<std::string> lists;
  std::string schema_path, compare_path, priors_path;
  McmcConfig link_mcmc;
  MseSettings mse;
  std::uint64_t seed = 1;
};

PipelineConfig read_pipeline_config(const std::string& path);

struct PipelineResult {
  std::string dir;
  AverageOutcome outcome;
  std::size_t record_count = 0;
  std::size_t candidate_count = 0;
};

// ingest -> compare -> link -> diag -> per-draw tables -> size model ->
// average. Every artifact lands in out_dir; the manifest hashes all inputs
// and outputs so reruns can be compared byte for byte.
PipelineResult run_pipeline(const PipelineConfig& config, const std::string& out_dir);

}  // namespace linkmse

#endif
