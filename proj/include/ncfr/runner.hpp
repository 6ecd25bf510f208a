#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ncfr/dataset.hpp"
#include "ncfr/eval.hpp"
#include "ncfr/proposals.hpp"
#include "ncfr/state.hpp"
#include "ncfr/synth.hpp"

namespace ncfr {

enum class ModelType { frr, cfr, ncfr };

struct ModelSpec {
  ModelType type = ModelType::ncfr;
  int k = 20;           // fixed K for cfr, initial K for ncfr
  double ridge = -1.0;  // frr penalty; < 0 selects the data-scaled default
  NoiseMode noise_mode = NoiseMode::diagonal;
  AlphaMode alpha_mode = AlphaMode::sampled;
  ProposalStrategy strategy{};
  AnnealSchedule schedule{};
};

struct RunConfig {
  std::string name = "run";
  ModelSpec model{};
  std::optional<SynthConfig> synth;
  std::string dataset_path;  // used when synth is absent
  SplitScheme scheme = SplitScheme::holdout_100;
  int test_count = 100;
  long iterations = 2000;
  long burn_in = 1900;
  int retain = 100;
  Hyperparams hp{};
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  int chains = 1;
  bool posterior_mean_prediction = false;

  void validate() const;  // throws ConfigError naming the offending key
};

std::string run_config_to_json(const RunConfig& config);
RunConfig run_config_from_json(const std::string& text);
RunConfig load_run_config(const std::string& path);
void save_run_config(const std::string& path, const RunConfig& config);

/// A roster file is {"roster": [ <run config>, ... ]}; a plain config file
/// parses as a one-element roster.
std::vector<RunConfig> load_roster(const std::string& path);

struct ChainResult {
  int chain_index = 0;
  MetricsReport metrics;
  std::vector<TraceRecord> trace;
  std::vector<IterTiming> timings;
};

struct ExperimentResult {
  std::string run_dir;
  std::vector<ChainResult> chains;
};

/// Runs every chain of one configuration (in parallel when chains > 1),
/// persisting per-chain trace, timing, metrics and checkpoint files plus the
/// effective config under <out_dir>/<name>/. The NCFR_OUT_DIR environment
/// variable overrides out_dir.
ExperimentResult run_experiment(const RunConfig& config);

/// Continues a checkpointed chain for extra_iterations more sweeps. The
/// restored random stream makes split runs bit-identical to one long run.
ChainResult resume(const std::string& checkpoint_path, long extra_iterations);

/// Recomputes a finished chain's metrics from its checkpoint plus the
/// persisted trace/timing files, without advancing the chain.
ChainResult resume_report(const std::string& checkpoint_path);

/// Runs a roster sequentially and writes one comparison table row per entry.
void run_roster(const std::vector<RunConfig>& roster, const std::string& table_path);

/// The 13 synthetic-study variants with shared data settings.
std::vector<RunConfig> default_roster(const SynthConfig& synth, SplitScheme scheme,
                                      long iterations, int retain,
                                      std::uint64_t seed, const std::string& out_dir);

}  // namespace ncfr
