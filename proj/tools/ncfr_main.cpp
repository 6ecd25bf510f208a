#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ncfr/errors.hpp"
#include "ncfr/runner.hpp"
#include "ncfr/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

ncfr::SynthConfig load_synth_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ncfr::IoError("cannot open config: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  json j = json::parse(ss.str());
  // Accept either a bare synth object or a run config carrying one.
  const json& s = j.contains("synth") ? j.at("synth") : j;
  ncfr::SynthConfig cfg;
  auto get = [&s](const char* key, auto& out) {
    if (s.contains(key)) out = s.at(key).get<std::decay_t<decltype(out)>>();
  };
  get("p", cfg.p);
  get("q", cfg.q);
  get("k_true", cfg.k_true);
  get("n", cfg.n);
  get("bernoulli_p", cfg.bernoulli_p);
  get("noise_y", cfg.noise_y);
  get("noise_z", cfg.noise_z);
  get("seed", cfg.seed);
  get("identity_loadings", cfg.identity_loadings);
  cfg.validate();
  return cfg;
}

void print_metrics(const ncfr::ChainResult& chain) {
  const auto& m = chain.metrics;
  std::cout << "chain " << chain.chain_index << ": nlse median " << m.nlse_summary.median
            << " (q1 " << m.nlse_summary.q1 << ", q3 " << m.nlse_summary.q3
            << "), train/test delta " << m.train_test_delta << ", best sample #"
            << m.best_sample_index << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Non-parametric conditional factor regression experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir, checkpoint_path, run_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int chains = 0;
  long extra_iterations = 0;

  auto* gen = app.add_subcommand("generate", "Generate a synthetic dataset");
  gen->add_option("--config", config_path, "Synth config JSON")->required();
  gen->add_option("--out", out_dir, "Output directory")->required();
  gen->add_option("--seed", seed, "Override the config seed")->each([&](const std::string&) {
    seed_set = true;
  });

  auto* run = app.add_subcommand("run", "Run one experiment or a roster");
  run->add_option("--config", config_path, "Run or roster config JSON")->required();
  run->add_option("--out", out_dir, "Override the output directory");
  run->add_option("--seed", seed, "Override the config seed")->each([&](const std::string&) {
    seed_set = true;
  });
  run->add_option("--chains", chains, "Override the chain count");

  auto* res = app.add_subcommand("resume", "Continue a checkpointed chain");
  res->add_option("--checkpoint", checkpoint_path, "Checkpoint file")->required();
  res->add_option("--iterations", extra_iterations, "Extra iterations")->required();

  auto* rep = app.add_subcommand("report", "Re-summarize a finished run");
  rep->add_option("--run-dir", run_dir, "Run directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      ncfr::SynthConfig cfg = load_synth_config(config_path);
      if (seed_set) cfg.seed = seed;
      fs::create_directories(out_dir);
      auto [ds, gt] = ncfr::generate(cfg);
      ncfr::save_dataset(out_dir + "/dataset.txt", ds);
      ncfr::save_ground_truth(out_dir + "/ground_truth.txt", cfg, gt);
      std::cout << "wrote " << out_dir << "/dataset.txt (" << ds.p() << "x" << ds.n()
                << " inputs, " << ds.q() << "x" << ds.n() << " responses)\n";
    } else if (run->parsed()) {
      std::vector<ncfr::RunConfig> roster = ncfr::load_roster(config_path);
      for (auto& cfg : roster) {
        if (seed_set) cfg.seed = seed;
        if (chains > 0) cfg.chains = chains;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
      }
      if (roster.size() == 1) {
        ncfr::ExperimentResult result = ncfr::run_experiment(roster.front());
        std::cout << "run dir: " << result.run_dir << '\n';
        for (const auto& chain : result.chains) print_metrics(chain);
      } else {
        const std::string base = !out_dir.empty() ? out_dir : roster.front().out_dir;
        fs::create_directories(base);
        const std::string table = base + "/roster_table.tsv";
        ncfr::run_roster(roster, table);
        std::cout << "roster table: " << table << '\n';
      }
    } else if (res->parsed()) {
      ncfr::ChainResult chain = ncfr::resume(checkpoint_path, extra_iterations);
      print_metrics(chain);
    } else if (rep->parsed()) {
      // Rebuild the metrics file of every chain checkpoint in the directory.
      bool found = false;
      for (int c = 0;; ++c) {
        const std::string ckpt = run_dir + "/checkpoint_chain" + std::to_string(c) + ".bin";
        if (!fs::exists(ckpt)) break;
        found = true;
        ncfr::ChainResult chain = ncfr::resume_report(ckpt);
        print_metrics(chain);
      }
      if (!found) {
        std::cerr << "no chain checkpoints under " << run_dir << '\n';
        return 1;
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
