#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ncfr/dataset.hpp"
#include "ncfr/rng.hpp"

namespace ncfr {

/// Buffet-resembling synthetic generator settings. Deliberately not an exact
/// buffet-process draw: the mask is plain i.i.d. Bernoulli so no candidate
/// model is favored. noise_y / noise_z are standard deviations.
struct SynthConfig {
  int p = 70;
  int q = 50;
  int k_true = 20;
  int n = 1000;
  double bernoulli_p = 0.5;
  double noise_y = 0.1;
  double noise_z = 0.1;
  std::uint64_t seed = 0;
  bool identity_loadings = false;  // debug hook: force Q = P = I

  void validate() const;
};

/// Everything the generator actually used, for K-recovery and accuracy
/// bookkeeping. Regenerating with the same config reproduces all fields
/// bit-exactly.
struct GroundTruth {
  IntMatrix S;  // k_true x N
  Matrix Z;     // k_true x N, dense (pre-mask)
  Matrix Q;     // q x k_true
  Matrix P;     // k_true x p
  Matrix Ey;    // q x N noise draws
  Matrix Ez;    // k_true x N noise draws
};

/// X i.i.d. standard Gaussian, Z = P X + noise, S i.i.d. Bernoulli,
/// Y = Q (S . Z) + noise.
std::pair<RegressionDataset, GroundTruth> generate(const SynthConfig& cfg);

enum class SplitScheme { impute_100, holdout_100 };

struct SplitResult {
  RegressionDataset train;
  RegressionDataset test;          // X and true Y at the test columns
  std::vector<int> test_indices;   // sorted, into the original dataset
};

/// impute_100 keeps one dataset and marks the test columns missing (their Y
/// values are zeroed in the train view); holdout_100 produces disjoint
/// train/test datasets. test_count defaults to the 100 used throughout the
/// synthetic protocol.
SplitResult split(const RegressionDataset& data, SplitScheme scheme, Rng& rng,
                  int test_count = 100);

/// Ground-truth sidecar file (text, same conventions as the dataset format).
void save_ground_truth(const std::string& path, const SynthConfig& cfg,
                       const GroundTruth& gt);
std::pair<SynthConfig, GroundTruth> load_ground_truth(const std::string& path);

}  // namespace ncfr
