#pragma once

#include <string>
#include <vector>

#include "ncfr/dataset.hpp"
#include "ncfr/state.hpp"

namespace ncfr {

/// Normalized least-square prediction error per response dimension:
///   nlse_i = sum_m (yhat_im - y_im)^2 / sum_m (y_im - ybar_i)^2
/// with ybar_i the test-set mean, so 1.0 means "no better than predicting
/// the mean". A zero-variance dimension is reported as NaN (with a one-line
/// warning on stderr) and excluded from summaries.
Vector nlse(const Matrix& y_hat, const Matrix& y_true);

/// Predictive log likelihood of the test block under one retained sample,
/// with the latent weights marginalized and no mask applied:
///   sum_n log N(y_n | Q P x_n, Psi_y + Q diag(psi_z) Q^T)
double predictive_log_likelihood(const LatentState& state,
                                 const RegressionDataset& test);

/// Index of the retained sample with the highest training joint log
/// likelihood; ties go to the latest iteration.
int select_best_sample(const std::vector<LatentState>& tail,
                       const RegressionDataset& train);

/// One line of the per-iteration trace. Timing lives in a sibling file so
/// the trace itself is bit-reproducible under a fixed seed.
struct TraceRecord {
  long iteration = 0;
  int k = 0;
  double joint_ll = 0.0;
  double temperature = 0.0;
};

struct IterTiming {
  long iteration = 0;
  double cpu_seconds = 0.0;
  double wall_seconds = 0.0;
};

void write_trace(const std::string& path, const std::vector<TraceRecord>& records);
void append_trace(const std::string& path, const std::vector<TraceRecord>& records);
std::vector<TraceRecord> read_trace(const std::string& path);

void write_timings(const std::string& path, const std::vector<IterTiming>& rows);
void append_timings(const std::string& path, const std::vector<IterTiming>& rows);
std::vector<IterTiming> read_timings(const std::string& path);

struct Quartiles {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
};

/// Median and quartiles over the finite entries of v.
Quartiles quartiles(const Vector& v);

struct MetricsReport {
  Vector nlse_per_dim;                   // test-set NLSE, length q
  Quartiles nlse_summary;                // over finite dimensions
  Vector nlse_train_per_dim;             // training-set NLSE for the delta
  std::vector<double> pred_loglik_last;  // one per retained sample
  std::vector<int> k_last;               // one per retained sample
  std::vector<double> seconds_per_iter_last;
  double train_test_delta = 0.0;         // mean over dims of (test - train)
  int best_sample_index = -1;
  double best_joint_ll = 0.0;
  std::string nlse_normalization = "test-set per-dimension variance";
};

/// Aggregates a finished run. `tail` is the retained chain block, ordered by
/// iteration; predictions come from the highest-likelihood sample (or the
/// posterior mean when posterior_mean_prediction is set).
MetricsReport summarize(const std::vector<LatentState>& tail,
                        const RegressionDataset& train,
                        const RegressionDataset& test,
                        const std::vector<IterTiming>& timings,
                        bool posterior_mean_prediction = false);

void write_metrics(const std::string& path, const MetricsReport& report);

}  // namespace ncfr
