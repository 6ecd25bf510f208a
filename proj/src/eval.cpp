#include "ncfr/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>

#include "ncfr/errors.hpp"
#include "ncfr/gaussian.hpp"
#include "ncfr/model.hpp"

namespace ncfr {

Vector nlse(const Matrix& y_hat, const Matrix& y_true) {
  if (y_hat.rows() != y_true.rows() || y_hat.cols() != y_true.cols())
    throw StructuralError("nlse: prediction/truth shapes differ");
  if (y_true.cols() < 2) throw StructuralError("nlse: needs at least 2 columns");
  const int q = static_cast<int>(y_true.rows());
  Vector out(q);
  bool warned = false;
  for (int i = 0; i < q; ++i) {
    const double mean = y_true.row(i).mean();
    const double denom = (y_true.row(i).array() - mean).square().sum();
    const double num = (y_hat.row(i) - y_true.row(i)).squaredNorm();
    if (denom <= 0.0) {
      if (!warned) {
        std::cerr << "nlse: zero-variance response dimension " << i
                  << " reported as NaN and excluded from summaries\n";
        warned = true;
      }
      out[i] = std::numeric_limits<double>::quiet_NaN();
    } else {
      out[i] = num / denom;
    }
  }
  return out;
}

double predictive_log_likelihood(const LatentState& state,
                                 const RegressionDataset& test) {
  const int q = test.q();
  Matrix cov = Matrix(state.psi_y.asDiagonal());
  if (state.k() > 0)
    cov += state.Q * state.psi_z.asDiagonal() * state.Q.transpose();
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success)
    throw NumericalError("predictive_log_likelihood: covariance not PD");
  double logdet = 0.0;
  for (int i = 0; i < q; ++i) logdet += 2.0 * std::log(llt.matrixLLT()(i, i));

  const Matrix mean = predict_all(state, test.X);
  double ll = 0.0;
  for (int n = 0; n < test.n(); ++n) {
    const Vector r = test.Y.col(n) - mean.col(n);
    ll += -0.5 * (q * kLog2Pi + logdet + r.dot(llt.solve(r)));
  }
  if (!std::isfinite(ll))
    throw NumericalError("predictive_log_likelihood: non-finite value");
  return ll;
}

int select_best_sample(const std::vector<LatentState>& tail,
                       const RegressionDataset& train) {
  if (tail.empty()) throw StructuralError("select_best_sample: empty tail");
  int best = 0;
  double best_ll = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < tail.size(); ++i) {
    const double ll = joint_log_likelihood(tail[i], train);
    if (ll >= best_ll) {  // >= so ties go to the latest iteration
      best_ll = ll;
      best = static_cast<int>(i);
    }
  }
  return best;
}

namespace {

constexpr char kTraceHeader[] = "# ncfr-trace 1\titeration\tK\tjoint_ll\ttemperature";
constexpr char kTimingHeader[] = "# ncfr-timing 1\titeration\tcpu_seconds\twall_seconds";

void write_trace_rows(std::ostream& os, const std::vector<TraceRecord>& records) {
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& r : records)
    os << r.iteration << '\t' << r.k << '\t' << r.joint_ll << '\t'
       << r.temperature << '\n';
}

}  // namespace

void write_trace(const std::string& path, const std::vector<TraceRecord>& records) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  os << kTraceHeader << '\n';
  write_trace_rows(os, records);
  if (!os.good()) throw IoError("write failed: " + path);
}

void append_trace(const std::string& path, const std::vector<TraceRecord>& records) {
  std::ofstream os(path, std::ios::app);
  if (!os) throw IoError("cannot open for append: " + path);
  write_trace_rows(os, records);
  if (!os.good()) throw IoError("write failed: " + path);
}

std::vector<TraceRecord> read_trace(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open trace: " + path);
  std::string header;
  std::getline(is, header);
  if (header != kTraceHeader) throw IoError("not an ncfr-trace v1 file: " + path);
  std::vector<TraceRecord> out;
  TraceRecord r;
  while (is >> r.iteration >> r.k >> r.joint_ll >> r.temperature) out.push_back(r);
  return out;
}

void write_timings(const std::string& path, const std::vector<IterTiming>& rows) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  os << kTimingHeader << '\n';
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& r : rows)
    os << r.iteration << '\t' << r.cpu_seconds << '\t' << r.wall_seconds << '\n';
  if (!os.good()) throw IoError("write failed: " + path);
}

void append_timings(const std::string& path, const std::vector<IterTiming>& rows) {
  std::ofstream os(path, std::ios::app);
  if (!os) throw IoError("cannot open for append: " + path);
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& r : rows)
    os << r.iteration << '\t' << r.cpu_seconds << '\t' << r.wall_seconds << '\n';
  if (!os.good()) throw IoError("write failed: " + path);
}

std::vector<IterTiming> read_timings(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open timing file: " + path);
  std::string header;
  std::getline(is, header);
  if (header != kTimingHeader) throw IoError("not an ncfr-timing v1 file: " + path);
  std::vector<IterTiming> out;
  IterTiming r;
  while (is >> r.iteration >> r.cpu_seconds >> r.wall_seconds) out.push_back(r);
  return out;
}

Quartiles quartiles(const Vector& v) {
  std::vector<double> vals;
  vals.reserve(static_cast<size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (std::isfinite(v[i])) vals.push_back(v[i]);
  if (vals.empty()) throw StructuralError("quartiles: no finite values");
  std::sort(vals.begin(), vals.end());
  auto at = [&](double frac) {
    const double pos = frac * (static_cast<double>(vals.size()) - 1.0);
    const size_t lo = static_cast<size_t>(pos);
    const size_t hi = std::min(lo + 1, vals.size() - 1);
    const double t = pos - static_cast<double>(lo);
    return (1.0 - t) * vals[lo] + t * vals[hi];
  };
  return {at(0.25), at(0.5), at(0.75)};
}

MetricsReport summarize(const std::vector<LatentState>& tail,
                        const RegressionDataset& train,
                        const RegressionDataset& test,
                        const std::vector<IterTiming>& timings,
                        bool posterior_mean_prediction) {
  if (tail.empty()) throw StructuralError("summarize: empty retained tail");
  MetricsReport rep;
  rep.best_sample_index = select_best_sample(tail, train);
  rep.best_joint_ll =
      joint_log_likelihood(tail[static_cast<size_t>(rep.best_sample_index)], train);

  const LatentState& best = tail[static_cast<size_t>(rep.best_sample_index)];
  const Matrix y_hat_test = posterior_mean_prediction
                                ? predict_posterior_mean(tail, test.X)
                                : predict_all(best, test.X);
  rep.nlse_per_dim = nlse(y_hat_test, test.Y);
  rep.nlse_summary = quartiles(rep.nlse_per_dim);
  if (posterior_mean_prediction) rep.nlse_normalization += "; posterior-mean prediction";

  // Training NLSE over the observed training columns.
  const std::vector<char> obs = train.observed_mask();
  Matrix x_tr(train.p(), train.n_observed()), y_tr(train.q(), train.n_observed());
  int w = 0;
  for (int n = 0; n < train.n(); ++n) {
    if (!obs[static_cast<size_t>(n)]) continue;
    x_tr.col(w) = train.X.col(n);
    y_tr.col(w) = train.Y.col(n);
    ++w;
  }
  const Matrix y_hat_train = posterior_mean_prediction
                                 ? predict_posterior_mean(tail, x_tr)
                                 : predict_all(best, x_tr);
  rep.nlse_train_per_dim = nlse(y_hat_train, y_tr);

  double delta = 0.0;
  int finite = 0;
  for (Eigen::Index i = 0; i < rep.nlse_per_dim.size(); ++i) {
    if (!std::isfinite(rep.nlse_per_dim[i]) || !std::isfinite(rep.nlse_train_per_dim[i]))
      continue;
    delta += rep.nlse_per_dim[i] - rep.nlse_train_per_dim[i];
    ++finite;
  }
  rep.train_test_delta = finite > 0 ? delta / finite : 0.0;

  rep.pred_loglik_last.reserve(tail.size());
  rep.k_last.reserve(tail.size());
  for (const auto& st : tail) {
    rep.pred_loglik_last.push_back(predictive_log_likelihood(st, test));
    rep.k_last.push_back(st.k());
  }
  const size_t take = std::min(timings.size(), tail.size());
  for (size_t i = timings.size() - take; i < timings.size(); ++i)
    rep.seconds_per_iter_last.push_back(timings[i].cpu_seconds);
  return rep;
}

void write_metrics(const std::string& path, const MetricsReport& rep) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  os << "# ncfr-metrics 1\n";
  os << "normalization\t" << rep.nlse_normalization << '\n';
  os << "best_sample_index\t" << rep.best_sample_index << '\n';
  os << "best_joint_ll\t" << rep.best_joint_ll << '\n';
  os << "nlse_median\t" << rep.nlse_summary.median << '\n';
  os << "nlse_q1\t" << rep.nlse_summary.q1 << '\n';
  os << "nlse_q3\t" << rep.nlse_summary.q3 << '\n';
  os << "train_test_delta\t" << rep.train_test_delta << '\n';
  auto row = [&os](const char* tag, auto begin, auto end) {
    os << tag;
    for (auto it = begin; it != end; ++it) os << '\t' << *it;
    os << '\n';
  };
  row("nlse_per_dim", rep.nlse_per_dim.data(),
      rep.nlse_per_dim.data() + rep.nlse_per_dim.size());
  row("nlse_train_per_dim", rep.nlse_train_per_dim.data(),
      rep.nlse_train_per_dim.data() + rep.nlse_train_per_dim.size());
  row("pred_loglik_last", rep.pred_loglik_last.begin(), rep.pred_loglik_last.end());
  row("k_last", rep.k_last.begin(), rep.k_last.end());
  row("seconds_per_iter_last", rep.seconds_per_iter_last.begin(),
      rep.seconds_per_iter_last.end());
  if (!os.good()) throw IoError("write failed: " + path);
}

}  // namespace ncfr
