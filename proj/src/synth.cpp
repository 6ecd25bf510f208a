#include "ncfr/synth.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>

#include "ncfr/errors.hpp"

namespace ncfr {

void SynthConfig::validate() const {
  if (p < 1 || q < 1 || k_true < 1 || n < 1)
    throw StructuralError("synth: all dimensions must be >= 1");
  if (!(bernoulli_p > 0.0 && bernoulli_p <= 1.0))
    throw StructuralError("synth: bernoulli_p outside (0,1]");
  if (!(noise_y > 0.0) || !(noise_z > 0.0))
    throw StructuralError("synth: noise scales must be > 0");
  if (identity_loadings && (k_true != q || k_true != p))
    throw StructuralError("synth: identity_loadings requires k_true == q == p");
}

std::pair<RegressionDataset, GroundTruth> generate(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  GroundTruth gt;

  RegressionDataset ds;
  ds.X.resize(cfg.p, cfg.n);
  for (int i = 0; i < cfg.p; ++i)
    for (int n = 0; n < cfg.n; ++n) ds.X(i, n) = rng.normal();

  gt.P.resize(cfg.k_true, cfg.p);
  for (int k = 0; k < cfg.k_true; ++k)
    for (int i = 0; i < cfg.p; ++i) gt.P(k, i) = rng.normal();
  gt.Q.resize(cfg.q, cfg.k_true);
  for (int i = 0; i < cfg.q; ++i)
    for (int k = 0; k < cfg.k_true; ++k) gt.Q(i, k) = rng.normal();
  if (cfg.identity_loadings) {
    gt.P = Matrix::Identity(cfg.k_true, cfg.p);
    gt.Q = Matrix::Identity(cfg.q, cfg.k_true);
  }

  gt.Ez.resize(cfg.k_true, cfg.n);
  for (int k = 0; k < cfg.k_true; ++k)
    for (int n = 0; n < cfg.n; ++n) gt.Ez(k, n) = rng.normal(0.0, cfg.noise_z);
  gt.Z = gt.P * ds.X + gt.Ez;

  gt.S.resize(cfg.k_true, cfg.n);
  for (int k = 0; k < cfg.k_true; ++k)
    for (int n = 0; n < cfg.n; ++n) gt.S(k, n) = rng.bernoulli(cfg.bernoulli_p) ? 1 : 0;

  gt.Ey.resize(cfg.q, cfg.n);
  for (int i = 0; i < cfg.q; ++i)
    for (int n = 0; n < cfg.n; ++n) gt.Ey(i, n) = rng.normal(0.0, cfg.noise_y);
  ds.Y = gt.Q * gt.S.cast<double>().cwiseProduct(gt.Z) + gt.Ey;

  ds.validate();
  return {std::move(ds), std::move(gt)};
}

SplitResult split(const RegressionDataset& data, SplitScheme scheme, Rng& rng,
                  int test_count) {
  data.validate();
  if (!data.missing.empty())
    throw StructuralError("split: dataset already carries missing markers");
  if (test_count < 1 || test_count >= data.n())
    throw StructuralError("split: test size must lie in [1, N)");

  // Fisher-Yates prefix draw of test columns.
  std::vector<int> idx(static_cast<size_t>(data.n()));
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < test_count; ++i) {
    const int j = i + rng.index(data.n() - i);
    std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
  }
  std::vector<int> test_idx(idx.begin(), idx.begin() + test_count);
  std::sort(test_idx.begin(), test_idx.end());

  SplitResult out;
  out.test_indices = test_idx;
  out.test.X.resize(data.p(), test_count);
  out.test.Y.resize(data.q(), test_count);
  for (int i = 0; i < test_count; ++i) {
    out.test.X.col(i) = data.X.col(test_idx[static_cast<size_t>(i)]);
    out.test.Y.col(i) = data.Y.col(test_idx[static_cast<size_t>(i)]);
  }

  if (scheme == SplitScheme::impute_100) {
    out.train = data;
    out.train.missing = test_idx;
    // The held-out responses must not leak through the imputation loop.
    for (int c : test_idx) out.train.Y.col(c).setZero();
  } else {
    const int n_train = data.n() - test_count;
    out.train.X.resize(data.p(), n_train);
    out.train.Y.resize(data.q(), n_train);
    int w = 0;
    size_t t = 0;
    for (int n = 0; n < data.n(); ++n) {
      if (t < test_idx.size() && test_idx[t] == n) {
        ++t;
        continue;
      }
      out.train.X.col(w) = data.X.col(n);
      out.train.Y.col(w) = data.Y.col(n);
      ++w;
    }
  }
  return out;
}

namespace {

void write_block(std::ostream& os, const char* tag, const Matrix& m) {
  os << tag << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) os << ' ';
      os << m(i, j);
    }
    os << '\n';
  }
}

Matrix read_block(std::istream& is, const std::string& tag) {
  std::string seen;
  Eigen::Index rows = 0, cols = 0;
  if (!(is >> seen >> rows >> cols) || seen != tag)
    throw IoError("ground truth: expected block " + tag);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      if (!(is >> m(i, j))) throw IoError("ground truth: truncated block " + tag);
  return m;
}

}  // namespace

void save_ground_truth(const std::string& path, const SynthConfig& cfg,
                       const GroundTruth& gt) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  os << "ncfr-ground-truth 1\n";
  os << cfg.p << ' ' << cfg.q << ' ' << cfg.k_true << ' ' << cfg.n << ' '
     << cfg.bernoulli_p << ' ' << cfg.noise_y << ' ' << cfg.noise_z << ' '
     << cfg.seed << ' ' << (cfg.identity_loadings ? 1 : 0) << '\n';
  write_block(os, "S", gt.S.cast<double>());
  write_block(os, "Z", gt.Z);
  write_block(os, "Q", gt.Q);
  write_block(os, "P", gt.P);
  write_block(os, "Ey", gt.Ey);
  write_block(os, "Ez", gt.Ez);
  if (!os.good()) throw IoError("write failed: " + path);
}

std::pair<SynthConfig, GroundTruth> load_ground_truth(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open ground truth: " + path);
  std::string magic;
  int version = 0;
  is >> magic >> version;
  if (magic != "ncfr-ground-truth" || version != 1)
    throw IoError("not an ncfr-ground-truth v1 file: " + path);
  SynthConfig cfg;
  int ident = 0;
  if (!(is >> cfg.p >> cfg.q >> cfg.k_true >> cfg.n >> cfg.bernoulli_p >>
        cfg.noise_y >> cfg.noise_z >> cfg.seed >> ident))
    throw IoError("ground truth: bad header in " + path);
  cfg.identity_loadings = ident != 0;
  GroundTruth gt;
  gt.S = read_block(is, "S").cast<int>();
  gt.Z = read_block(is, "Z");
  gt.Q = read_block(is, "Q");
  gt.P = read_block(is, "P");
  gt.Ey = read_block(is, "Ey");
  gt.Ez = read_block(is, "Ez");
  return {cfg, std::move(gt)};
}

}  // namespace ncfr
