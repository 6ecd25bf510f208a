#include "ncfr/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "ncfr/errors.hpp"

namespace ncfr {

bool RegressionDataset::is_missing(int col) const {
  return std::binary_search(missing.begin(), missing.end(), col);
}

std::vector<char> RegressionDataset::observed_mask() const {
  std::vector<char> obs(static_cast<size_t>(n()), 1);
  for (int c : missing) obs[static_cast<size_t>(c)] = 0;
  return obs;
}

void RegressionDataset::validate() const {
  if (X.cols() != Y.cols())
    throw StructuralError("dataset: X and Y column counts differ (" +
                          std::to_string(X.cols()) + " vs " + std::to_string(Y.cols()) + ")");
  if (X.rows() < 1 || Y.rows() < 1 || X.cols() < 1)
    throw StructuralError("dataset: p, q and N must all be >= 1");
  if (!X.allFinite() || !Y.allFinite())
    throw StructuralError("dataset: non-finite entry in X or Y");
  if (!std::is_sorted(missing.begin(), missing.end()))
    throw StructuralError("dataset: missing indices not sorted");
  if (std::adjacent_find(missing.begin(), missing.end()) != missing.end())
    throw StructuralError("dataset: duplicate missing index");
  for (int c : missing)
    if (c < 0 || c >= n())
      throw StructuralError("dataset: missing index " + std::to_string(c) + " out of range");
}

namespace {

void write_matrix(std::ostream& os, const Matrix& m) {
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) os << ' ';
      os << m(i, j);
    }
    os << '\n';
  }
}

Matrix read_matrix(std::istream& is, int rows, int cols, const std::string& what) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      if (!(is >> m(i, j)))
        throw IoError("dataset: truncated " + what + " block at (" + std::to_string(i) +
                      "," + std::to_string(j) + ")");
  return m;
}

}  // namespace

void save_dataset(const std::string& path, const RegressionDataset& ds) {
  ds.validate();
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  os << "ncfr-dataset 1\n";
  os << ds.p() << ' ' << ds.q() << ' ' << ds.n() << '\n';
  os << ds.missing.size();
  for (int c : ds.missing) os << ' ' << c;
  os << '\n';
  write_matrix(os, ds.X);
  write_matrix(os, ds.Y);
  if (!os.good()) throw IoError("write failed: " + path);
}

RegressionDataset load_dataset(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open dataset: " + path);
  std::string magic;
  int version = 0;
  is >> magic >> version;
  if (magic != "ncfr-dataset" || version != 1)
    throw IoError("not an ncfr-dataset v1 file: " + path);
  int p = 0, q = 0, n = 0;
  if (!(is >> p >> q >> n)) throw IoError("dataset: bad header in " + path);
  size_t n_missing = 0;
  if (!(is >> n_missing)) throw IoError("dataset: bad missing count in " + path);
  RegressionDataset ds;
  ds.missing.resize(n_missing);
  for (size_t i = 0; i < n_missing; ++i)
    if (!(is >> ds.missing[i])) throw IoError("dataset: truncated missing list in " + path);
  ds.X = read_matrix(is, p, n, "X");
  ds.Y = read_matrix(is, q, n, "Y");
  ds.validate();
  return ds;
}

}  // namespace ncfr
