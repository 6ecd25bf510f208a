#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace ncfr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IntMatrix = Eigen::MatrixXi;
using IntVector = Eigen::VectorXi;

/// Paired input/response matrices, observations in columns.
///
/// X is p x N, Y is q x N. Columns listed in `missing` have their responses
/// treated as unobserved; X is always fully observed.
struct RegressionDataset {
  Matrix X;
  Matrix Y;
  std::vector<int> missing;  // sorted, unique, 0-based column indices

  int p() const { return static_cast<int>(X.rows()); }
  int q() const { return static_cast<int>(Y.rows()); }
  int n() const { return static_cast<int>(X.cols()); }
  int n_observed() const { return n() - static_cast<int>(missing.size()); }

  bool is_missing(int col) const;

  /// Per-column observation flags (true = response observed).
  std::vector<char> observed_mask() const;

  /// Throws StructuralError on any invariant violation.
  void validate() const;
};

/// Self-describing delimited-text container (format documented in README).
/// Values are written with 17 significant digits, so load(save(ds)) == ds
/// bit-exactly.
void save_dataset(const std::string& path, const RegressionDataset& ds);
RegressionDataset load_dataset(const std::string& path);

}  // namespace ncfr
