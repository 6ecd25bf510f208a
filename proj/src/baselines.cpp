#include "ncfr/baselines.hpp"

#include <cmath>

#include "ncfr/errors.hpp"
#include "ncfr/gibbs.hpp"
#include "ncfr/model.hpp"

namespace ncfr {

namespace {

/// X and Y restricted to columns with an observed response.
std::pair<Matrix, Matrix> complete_cases(const RegressionDataset& data) {
  const std::vector<char> obs = data.observed_mask();
  const int n_obs = data.n_observed();
  Matrix x(data.p(), n_obs), y(data.q(), n_obs);
  int w = 0;
  for (int n = 0; n < data.n(); ++n) {
    if (!obs[static_cast<size_t>(n)]) continue;
    x.col(w) = data.X.col(n);
    y.col(w) = data.Y.col(n);
    ++w;
  }
  return {std::move(x), std::move(y)};
}

}  // namespace

double frr_default_ridge(const RegressionDataset& data) {
  return 1e-6 * data.X.cwiseAbs2().sum() / data.p();
}

Matrix fit_frr(const RegressionDataset& data, double ridge) {
  data.validate();
  if (ridge < 0.0) throw StructuralError("fit_frr: ridge must be >= 0");
  auto [x, y] = complete_cases(data);
  if (x.cols() < 1) throw StructuralError("fit_frr: no observed columns");

  Matrix gram = x * x.transpose();
  gram.diagonal().array() += ridge;
  Eigen::LDLT<Matrix> ldlt(gram);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().minCoeff() <= 1e-12 * ldlt.vectorD().maxCoeff())
    throw NumericalError(
        "fit_frr: X X^T is singular or near-singular; pass ridge > 0");
  // R = Y X^T G^{-1}  computed as (G^{-1} X Y^T)^T.
  return ldlt.solve(x * y.transpose()).transpose();
}

std::vector<LatentState> fit_cfr(const RegressionDataset& data, int k_fixed,
                                 const Hyperparams& hp, int iterations, Rng& rng) {
  if (k_fixed < 1) throw StructuralError("fit_cfr: k_fixed must be >= 1");
  LatentState state = init_state(data, hp, k_fixed, rng, MaskInit::all_ones);
  gibbs::SweepOptions opts;
  opts.sample_mask = false;
  std::vector<LatentState> chain;
  chain.reserve(static_cast<size_t>(iterations));
  for (int it = 0; it < iterations; ++it) {
    gibbs::gibbs_sweep(state, data, hp, opts, rng);
    chain.push_back(state);
  }
  return chain;
}

}  // namespace ncfr
