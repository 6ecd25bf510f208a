#pragma once

#include <vector>

#include "ncfr/dataset.hpp"
#include "ncfr/rng.hpp"
#include "ncfr/state.hpp"

namespace ncfr {

/// Penalized full-rank regression over the observed columns:
///   R = Y X^T (X X^T + ridge I)^{-1}
/// solved through an LDLT factorization. ridge = 0 is allowed only when
/// X X^T is well conditioned; a near-singular system raises NumericalError
/// advising ridge > 0.
Matrix fit_frr(const RegressionDataset& data, double ridge);

/// Data-scaled default penalty, 1e-6 * trace(X X^T) / p.
double frr_default_ridge(const RegressionDataset& data);

/// Fixed-K conditional factor regression: the gibbs sweep with the mask
/// frozen to all ones. No mask sampling, no birth moves, no pruning; every
/// returned state has K = k_fixed.
std::vector<LatentState> fit_cfr(const RegressionDataset& data, int k_fixed,
                                 const Hyperparams& hp, int iterations, Rng& rng);

}  // namespace ncfr
