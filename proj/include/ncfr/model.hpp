#pragma once

#include <vector>

#include "ncfr/dataset.hpp"
#include "ncfr/rng.hpp"
#include "ncfr/state.hpp"

namespace ncfr {

enum class MaskInit { bernoulli_half, all_ones };

/// Draws a fresh sampler state from the model priors.
///
/// S starts as k_init i.i.d. Bernoulli(0.5) rows (dead rows pruned) or as a
/// frozen all-ones block for the fixed-K baseline. Z is drawn from its
/// conditional prior N(p_k x_n, psi_z(k)) at active positions and zeroed
/// elsewhere. Deterministic given the rng state.
LatentState init_state(const RegressionDataset& data, const Hyperparams& hp,
                       int k_init, Rng& rng,
                       MaskInit mask_init = MaskInit::bernoulli_half);

/// Joint log likelihood of the two linear-Gaussian stages over observed
/// columns:
///   sum_n log N(y_n | Q (s_n . z_n), Psi_y)
///     + sum_{k: s_kn = 1} log N(z_kn | p_k x_n, psi_z(k))
/// Inactive latent entries carry no Z term.
double joint_log_likelihood(const LatentState& state, const RegressionDataset& data);

/// E_y = Y - Q (S . Z), all columns.
Matrix residual_y(const LatentState& state, const RegressionDataset& data);

/// E_z = (S . Z) - P X with entries at inactive positions reported as 0;
/// those entries are excluded from every downstream sum (the mask is the
/// exclusion flag).
Matrix residual_z(const LatentState& state, const RegressionDataset& data);

/// Posterior-sample linear predictor: y_hat = Q P x. The mask is not applied
/// at prediction time.
Vector predict(const LatentState& state, const Vector& x);

/// Column-wise predict over a whole input block.
Matrix predict_all(const LatentState& state, const Matrix& X);

/// Mean of predict_all over a set of retained samples (off-by-default
/// alternative to single-sample prediction).
Matrix predict_posterior_mean(const std::vector<LatentState>& states, const Matrix& X);

}  // namespace ncfr
