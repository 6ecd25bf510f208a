#pragma once

#include "ncfr/dataset.hpp"
#include "ncfr/proposals.hpp"
#include "ncfr/rng.hpp"
#include "ncfr/state.hpp"

namespace ncfr::gibbs {

struct SweepOptions {
  ProposalStrategy strategy{};
  double temperature = 1.0;
  bool sample_mask = true;        // false freezes S (fixed-K baseline)
  double likelihood_weight = 1.0; // 0 drops the response terms, leaving the
                                  // prior hierarchy (statistical tests only)
};

struct SweepReport {
  long flips_attempted = 0;
  long flips_accepted = 0;  // mask entries whose value changed
  int features_born = 0;
  int features_died = 0;
  int post_sweep_k = 0;
  double sweep_seconds = 0.0;  // thread CPU seconds
};

struct ScalarMoments {
  double mean = 0.0;
  double var = 0.0;
};

struct VectorMoments {
  Vector mean;
  Matrix cov;
};

/// Marginal observation likelihood with z_kn integrated out under its prior
/// N(p_k x_n, psi_z(k)):
///   N(y_n | q_k p_k x_n + [Q z_n]_{z_kn=0}, Psi_y + q_k psi_z(k) q_k^T)
/// computed in O(q) through the rank-1 determinant/Sherman-Morrison
/// identities.
double collapsed_likelihood_active(const LatentState& state,
                                   const RegressionDataset& data, int n, int k);

/// The inactive counterpart: N(y_n | [Q z_n]_{z_kn=0}, Psi_y). Depends on
/// neither q_k nor psi_z(k).
double collapsed_likelihood_inactive(const LatentState& state,
                                     const RegressionDataset& data, int n, int k);

/// One collapsed mask-entry update: s_kn is set by a uniform draw against
/// r/(r+1) with r = r_l * r_p, and z_kn is refreshed from its conditional
/// whenever the entry lands active. Requires the feature to be active at
/// some other observation (singletons go through the birth/death move).
/// Returns the new s_kn.
bool sample_mask_entry(LatentState& state, const RegressionDataset& data,
                       int n, int k, Rng& rng);

/// Conditional posterior moments of z_kn (requires s_kn = 1).
ScalarMoments latent_weight_posterior(const LatentState& state,
                                      const RegressionDataset& data, int k, int n);
double sample_latent_weight(LatentState& state, const RegressionDataset& data,
                            int k, int n, Rng& rng);

/// Conditional posterior moments of Q(i, k) given the masked latent row.
ScalarMoments q_entry_posterior(const LatentState& state,
                                const RegressionDataset& data, int i, int k);
double sample_q_entry(LatentState& state, const RegressionDataset& data,
                      int i, int k, Rng& rng);

/// Conditional posterior of row p_k, restricted to columns with s_kn = 1:
/// precision (1/psi_p(k)) I + X_a X_a^T / psi_z(k). cov in the result is the
/// dense inverse (test-facing; the sampler itself draws through a Cholesky
/// factor of the precision).
VectorMoments p_row_posterior(const LatentState& state,
                              const RegressionDataset& data, int k);
Vector sample_p_row(LatentState& state, const RegressionDataset& data, int k,
                    Rng& rng);

/// Conjugate refresh of psi_y, psi_z, psi_q, psi_p. Isotropic mode pools the
/// noise updates into one shared draw each for psi_y and psi_z.
void sample_variances(LatentState& state, const RegressionDataset& data,
                      const Hyperparams& hp, Rng& rng,
                      double likelihood_weight = 1.0);

/// One full sweep: per observation, existing mask entries in random feature
/// order followed by the new-feature move; then all latent weights, all Q
/// entries, all P rows, the variances, and alpha.
SweepReport gibbs_sweep(LatentState& state, const RegressionDataset& data,
                        const Hyperparams& hp, const SweepOptions& opts,
                        Rng& rng);

}  // namespace ncfr::gibbs

namespace ncfr {

struct BirthResult {
  bool accepted = false;
  int born = 0;
  int died = 0;
};

/// New-feature Metropolis-Hastings move for observation n.
///
/// Proposes kappa fresh features (active only at column n) with parameters
/// drawn from their priors and weights marginalized, replacing whatever
/// singleton features the column currently holds; prior-as-proposal
/// cancellation leaves the marginal likelihood ratio plus the annealing
/// penalty and the truncation bookkeeping from propose_kappa. Under the zero
/// strategy this is a no-op (singletons then die through the sweep's death
/// path instead).
BirthResult birth_move(LatentState& state, const RegressionDataset& data, int n,
                       const Hyperparams& hp, const ProposalStrategy& strategy,
                       double temperature, Rng& rng);

}  // namespace ncfr
