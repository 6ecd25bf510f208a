#pragma once

#include "ncfr/dataset.hpp"
#include "ncfr/rng.hpp"
#include "ncfr/state.hpp"

namespace ncfr {

enum class ProposalKind { plain_prior, simulated_annealing, spike_slab, zero };

/// Candidate function for the per-observation new-feature count.
struct ProposalStrategy {
  ProposalKind kind = ProposalKind::simulated_annealing;
  double spike_weight = 0.5;  // P(kappa = 0) under spike_slab
  int kappa_max = 5;          // per-move cap; Poisson tail mass folds into it
  int k_total_cap = 0;        // 0 = unbounded; > 0 bounds total K (toy models)

  void validate() const;
};

/// Multiplicative cooling with a floor: T(i) = max(T_floor, T0 * cool^i).
struct AnnealSchedule {
  double t0 = 1000.0;
  double cool = 0.9;
  double t_floor = 1e-3;

  void validate() const;
};

double temperature_at(const AnnealSchedule& schedule, long iteration);

struct KappaProposal {
  int kappa = 0;
  double log_prob = 0.0;  // log proposal pmf at kappa, truncation included
};

/// Draws the proposed new-feature count for one observation.
///   plain_prior / simulated_annealing: Poisson(alpha / N) folded at the cap
///   spike_slab: 0 with probability spike_weight, else 1
///   zero: always 0
/// `cap_override` (>= 0) tightens the fold point below kappa_max; the sweep
/// uses it to honor k_total_cap.
KappaProposal propose_kappa(const ProposalStrategy& strategy, double alpha,
                            int n_total, Rng& rng, int cap_override = -1);

/// Log proposal pmf without drawing (ratio bookkeeping for reverse moves).
double kappa_log_pmf(const ProposalStrategy& strategy, double alpha, int n_total,
                     int kappa, int cap_override = -1);

/// Log acceptance ratio of a birth proposing `kappa` new features at
/// observation n, with their latent weights marginalized:
///   log r = [-kappa / T under simulated_annealing]
///           + log N(y_n | Q' P' x_n + m0, Psi_y + Q' diag(psi_z') Q'^T)
///           - log N(y_n | m0, Psi_y)
/// where m0 is the现 mean contribution of the existing features,
/// Q' = q_new (q x kappa), P' = p_new (kappa x p) and psi_z_new their fresh
/// prior variances. Assumes the column currently has no singleton features
/// (the sweep's generalized move handles that case). Throws on kappa = 0.
double birth_acceptance_log_ratio(const LatentState& state,
                                  const RegressionDataset& data, int n,
                                  const Matrix& q_new, const Matrix& p_new,
                                  const Vector& psi_z_new, ProposalKind kind,
                                  double temperature);

}  // namespace ncfr
