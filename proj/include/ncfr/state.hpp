#pragma once

#include <Eigen/Dense>

#include "ncfr/dataset.hpp"

namespace ncfr {

enum class NoiseMode { isotropic, diagonal };
enum class AlphaMode { fixed, sampled };

/// Fixed shape/rate constants of the conjugate priors, plus the two model
/// mode switches. Gamma and inverse-gamma both use the shape/rate convention
/// (inverse-gamma rate doubles as its scale parameter).
struct Hyperparams {
  double a = 1.0, b = 1.0;  // IG prior on noise variances psi_y, psi_z
  double c = 1.0, d = 1.0;  // IG prior on load variances psi_q, psi_p
  double g = 1.0, h = 1.0;  // Gamma prior on alpha
  NoiseMode noise_mode = NoiseMode::diagonal;
  AlphaMode alpha_mode = AlphaMode::sampled;
  double alpha_fixed = 1.0;  // used when alpha_mode == fixed

  void validate() const;
};

/// One full sampler state.
///
/// S is the K x N binary mask, Z the latent weights, Q (q x K) and P (K x p)
/// the load factor matrices. Z entries at inactive mask positions are storage
/// only: they carry no likelihood and are redrawn from the conditional on
/// activation.
struct LatentState {
  IntMatrix S;   // K x N, entries in {0,1}, no all-zero rows
  Matrix Z;      // K x N
  Matrix Q;      // q x K
  Matrix P;      // K x p
  Vector psi_y;  // q, strictly positive
  Vector psi_z;  // K
  Vector psi_q;  // K
  Vector psi_p;  // K
  double alpha = 1.0;

  int k() const { return static_cast<int>(S.rows()); }

  /// Active count m_k per feature.
  IntVector feature_counts() const;

  /// Masked latent layer S (.)  Z.
  Matrix masked_latent() const;

  /// Throws StructuralError when any shape/positivity invariant is broken.
  void check_invariants(int q_dim, int p_dim, int n_cols) const;
};

/// Removes features with m_k = 0 from all per-feature blocks. Returns the
/// number of rows removed.
int prune_dead_rows(LatentState& state);

/// Removes an explicit set of feature indices (sorted ascending).
void remove_features(LatentState& state, const std::vector<int>& rows);

}  // namespace ncfr
