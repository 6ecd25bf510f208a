#pragma once

#include <map>
#include <string>

#include "ncfr/dataset.hpp"
#include "ncfr/rng.hpp"

namespace ncfr::ibp {

/// N-th harmonic number, sum_{j=1..N} 1/j.
double harmonic_number(int n);

/// Per-mask sufficient statistics for the buffet-process density and the
/// alpha update.
struct IbpSufficientStats {
  IntVector m;        // active count per feature
  int k_active = 0;   // number of retained (nonzero) features
  double h_n = 0.0;   // harmonic number of the column count
  std::map<std::string, int> kh_counts;  // row-pattern multiplicities
};

IbpSufficientStats compute_stats(const IntMatrix& S, int n_cols);

/// Log density of a binary mask under the buffet-process prior with strength
/// alpha:
///   P(S) = alpha^K / prod_h K_h! * exp(-alpha H_N)
///          * prod_k (N - m_k)! (m_k - 1)! / N!
/// All factorials go through lgamma. Throws StructuralError on an all-zero
/// row.
double mask_log_density(const IntMatrix& S, int n_cols, double alpha);

/// Prior odds of keeping feature k active at one observation, given the
/// other N-1 mask entries of that feature:
///   r_p = m / (N - m),   equivalent to P(active | rest) = m / N
/// with m the number of *other* observations using the feature. Returns 0 at
/// m = 0 (that case is routed to the singleton move, not this ratio).
/// Requires 0 <= m <= N-1.
double prior_ratio_existing(int m_others, int n_cols);

/// Poisson distribution over the number of new features for one observation,
/// optionally truncated by folding the tail mass into `cap` (cap < 0 means
/// untruncated). Rate is alpha / n_total.
struct PoissonCount {
  double rate = 0.0;
  int cap = -1;

  int sample(Rng& rng) const;
  double log_pmf(int k) const;
};

PoissonCount new_feature_count_prior(double alpha, int n_total);

/// Conjugate alpha draw: Gamma(K + g, h + H_N) in shape/rate form.
double sample_alpha(int k_active, double h_n, double g, double h, Rng& rng);

/// Sequential buffet simulation: customer i takes existing dish k with
/// probability m_k / i, then Poisson(alpha / i) new dishes (folded at
/// per_customer_cap when >= 0). Returns a mask with no dead rows. Used by
/// statistical tests and the forward half of the Geweke check.
IntMatrix simulate_prior_masks(double alpha, int n_cols, Rng& rng,
                               int per_customer_cap = -1);

}  // namespace ncfr::ibp
