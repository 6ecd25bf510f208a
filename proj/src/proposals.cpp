#include "ncfr/proposals.hpp"

#include <algorithm>
#include <cmath>

#include "ncfr/errors.hpp"
#include "ncfr/gaussian.hpp"
#include "ncfr/ibp.hpp"

namespace ncfr {

void ProposalStrategy::validate() const {
  if (spike_weight < 0.0 || spike_weight > 1.0)
    throw StructuralError("strategy: spike_weight outside [0,1]");
  if (kind != ProposalKind::zero && kappa_max < 1)
    throw StructuralError("strategy: kappa_max must be >= 1");
  if (k_total_cap < 0) throw StructuralError("strategy: k_total_cap < 0");
}

void AnnealSchedule::validate() const {
  if (!(t_floor > 0.0)) throw StructuralError("schedule: t_floor must be > 0");
  if (!(t0 >= t_floor)) throw StructuralError("schedule: t0 must be >= t_floor");
  if (!(cool > 0.0 && cool <= 1.0)) throw StructuralError("schedule: cool outside (0,1]");
}

double temperature_at(const AnnealSchedule& schedule, long iteration) {
  if (iteration < 0) throw StructuralError("temperature_at: negative iteration");
  return std::max(schedule.t_floor, schedule.t0 * std::pow(schedule.cool, iteration));
}

KappaProposal propose_kappa(const ProposalStrategy& strategy, double alpha,
                            int n_total, Rng& rng, int cap_override) {
  strategy.validate();
  switch (strategy.kind) {
    case ProposalKind::zero:
      return {0, 0.0};
    case ProposalKind::spike_slab: {
      int cap = cap_override >= 0 ? cap_override : strategy.kappa_max;
      if (cap == 0) return {0, 0.0};
      const bool spike = rng.bernoulli(strategy.spike_weight);
      const int kappa = spike ? 0 : 1;
      return {kappa, kappa_log_pmf(strategy, alpha, n_total, kappa, cap_override)};
    }
    case ProposalKind::plain_prior:
    case ProposalKind::simulated_annealing: {
      int cap = cap_override >= 0 ? std::min(cap_override, strategy.kappa_max)
                                  : strategy.kappa_max;
      ibp::PoissonCount prop{alpha / static_cast<double>(n_total), cap};
      const int kappa = prop.sample(rng);
      return {kappa, prop.log_pmf(kappa)};
    }
  }
  throw StructuralError("propose_kappa: unknown kind");
}

double kappa_log_pmf(const ProposalStrategy& strategy, double alpha, int n_total,
                     int kappa, int cap_override) {
  switch (strategy.kind) {
    case ProposalKind::zero:
      return kappa == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    case ProposalKind::spike_slab: {
      int cap = cap_override >= 0 ? cap_override : strategy.kappa_max;
      if (cap == 0) return kappa == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
      if (kappa == 0) return std::log(strategy.spike_weight);
      if (kappa == 1) return std::log1p(-strategy.spike_weight);
      return -std::numeric_limits<double>::infinity();
    }
    case ProposalKind::plain_prior:
    case ProposalKind::simulated_annealing: {
      int cap = cap_override >= 0 ? std::min(cap_override, strategy.kappa_max)
                                  : strategy.kappa_max;
      ibp::PoissonCount prop{alpha / static_cast<double>(n_total), cap};
      return prop.log_pmf(kappa);
    }
  }
  throw StructuralError("kappa_log_pmf: unknown kind");
}

double birth_acceptance_log_ratio(const LatentState& state,
                                  const RegressionDataset& data, int n,
                                  const Matrix& q_new, const Matrix& p_new,
                                  const Vector& psi_z_new, ProposalKind kind,
                                  double temperature) {
  const int kappa = static_cast<int>(q_new.cols());
  if (kappa == 0)
    throw StructuralError("birth_acceptance_log_ratio: kappa must be >= 1");
  if (p_new.rows() != kappa || psi_z_new.size() != kappa)
    throw StructuralError("birth_acceptance_log_ratio: kappa blocks disagree");

  const Vector base = data.Y.col(n) - state.Q * state.masked_latent().col(n);
  const Vector mean_new = q_new * (p_new * data.X.col(n));

  const double log_nr =
      log_normal_diag_lowrank(base - mean_new, state.psi_y, q_new, psi_z_new);
  const double log_dr = log_normal_diag(base, state.psi_y);

  double lr = log_nr - log_dr;
  if (kind == ProposalKind::simulated_annealing)
    lr -= static_cast<double>(kappa) / temperature;
  if (!std::isfinite(lr))
    throw NumericalError("birth_acceptance_log_ratio: non-finite ratio");
  return lr;
}

}  // namespace ncfr
