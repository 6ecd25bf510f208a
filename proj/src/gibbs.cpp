#include "ncfr/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <numeric>
#include <vector>

#include "ncfr/errors.hpp"
#include "ncfr/gaussian.hpp"
#include "ncfr/ibp.hpp"

namespace ncfr::gibbs {

namespace {

double thread_cpu_seconds() {
  timespec ts{};
  clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
  return static_cast<double>(ts.tv_sec) + 1e-9 * static_cast<double>(ts.tv_nsec);
}

/// Conditional moments of one latent weight given the column residual with
/// its own contribution removed. `w` tempers the response term only.
ScalarMoments z_moments_from(const Vector& resid0, const Vector& psi_y,
                             const Vector& q_col, double prior_mean,
                             double psi_zk, double w, bool observed) {
  double qq = 0.0, qr = 0.0;
  if (observed && w > 0.0) {
    for (Eigen::Index i = 0; i < q_col.size(); ++i) {
      const double qi = q_col[i] / psi_y[i];
      qq += qi * q_col[i];
      qr += qi * resid0[i];
    }
  }
  const double var = 1.0 / (1.0 / psi_zk + w * qq);
  const double mean = var * (w * qr + prior_mean / psi_zk);
  return {mean, var};
}

/// Residual of column n with feature k's contribution removed,
/// y_n - [Q ztilde_n]_{z_kn = 0}, computed from scratch.
Vector column_residual_without(const LatentState& st, const RegressionDataset& data,
                               int n, int k) {
  Vector r = data.Y.col(n);
  for (int j = 0; j < st.k(); ++j) {
    if (j == k || !st.S(j, n)) continue;
    r -= st.Q.col(j) * st.Z(j, n);
  }
  return r;
}

int count_others(const LatentState& st, int n, int k) {
  int m = 0;
  for (int col = 0; col < st.S.cols(); ++col)
    if (col != n && st.S(k, col)) ++m;
  return m;
}

/// All mutable per-sweep caches. R = Y - Q (S.Z) is maintained over every
/// column; sums that belong to the response likelihood restrict themselves
/// to observed columns.
struct SweepContext {
  LatentState& st;
  const RegressionDataset& data;
  const Hyperparams& hp;
  const SweepOptions& opts;
  Rng& rng;

  int N, p, q;
  std::vector<char> obs;
  int n_obs = 0;
  std::vector<int> m;  // feature active counts
  Matrix Zt;           // masked latent, K x N
  Matrix R;            // Y - Q Zt, q x N
  Matrix M;            // P X, K x N
  SweepReport rep;

  SweepContext(LatentState& state, const RegressionDataset& d, const Hyperparams& hyper,
               const SweepOptions& options, Rng& r)
      : st(state), data(d), hp(hyper), opts(options), rng(r) {
    N = data.n();
    p = data.p();
    q = data.q();
    obs = data.observed_mask();
    n_obs = data.n_observed();
    const IntVector counts = st.feature_counts();
    m.assign(counts.data(), counts.data() + counts.size());
    Zt = st.masked_latent();
    R = data.Y - st.Q * Zt;
    M = st.P * data.X;
  }

  void write_ztilde(int k, int n, double z_new) {
    const double delta = z_new - Zt(k, n);
    if (delta != 0.0) R.col(n) -= st.Q.col(k) * delta;
    Zt(k, n) = z_new;
  }

  void redraw_weight(int k, int n) {
    const Vector resid0 = R.col(n) + st.Q.col(k) * Zt(k, n);
    const ScalarMoments mom =
        z_moments_from(resid0, st.psi_y, st.Q.col(k), M(k, n), st.psi_z[k],
                       opts.likelihood_weight, obs[static_cast<size_t>(n)] != 0);
    const double z = rng.normal(mom.mean, std::sqrt(mom.var));
    st.Z(k, n) = z;
    R.col(n) = resid0 - st.Q.col(k) * z;
    Zt(k, n) = z;
  }

  void mask_step(int n) {
    const int k_now = st.k();
    if (k_now == 0) return;
    std::vector<int> order(static_cast<size_t>(k_now));
    std::iota(order.begin(), order.end(), 0);
    for (int i = k_now - 1; i > 0; --i)
      std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(rng.index(i + 1))]);

    const bool observed = obs[static_cast<size_t>(n)] != 0;
    const double w = opts.likelihood_weight;
    for (int k : order) {
      const int s_cur = st.S(k, n);
      const int m_others = m[static_cast<size_t>(k)] - s_cur;
      if (m_others == 0) {
        if (opts.strategy.kind == ProposalKind::zero && s_cur == 1) {
          // Death path of the zero strategy: a feature down to its last
          // observation is retired here, pruned at the end of this
          // observation's sweep.
          st.S(k, n) = 0;
          st.Z(k, n) = 0.0;
          write_ztilde(k, n, 0.0);
          m[static_cast<size_t>(k)] = 0;
        }
        continue;
      }
      ++rep.flips_attempted;
      const double rp = ibp::prior_ratio_existing(m_others, N);
      const Vector resid0 = R.col(n) + st.Q.col(k) * Zt(k, n);
      double log_r = std::log(rp);
      if (observed && w > 0.0) {
        const double la = log_normal_diag_rank1(resid0 - st.Q.col(k) * M(k, n),
                                                st.psi_y, st.Q.col(k), st.psi_z[k]);
        const double li = log_normal_diag(resid0, st.psi_y);
        log_r += w * (la - li);
      }
      const double p_active = 1.0 / (1.0 + std::exp(-log_r));
      const bool active = rng.uniform() < p_active;
      if (active != (s_cur == 1)) ++rep.flips_accepted;
      if (active) {
        st.S(k, n) = 1;
        m[static_cast<size_t>(k)] = m_others + 1;
        const ScalarMoments mom = z_moments_from(resid0, st.psi_y, st.Q.col(k),
                                                 M(k, n), st.psi_z[k], w, observed);
        const double z = rng.normal(mom.mean, std::sqrt(mom.var));
        st.Z(k, n) = z;
        R.col(n) = resid0 - st.Q.col(k) * z;
        Zt(k, n) = z;
      } else {
        st.S(k, n) = 0;
        st.Z(k, n) = 0.0;
        m[static_cast<size_t>(k)] = m_others;
        R.col(n) = resid0;
        Zt(k, n) = 0.0;
      }
    }
  }

  void drop_rows(const std::vector<int>& rows) {
    if (rows.empty()) return;
    remove_features(st, rows);
    const int k_new = st.k();
    Matrix zt(k_new, N), mm(k_new, N);
    std::vector<int> m_new;
    m_new.reserve(static_cast<size_t>(k_new));
    std::vector<char> drop(m.size(), 0);
    for (int r : rows) drop[static_cast<size_t>(r)] = 1;
    int w = 0;
    for (size_t j = 0; j < m.size(); ++j) {
      if (drop[j]) continue;
      zt.row(w) = Zt.row(static_cast<Eigen::Index>(j));
      mm.row(w) = M.row(static_cast<Eigen::Index>(j));
      m_new.push_back(m[j]);
      ++w;
    }
    Zt = std::move(zt);
    M = std::move(mm);
    m = std::move(m_new);
  }

  void prune_dead(int n_col) {
    std::vector<int> dead;
    for (size_t j = 0; j < m.size(); ++j)
      if (m[j] == 0) dead.push_back(static_cast<int>(j));
    if (dead.empty()) return;
    // A feature can only die at the column where it was last active, so R
    // needs no adjustment: its ztilde row is already all zero.
    (void)n_col;
    rep.features_died += static_cast<int>(dead.size());
    drop_rows(dead);
  }

  void append_feature(int n, double psi_z_new, double psi_q_new, double psi_p_new,
                      const Vector& q_col, const Vector& p_row) {
    const int k_old = st.k();
    st.S.conservativeResize(k_old + 1, N);
    st.S.row(k_old).setZero();
    st.S(k_old, n) = 1;
    st.Z.conservativeResize(k_old + 1, N);
    st.Z.row(k_old).setZero();
    st.Q.conservativeResize(q, k_old + 1);
    st.Q.col(k_old) = q_col;
    st.P.conservativeResize(k_old + 1, p);
    st.P.row(k_old) = p_row.transpose();
    st.psi_z.conservativeResize(k_old + 1);
    st.psi_z[k_old] = psi_z_new;
    st.psi_q.conservativeResize(k_old + 1);
    st.psi_q[k_old] = psi_q_new;
    st.psi_p.conservativeResize(k_old + 1);
    st.psi_p[k_old] = psi_p_new;
    Zt.conservativeResize(k_old + 1, N);
    Zt.row(k_old).setZero();
    M.conservativeResize(k_old + 1, N);
    M.row(k_old) = (p_row.transpose() * data.X);
    m.push_back(1);
  }

  BirthResult singleton_move(int n) {
    BirthResult result;
    if (opts.strategy.kind == ProposalKind::zero) return result;

    std::vector<int> singles;
    for (int k = 0; k < st.k(); ++k)
      if (st.S(k, n) == 1 && m[static_cast<size_t>(k)] == 1) singles.push_back(k);
    const int kappa_old = static_cast<int>(singles.size());

    int cap = opts.strategy.kappa_max;
    if (opts.strategy.k_total_cap > 0)
      cap = std::min(cap, opts.strategy.k_total_cap - (st.k() - kappa_old));
    if (cap < 0) cap = 0;

    // Without a reverse path the move cannot balance; leave the column to
    // the per-entry updates.
    const double j_old =
        kappa_log_pmf(opts.strategy, st.alpha, N, kappa_old, cap);
    if (!std::isfinite(j_old)) return result;

    const KappaProposal prop = propose_kappa(opts.strategy, st.alpha, N, rng, cap);
    const int kappa_new = prop.kappa;

    const bool observed = obs[static_cast<size_t>(n)] != 0;
    const double w = opts.likelihood_weight;

    // Fresh parameter block, drawn from the priors (prior-as-proposal).
    Vector psi_z_new(kappa_new), psi_q_new(kappa_new), psi_p_new(kappa_new);
    Matrix q_new(q, kappa_new), p_new(kappa_new, p);
    for (int j = 0; j < kappa_new; ++j) {
      psi_z_new[j] = hp.noise_mode == NoiseMode::isotropic && st.psi_z.size() > 0
                         ? st.psi_z[0]
                         : rng.inv_gamma(hp.a, hp.b);
      psi_q_new[j] = rng.inv_gamma(hp.c, hp.d);
      psi_p_new[j] = rng.inv_gamma(hp.c, hp.d);
      const double sd_q = std::sqrt(psi_q_new[j]);
      for (int i = 0; i < q; ++i) q_new(i, j) = rng.normal(0.0, sd_q);
      const double sd_p = std::sqrt(psi_p_new[j]);
      for (int i = 0; i < p; ++i) p_new(j, i) = rng.normal(0.0, sd_p);
    }

    // Residual with the current singleton block stripped out.
    Vector base = R.col(n);
    for (int k : singles) base += st.Q.col(k) * Zt(k, n);

    double log_r = 0.0;
    if (observed && w > 0.0) {
      double log_num, log_den;
      if (kappa_new > 0) {
        const Vector resid_new = base - q_new * (p_new * data.X.col(n));
        log_num = log_normal_diag_lowrank(resid_new, st.psi_y, q_new, psi_z_new);
      } else {
        log_num = log_normal_diag(base, st.psi_y);
      }
      if (kappa_old > 0) {
        Matrix q_old(q, kappa_old);
        Vector psi_old(kappa_old);
        Vector resid_old = base;
        for (int idx = 0; idx < kappa_old; ++idx) {
          const int k = singles[static_cast<size_t>(idx)];
          q_old.col(idx) = st.Q.col(k);
          psi_old[idx] = st.psi_z[k];
          resid_old -= st.Q.col(k) * M(k, n);
        }
        log_den = log_normal_diag_lowrank(resid_old, st.psi_y, q_old, psi_old);
      } else {
        log_den = log_normal_diag(base, st.psi_y);
      }
      log_r += w * (log_num - log_den);
    }
    if (opts.strategy.kind == ProposalKind::simulated_annealing)
      log_r -= static_cast<double>(kappa_new) / opts.temperature;
    if (opts.strategy.kind == ProposalKind::plain_prior ||
        opts.strategy.kind == ProposalKind::simulated_annealing) {
      // Truncation bookkeeping: the model prior on the count stays the full
      // Poisson(alpha/N) while the proposal folds its tail at the cap.
      const ibp::PoissonCount prior = ibp::new_feature_count_prior(st.alpha, N);
      log_r += (prior.log_pmf(kappa_new) - prop.log_prob) -
               (prior.log_pmf(kappa_old) - j_old);
    }

    result.accepted = rng.uniform() < std::exp(log_r);
    if (!result.accepted) {
      // The ratio marginalized the old singleton weights; refresh them from
      // their conditionals so the remainder of the sweep sees draws from the
      // current joint.
      for (int k : singles) redraw_weight(k, n);
      return result;
    }

    if (kappa_old > 0) {
      drop_rows(singles);
      R.col(n) = base;
      rep.features_died += kappa_old;
      result.died = kappa_old;
    }
    for (int j = 0; j < kappa_new; ++j) {
      append_feature(n, psi_z_new[j], psi_q_new[j], psi_p_new[j], q_new.col(j),
                     Vector(p_new.row(j).transpose()));
      const int kj = st.k() - 1;
      const ScalarMoments mom =
          z_moments_from(R.col(n), st.psi_y, st.Q.col(kj), M(kj, n),
                         st.psi_z[kj], w, observed);
      const double z = rng.normal(mom.mean, std::sqrt(mom.var));
      st.Z(kj, n) = z;
      Zt(kj, n) = z;
      R.col(n) -= st.Q.col(kj) * z;
    }
    rep.features_born += kappa_new;
    result.born = kappa_new;
    return result;
  }

  void weight_phase() {
    for (int k = 0; k < st.k(); ++k)
      for (int n = 0; n < N; ++n)
        if (st.S(k, n)) redraw_weight(k, n);
  }

  void q_phase() {
    const double w = opts.likelihood_weight;
    for (int k = 0; k < st.k(); ++k) {
      double szz = 0.0;
      for (int n = 0; n < N; ++n)
        if (obs[static_cast<size_t>(n)]) szz += Zt(k, n) * Zt(k, n);
      for (int i = 0; i < q; ++i) {
        double num = 0.0;
        for (int n = 0; n < N; ++n)
          if (obs[static_cast<size_t>(n)]) num += R(i, n) * Zt(k, n);
        num += st.Q(i, k) * szz;
        const double denom = st.psi_y[i] + w * st.psi_q[k] * szz;
        const double var = st.psi_q[k] * st.psi_y[i] / denom;
        const double mean = w * st.psi_q[k] * num / denom;
        const double draw = rng.normal(mean, std::sqrt(var));
        const double delta = draw - st.Q(i, k);
        if (delta != 0.0)
          for (int n = 0; n < N; ++n) R(i, n) -= delta * Zt(k, n);
        st.Q(i, k) = draw;
      }
    }
  }

  void p_phase() {
    for (int k = 0; k < st.k(); ++k) {
      const int mk = m[static_cast<size_t>(k)];
      Matrix xa(p, mk);
      Vector za(mk);
      int w = 0;
      for (int n = 0; n < N; ++n) {
        if (!st.S(k, n)) continue;
        xa.col(w) = data.X.col(n);
        za[w] = st.Z(k, n);
        ++w;
      }
      Matrix lambda = (xa * xa.transpose()) / st.psi_z[k];
      lambda.diagonal().array() += 1.0 / st.psi_p[k];
      Eigen::LLT<Matrix> llt(lambda);
      if (llt.info() != Eigen::Success)
        throw NumericalError("p row update: precision factorization failed");
      const Vector mu = llt.solve(xa * za / st.psi_z[k]);
      Vector eps(p);
      for (int i = 0; i < p; ++i) eps[i] = rng.normal();
      st.P.row(k) = (mu + llt.matrixU().solve(eps)).transpose();
    }
  }

  void variance_phase() { sample_variances(st, data, hp, rng, opts.likelihood_weight); }

  void alpha_phase() {
    if (hp.alpha_mode != AlphaMode::sampled) return;
    st.alpha = ibp::sample_alpha(st.k(), ibp::harmonic_number(N), hp.g, hp.h, rng);
  }

  SweepReport run() {
    const double t0 = thread_cpu_seconds();
    if (opts.sample_mask) {
      for (int n = 0; n < N; ++n) {
        mask_step(n);
        singleton_move(n);
        prune_dead(n);
      }
    }
    weight_phase();
    q_phase();
    p_phase();
    variance_phase();
    alpha_phase();
    rep.post_sweep_k = st.k();
    rep.sweep_seconds = thread_cpu_seconds() - t0;
    return rep;
  }
};

}  // namespace

double collapsed_likelihood_active(const LatentState& state,
                                   const RegressionDataset& data, int n, int k) {
  const Vector resid0 = column_residual_without(state, data, n, k);
  const double mu0 = state.P.row(k).dot(data.X.col(n));
  return log_normal_diag_rank1(resid0 - state.Q.col(k) * mu0, state.psi_y,
                               state.Q.col(k), state.psi_z[k]);
}

double collapsed_likelihood_inactive(const LatentState& state,
                                     const RegressionDataset& data, int n, int k) {
  return log_normal_diag(column_residual_without(state, data, n, k), state.psi_y);
}

bool sample_mask_entry(LatentState& state, const RegressionDataset& data,
                       int n, int k, Rng& rng) {
  const int m_others = count_others(state, n, k);
  if (m_others == 0)
    throw StructuralError(
        "sample_mask_entry: feature active only at this observation belongs "
        "to the birth/death move");
  const double rp = ibp::prior_ratio_existing(m_others, data.n());
  double log_r = std::log(rp);
  if (!data.is_missing(n))
    log_r += collapsed_likelihood_active(state, data, n, k) -
             collapsed_likelihood_inactive(state, data, n, k);
  const double p_active = 1.0 / (1.0 + std::exp(-log_r));
  const bool active = rng.uniform() < p_active;
  if (active) {
    state.S(k, n) = 1;
    state.Z(k, n) = sample_latent_weight(state, data, k, n, rng);
  } else {
    state.S(k, n) = 0;
    state.Z(k, n) = 0.0;
  }
  return active;
}

ScalarMoments latent_weight_posterior(const LatentState& state,
                                      const RegressionDataset& data, int k, int n) {
  if (!state.S(k, n))
    throw StructuralError("latent_weight_posterior: entry is inactive");
  const Vector resid0 = column_residual_without(state, data, n, k);
  const double mu0 = state.P.row(k).dot(data.X.col(n));
  return z_moments_from(resid0, state.psi_y, state.Q.col(k), mu0, state.psi_z[k],
                        1.0, !data.is_missing(n));
}

double sample_latent_weight(LatentState& state, const RegressionDataset& data,
                            int k, int n, Rng& rng) {
  const ScalarMoments mom = latent_weight_posterior(state, data, k, n);
  const double z = rng.normal(mom.mean, std::sqrt(mom.var));
  state.Z(k, n) = z;
  return z;
}

ScalarMoments q_entry_posterior(const LatentState& state,
                                const RegressionDataset& data, int i, int k) {
  const std::vector<char> obs = data.observed_mask();
  double szz = 0.0, num = 0.0;
  for (int n = 0; n < data.n(); ++n) {
    if (!obs[static_cast<size_t>(n)]) continue;
    double zt = state.S(k, n) ? state.Z(k, n) : 0.0;
    if (zt == 0.0) continue;
    double resid = data.Y(i, n);
    for (int j = 0; j < state.k(); ++j) {
      if (j == k || !state.S(j, n)) continue;
      resid -= state.Q(i, j) * state.Z(j, n);
    }
    szz += zt * zt;
    num += resid * zt;
  }
  const double denom = state.psi_y[i] + state.psi_q[k] * szz;
  return {state.psi_q[k] * num / denom, state.psi_q[k] * state.psi_y[i] / denom};
}

double sample_q_entry(LatentState& state, const RegressionDataset& data,
                      int i, int k, Rng& rng) {
  const ScalarMoments mom = q_entry_posterior(state, data, i, k);
  const double draw = rng.normal(mom.mean, std::sqrt(mom.var));
  state.Q(i, k) = draw;
  return draw;
}

VectorMoments p_row_posterior(const LatentState& state,
                              const RegressionDataset& data, int k) {
  const int p = data.p();
  int mk = 0;
  for (int n = 0; n < data.n(); ++n) mk += state.S(k, n);
  if (mk == 0) throw StructuralError("p_row_posterior: feature has no active column");
  Matrix xa(p, mk);
  Vector za(mk);
  int w = 0;
  for (int n = 0; n < data.n(); ++n) {
    if (!state.S(k, n)) continue;
    xa.col(w) = data.X.col(n);
    za[w] = state.Z(k, n);
    ++w;
  }
  Matrix lambda = (xa * xa.transpose()) / state.psi_z[k];
  lambda.diagonal().array() += 1.0 / state.psi_p[k];
  Eigen::LLT<Matrix> llt(lambda);
  if (llt.info() != Eigen::Success)
    throw NumericalError("p_row_posterior: precision factorization failed");
  VectorMoments out;
  out.mean = llt.solve(xa * za / state.psi_z[k]);
  out.cov = llt.solve(Matrix::Identity(p, p));
  return out;
}

Vector sample_p_row(LatentState& state, const RegressionDataset& data, int k,
                    Rng& rng) {
  const int p = data.p();
  int mk = 0;
  for (int n = 0; n < data.n(); ++n) mk += state.S(k, n);
  if (mk == 0) throw StructuralError("sample_p_row: feature has no active column");
  Matrix xa(p, mk);
  Vector za(mk);
  int w = 0;
  for (int n = 0; n < data.n(); ++n) {
    if (!state.S(k, n)) continue;
    xa.col(w) = data.X.col(n);
    za[w] = state.Z(k, n);
    ++w;
  }
  Matrix lambda = (xa * xa.transpose()) / state.psi_z[k];
  lambda.diagonal().array() += 1.0 / state.psi_p[k];
  Eigen::LLT<Matrix> llt(lambda);
  if (llt.info() != Eigen::Success)
    throw NumericalError("sample_p_row: precision factorization failed");
  const Vector mu = llt.solve(xa * za / state.psi_z[k]);
  Vector eps(p);
  for (int i = 0; i < p; ++i) eps[i] = rng.normal();
  const Vector draw = mu + llt.matrixU().solve(eps);
  state.P.row(k) = draw.transpose();
  return draw;
}

void sample_variances(LatentState& state, const RegressionDataset& data,
                      const Hyperparams& hp, Rng& rng, double likelihood_weight) {
  const double w = likelihood_weight;
  const std::vector<char> obs = data.observed_mask();
  const int n_obs = data.n_observed();
  const int q = data.q();
  const int k = state.k();
  const Matrix ey = data.Y - state.Q * state.masked_latent();
  const Matrix mz = k > 0 ? Matrix(state.P * data.X) : Matrix(0, data.n());

  Vector sse_y = Vector::Zero(q);
  for (int n = 0; n < data.n(); ++n) {
    if (!obs[static_cast<size_t>(n)]) continue;
    sse_y += ey.col(n).cwiseAbs2();
  }
  if (hp.noise_mode == NoiseMode::isotropic) {
    const double draw =
        rng.inv_gamma(hp.a + w * 0.5 * q * n_obs, hp.b + w * 0.5 * sse_y.sum());
    state.psi_y.setConstant(draw);
  } else {
    for (int i = 0; i < q; ++i)
      state.psi_y[i] = rng.inv_gamma(hp.a + w * 0.5 * n_obs, hp.b + w * 0.5 * sse_y[i]);
  }

  Vector sse_z = Vector::Zero(std::max(k, 1));
  IntVector mk = IntVector::Zero(std::max(k, 1));
  for (int j = 0; j < k; ++j) {
    for (int n = 0; n < data.n(); ++n) {
      if (!state.S(j, n)) continue;
      const double e = state.Z(j, n) - mz(j, n);
      sse_z[j] += e * e;
      ++mk[j];
    }
  }
  if (hp.noise_mode == NoiseMode::isotropic) {
    if (k > 0) {
      const double total_m = static_cast<double>(mk.head(k).sum());
      const double draw =
          rng.inv_gamma(hp.a + 0.5 * total_m, hp.b + 0.5 * sse_z.head(k).sum());
      state.psi_z.setConstant(draw);
    }
  } else {
    for (int j = 0; j < k; ++j)
      state.psi_z[j] = rng.inv_gamma(hp.a + 0.5 * mk[j], hp.b + 0.5 * sse_z[j]);
  }

  for (int j = 0; j < k; ++j) {
    state.psi_q[j] =
        rng.inv_gamma(hp.c + 0.5 * q, hp.d + 0.5 * state.Q.col(j).squaredNorm());
    state.psi_p[j] =
        rng.inv_gamma(hp.c + 0.5 * data.p(), hp.d + 0.5 * state.P.row(j).squaredNorm());
  }
}

SweepReport gibbs_sweep(LatentState& state, const RegressionDataset& data,
                        const Hyperparams& hp, const SweepOptions& opts,
                        Rng& rng) {
  opts.strategy.validate();
  SweepContext ctx(state, data, hp, opts, rng);
  return ctx.run();
}

}  // namespace ncfr::gibbs

namespace ncfr {

BirthResult birth_move(LatentState& state, const RegressionDataset& data, int n,
                       const Hyperparams& hp, const ProposalStrategy& strategy,
                       double temperature, Rng& rng) {
  gibbs::SweepOptions opts;
  opts.strategy = strategy;
  opts.temperature = temperature;
  gibbs::SweepContext ctx(state, data, hp, opts, rng);
  return ctx.singleton_move(n);
}

}  // namespace ncfr
