#include "ncfr/model.hpp"

#include <cmath>
#include <string>

#include "ncfr/errors.hpp"
#include "ncfr/gaussian.hpp"

namespace ncfr {

LatentState init_state(const RegressionDataset& data, const Hyperparams& hp,
                       int k_init, Rng& rng, MaskInit mask_init) {
  data.validate();
  hp.validate();
  if (k_init < 0) throw StructuralError("init_state: k_init must be >= 0");

  const int p = data.p(), q = data.q(), n = data.n();
  LatentState st;

  st.alpha = hp.alpha_mode == AlphaMode::sampled ? rng.gamma(hp.g, hp.h)
                                                 : hp.alpha_fixed;
  st.psi_y.resize(q);
  if (hp.noise_mode == NoiseMode::isotropic) {
    st.psi_y.setConstant(rng.inv_gamma(hp.a, hp.b));
  } else {
    for (int i = 0; i < q; ++i) st.psi_y[i] = rng.inv_gamma(hp.a, hp.b);
  }

  st.S.resize(k_init, n);
  st.psi_z.resize(k_init);
  st.psi_q.resize(k_init);
  st.psi_p.resize(k_init);
  const double shared_psi_z =
      (hp.noise_mode == NoiseMode::isotropic && k_init > 0) ? rng.inv_gamma(hp.a, hp.b) : 0.0;
  for (int j = 0; j < k_init; ++j) {
    st.psi_z[j] = hp.noise_mode == NoiseMode::isotropic ? shared_psi_z
                                                        : rng.inv_gamma(hp.a, hp.b);
    st.psi_q[j] = rng.inv_gamma(hp.c, hp.d);
    st.psi_p[j] = rng.inv_gamma(hp.c, hp.d);
    for (int col = 0; col < n; ++col)
      st.S(j, col) = (mask_init == MaskInit::all_ones) ? 1 : (rng.bernoulli(0.5) ? 1 : 0);
  }
  prune_dead_rows(st);
  const int k = st.k();

  st.P.resize(k, p);
  st.Q.resize(q, k);
  st.Z = Matrix::Zero(k, n);
  for (int j = 0; j < k; ++j) {
    const double sd_p = std::sqrt(st.psi_p[j]);
    for (int col = 0; col < p; ++col) st.P(j, col) = rng.normal(0.0, sd_p);
    const double sd_q = std::sqrt(st.psi_q[j]);
    for (int row = 0; row < q; ++row) st.Q(row, j) = rng.normal(0.0, sd_q);
  }
  for (int j = 0; j < k; ++j) {
    const double sd_z = std::sqrt(st.psi_z[j]);
    for (int col = 0; col < n; ++col) {
      if (!st.S(j, col)) continue;
      const double mean = st.P.row(j).dot(data.X.col(col));
      st.Z(j, col) = rng.normal(mean, sd_z);
    }
  }

  st.check_invariants(q, p, n);
  return st;
}

double joint_log_likelihood(const LatentState& state, const RegressionDataset& data) {
  const int n = data.n(), k = state.k();
  const std::vector<char> obs = data.observed_mask();
  const Matrix zt = state.masked_latent();
  const Matrix mean_y = state.Q * zt;     // q x N
  const Matrix mean_z = state.P * data.X; // K x N

  double ll = 0.0;
  for (int col = 0; col < n; ++col) {
    if (!obs[static_cast<size_t>(col)]) continue;
    const Vector ry = data.Y.col(col) - mean_y.col(col);
    ll += log_normal_diag(ry, state.psi_y);
    for (int j = 0; j < k; ++j) {
      if (!state.S(j, col)) continue;
      ll += log_normal_scalar(state.Z(j, col), mean_z(j, col), state.psi_z[j]);
    }
  }
  if (!std::isfinite(ll))
    throw NumericalError("joint_log_likelihood: non-finite value");
  return ll;
}

Matrix residual_y(const LatentState& state, const RegressionDataset& data) {
  return data.Y - state.Q * state.masked_latent();
}

Matrix residual_z(const LatentState& state, const RegressionDataset& data) {
  Matrix e = state.masked_latent() - state.P * data.X;
  for (int j = 0; j < state.k(); ++j)
    for (int col = 0; col < data.n(); ++col)
      if (!state.S(j, col)) e(j, col) = 0.0;
  return e;
}

Vector predict(const LatentState& state, const Vector& x) {
  if (x.size() != state.P.cols())
    throw StructuralError("predict: x length " + std::to_string(x.size()) +
                          " != p " + std::to_string(state.P.cols()));
  if (state.k() == 0) return Vector::Zero(state.Q.rows());
  return state.Q * (state.P * x);
}

Matrix predict_all(const LatentState& state, const Matrix& X) {
  if (state.k() == 0) return Matrix::Zero(state.Q.rows(), X.cols());
  return state.Q * (state.P * X);
}

Matrix predict_posterior_mean(const std::vector<LatentState>& states, const Matrix& X) {
  if (states.empty()) throw StructuralError("predict_posterior_mean: empty sample set");
  Matrix acc = predict_all(states.front(), X);
  for (size_t i = 1; i < states.size(); ++i) acc += predict_all(states[i], X);
  return acc / static_cast<double>(states.size());
}

}  // namespace ncfr
