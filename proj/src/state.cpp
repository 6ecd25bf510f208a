#include "ncfr/state.hpp"

#include <string>
#include <vector>

#include "ncfr/errors.hpp"

namespace ncfr {

void Hyperparams::validate() const {
  auto pos = [](double v, const char* name) {
    if (!(v > 0.0))
      throw StructuralError(std::string("hyperparams: ") + name + " must be > 0");
  };
  pos(a, "a");
  pos(b, "b");
  pos(c, "c");
  pos(d, "d");
  pos(g, "g");
  pos(h, "h");
  if (alpha_mode == AlphaMode::fixed) pos(alpha_fixed, "alpha_fixed");
}

IntVector LatentState::feature_counts() const {
  return S.rowwise().sum();
}

Matrix LatentState::masked_latent() const {
  return S.cast<double>().cwiseProduct(Z);
}

void LatentState::check_invariants(int q_dim, int p_dim, int n_cols) const {
  const int kk = k();
  auto fail = [](const std::string& msg) { throw StructuralError("state: " + msg); };
  if (S.cols() != n_cols && kk > 0) fail("S column count != N");
  if (Z.rows() != kk || (kk > 0 && Z.cols() != n_cols)) fail("Z shape inconsistent with K x N");
  if (Q.rows() != q_dim || Q.cols() != kk) fail("Q shape != q x K");
  if (P.rows() != kk || P.cols() != p_dim) fail("P shape != K x p");
  if (psi_y.size() != q_dim) fail("psi_y length != q");
  if (psi_z.size() != kk || psi_q.size() != kk || psi_p.size() != kk)
    fail("per-feature variance length != K");
  if (!(alpha > 0.0)) fail("alpha must be > 0");
  for (int i = 0; i < q_dim; ++i)
    if (!(psi_y[i] > 0.0)) fail("psi_y not strictly positive");
  for (int j = 0; j < kk; ++j) {
    if (!(psi_z[j] > 0.0) || !(psi_q[j] > 0.0) || !(psi_p[j] > 0.0))
      fail("per-feature variance not strictly positive");
    int m = 0;
    for (int n = 0; n < S.cols(); ++n) {
      const int s = S(j, n);
      if (s != 0 && s != 1) fail("S entry outside {0,1}");
      m += s;
    }
    if (m == 0) fail("dead row " + std::to_string(j) + " (m_k = 0) not pruned");
  }
  if (!Z.allFinite() || !Q.allFinite() || !P.allFinite()) fail("non-finite entry");
}

void remove_features(LatentState& state, const std::vector<int>& rows) {
  if (rows.empty()) return;
  const int k_old = state.k();
  const int k_new = k_old - static_cast<int>(rows.size());
  std::vector<char> drop(static_cast<size_t>(k_old), 0);
  for (int r : rows) drop[static_cast<size_t>(r)] = 1;

  IntMatrix s(k_new, state.S.cols());
  Matrix z(k_new, state.Z.cols());
  Matrix q(state.Q.rows(), k_new);
  Matrix p(k_new, state.P.cols());
  Vector pz(k_new), pq(k_new), pp(k_new);
  int w = 0;
  for (int j = 0; j < k_old; ++j) {
    if (drop[static_cast<size_t>(j)]) continue;
    s.row(w) = state.S.row(j);
    z.row(w) = state.Z.row(j);
    q.col(w) = state.Q.col(j);
    p.row(w) = state.P.row(j);
    pz[w] = state.psi_z[j];
    pq[w] = state.psi_q[j];
    pp[w] = state.psi_p[j];
    ++w;
  }
  state.S = std::move(s);
  state.Z = std::move(z);
  state.Q = std::move(q);
  state.P = std::move(p);
  state.psi_z = std::move(pz);
  state.psi_q = std::move(pq);
  state.psi_p = std::move(pp);
}

int prune_dead_rows(LatentState& state) {
  std::vector<int> dead;
  const IntVector m = state.feature_counts();
  for (int j = 0; j < state.k(); ++j)
    if (m[j] == 0) dead.push_back(j);
  remove_features(state, dead);
  return static_cast<int>(dead.size());
}

}  // namespace ncfr
