#include "ncfr/ibp.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "ncfr/errors.hpp"

namespace ncfr::ibp {

double harmonic_number(int n) {
  double h = 0.0;
  for (int j = 1; j <= n; ++j) h += 1.0 / j;
  return h;
}

IbpSufficientStats compute_stats(const IntMatrix& S, int n_cols) {
  IbpSufficientStats st;
  const int k = static_cast<int>(S.rows());
  st.k_active = k;
  st.h_n = harmonic_number(n_cols);
  st.m = IntVector::Zero(k);
  for (int j = 0; j < k; ++j) {
    std::string pattern(static_cast<size_t>(n_cols), '0');
    int m = 0;
    for (int n = 0; n < n_cols; ++n) {
      if (S(j, n)) {
        pattern[static_cast<size_t>(n)] = '1';
        ++m;
      }
    }
    st.m[j] = m;
    ++st.kh_counts[pattern];
  }
  return st;
}

double mask_log_density(const IntMatrix& S, int n_cols, double alpha) {
  const IbpSufficientStats st = compute_stats(S, n_cols);
  double lp = st.k_active * std::log(alpha) - alpha * st.h_n;
  for (const auto& [pattern, count] : st.kh_counts)
    lp -= std::lgamma(static_cast<double>(count) + 1.0);
  const double lg_n1 = std::lgamma(static_cast<double>(n_cols) + 1.0);
  for (int j = 0; j < st.k_active; ++j) {
    const int m = st.m[j];
    if (m == 0)
      throw StructuralError("mask_log_density: all-zero row " + std::to_string(j));
    lp += std::lgamma(static_cast<double>(n_cols - m) + 1.0) +
          std::lgamma(static_cast<double>(m)) - lg_n1;
  }
  return lp;
}

double prior_ratio_existing(int m_others, int n_cols) {
  if (m_others < 0 || m_others > n_cols - 1)
    throw StructuralError("prior_ratio_existing: m must lie in [0, N-1], got " +
                          std::to_string(m_others));
  if (m_others == 0) return 0.0;
  return static_cast<double>(m_others) / static_cast<double>(n_cols - m_others);
}

int PoissonCount::sample(Rng& rng) const {
  int k = rng.poisson(rate);
  if (cap >= 0 && k > cap) k = cap;
  return k;
}

double PoissonCount::log_pmf(int k) const {
  if (k < 0) return -std::numeric_limits<double>::infinity();
  auto plain = [this](int j) {
    return j * std::log(rate) - rate - std::lgamma(static_cast<double>(j) + 1.0);
  };
  if (cap < 0 || k < cap) return plain(k);
  if (k > cap) return -std::numeric_limits<double>::infinity();
  // Folded tail: sum_{j >= cap} pmf(j) = pmf(cap) * sum_i prod rate/(cap+i).
  // The series converges fast for any finite rate and avoids 1 - CDF
  // cancellation at small rates.
  double series = 1.0, term = 1.0;
  for (int i = 1; i < 200; ++i) {
    term *= rate / static_cast<double>(cap + i);
    series += term;
    if (term < 1e-18 * series) break;
  }
  return plain(cap) + std::log(series);
}

PoissonCount new_feature_count_prior(double alpha, int n_total) {
  if (!(alpha > 0.0)) throw StructuralError("new_feature_count_prior: alpha <= 0");
  if (n_total < 1) throw StructuralError("new_feature_count_prior: n_total < 1");
  return PoissonCount{alpha / static_cast<double>(n_total), -1};
}

double sample_alpha(int k_active, double h_n, double g, double h, Rng& rng) {
  double draw = rng.gamma(static_cast<double>(k_active) + g, h + h_n);
  // A zero draw is possible only through underflow at extreme shapes.
  if (!(draw > 0.0)) draw = std::numeric_limits<double>::min();
  return draw;
}

IntMatrix simulate_prior_masks(double alpha, int n_cols, Rng& rng,
                               int per_customer_cap) {
  std::vector<std::vector<char>> rows;   // rows[k][i] for customers seen so far
  std::vector<int> counts;
  for (int i = 1; i <= n_cols; ++i) {
    for (size_t k = 0; k < rows.size(); ++k) {
      const bool take = rng.bernoulli(static_cast<double>(counts[k]) / i);
      rows[k].push_back(take ? 1 : 0);
      counts[k] += take ? 1 : 0;
    }
    int fresh = rng.poisson(alpha / i);
    if (per_customer_cap >= 0 && fresh > per_customer_cap) fresh = per_customer_cap;
    for (int j = 0; j < fresh; ++j) {
      std::vector<char> row(static_cast<size_t>(i), 0);
      row.back() = 1;
      rows.push_back(std::move(row));
      counts.push_back(1);
    }
  }
  IntMatrix S(static_cast<int>(rows.size()), n_cols);
  for (size_t k = 0; k < rows.size(); ++k)
    for (int n = 0; n < n_cols; ++n)
      S(static_cast<int>(k), n) = rows[k][static_cast<size_t>(n)];
  return S;
}

}  // namespace ncfr::ibp
