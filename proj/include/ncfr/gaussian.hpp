#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "ncfr/dataset.hpp"
#include "ncfr/errors.hpp"

namespace ncfr {

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;

/// log N(x | mean, var) for a scalar.
inline double log_normal_scalar(double x, double mean, double var) {
  const double r = x - mean;
  return -0.5 * (kLog2Pi + std::log(var) + r * r / var);
}

/// log N(resid | 0, diag(var)).
inline double log_normal_diag(const Vector& resid, const Vector& var) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < resid.size(); ++i)
    acc += kLog2Pi + std::log(var[i]) + resid[i] * resid[i] / var[i];
  return -0.5 * acc;
}

/// log N(resid | 0, diag(var) + u w u^T) for a rank-1 inflation, via the
/// Sherman-Morrison and matrix-determinant identities. O(dim) given the
/// diagonal base covariance.
inline double log_normal_diag_rank1(const Vector& resid, const Vector& var,
                                    const Vector& u, double w) {
  const Eigen::Index d = resid.size();
  double quad = 0.0, logdet = 0.0, utDinvr = 0.0, utDinvu = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    const double dinv = 1.0 / var[i];
    quad += resid[i] * resid[i] * dinv;
    logdet += std::log(var[i]);
    utDinvr += u[i] * resid[i] * dinv;
    utDinvu += u[i] * u[i] * dinv;
  }
  const double denom = 1.0 + w * utDinvu;
  if (!(denom > 0.0)) throw NumericalError("rank-1 Gaussian: non-PD covariance");
  quad -= w * utDinvr * utDinvr / denom;
  logdet += std::log(denom);
  return -0.5 * (static_cast<double>(d) * kLog2Pi + logdet + quad);
}

/// log N(resid | 0, diag(var) + U diag(w) U^T), rank-k inflation via the
/// Woodbury identity with a k x k capacitance solve.
inline double log_normal_diag_lowrank(const Vector& resid, const Vector& var,
                                      const Matrix& U, const Vector& w) {
  const Eigen::Index d = resid.size();
  const Eigen::Index k = U.cols();
  if (k == 0) return log_normal_diag(resid, var);
  if (k == 1) return log_normal_diag_rank1(resid, var, U.col(0), w[0]);

  Vector dinv_r(d), dinv(d);
  double quad = 0.0, logdet = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    dinv[i] = 1.0 / var[i];
    dinv_r[i] = resid[i] * dinv[i];
    quad += resid[i] * dinv_r[i];
    logdet += std::log(var[i]);
  }
  // C = diag(1/w) + U^T D^{-1} U;  det(D + UWU^T) = det(D) det(W) det(C)
  Matrix C = U.transpose() * dinv.asDiagonal() * U;
  for (Eigen::Index j = 0; j < k; ++j) C(j, j) += 1.0 / w[j];
  Eigen::LLT<Matrix> llt(C);
  if (llt.info() != Eigen::Success)
    throw NumericalError("low-rank Gaussian: capacitance not PD");
  const Vector ut_dinv_r = U.transpose() * dinv_r;
  quad -= ut_dinv_r.dot(llt.solve(ut_dinv_r));
  const Matrix& L = llt.matrixLLT();
  for (Eigen::Index j = 0; j < k; ++j) {
    logdet += 2.0 * std::log(L(j, j));
    logdet += std::log(w[j]);
  }
  return -0.5 * (static_cast<double>(d) * kLog2Pi + logdet + quad);
}

}  // namespace ncfr
