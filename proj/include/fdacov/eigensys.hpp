#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fdacov/covest.hpp"

namespace fdacov {

// L2 eigen-decomposition of a fitted covariance: values zeta_k with
// eigenfunctions phi_k(.) = coeffs.col(k)^T z(.) over the kernel sections at
// the anchors. fve holds cumulative |zeta| shares.
struct EigenSystem {
  Eigen::VectorXd values;   // descending; magnitudes above 1e-10 * max|zeta|
  Eigen::MatrixXd coeffs;   // N x K
  std::vector<double> fve;

  int n_components() const { return static_cast<int>(values.size()); }
};

// Closed-form L2 eigen-decomposition through R = M_pinv Q M_pinv^T, where Q
// is the L2 cross-Gram at the anchors. R^{-1/2} is a pseudo-inverse square
// root (rank tolerance taken from the estimate's factor). Eigenfunction signs
// are fixed so that int phi_k >= 0.
EigenSystem l2_eigen(const CovarianceEstimate& est, const QuadratureRule& rule);

// Evaluate phi_k (1-based k) at the given points.
Eigen::VectorXd eigenfunction_values(const EigenSystem& sys, const CovarianceEstimate& est,
                                     int k, const std::vector<double>& ts);

// Number of eigenvalues of B with |value| > rel_tol * max(|value|_max, 1e-300).
int numerical_rank(const CovarianceEstimate& est, double rel_tol = 1e-6);

// Projection scores onto phi_k: each curve is pre-smoothed on its own
// (GCV over presmooth_grid) and int (Xhat - mu) phi_k is taken by quadrature.
// Curves with fewer than two points, or whose smoother fails, get NaN.
std::vector<double> fpc_scores(const FunctionalDataset& data, const MeanEstimate& mean,
                               const EigenSystem& sys, const CovarianceEstimate& est,
                               int k, const QuadratureRule& rule,
                               const std::vector<double>& presmooth_grid);

}  // namespace fdacov
