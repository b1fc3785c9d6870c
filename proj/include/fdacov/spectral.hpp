#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "fdacov/errors.hpp"

namespace fdacov {

// The four supported spectral penalties: trace norm or squared
// Hilbert-Schmidt norm, each with or without the positive-semidefinite
// constraint.
enum class Penalty { TracePSD, TraceSym, HSPSD, HSSym };

const char* penalty_name(Penalty p);
Penalty penalty_from_name(const std::string& name);
bool penalty_is_psd(Penalty p);

// Eigendecomposition of a symmetric matrix. Eigenvalues are sorted
// descending; each eigenvector's largest-magnitude entry is made positive so
// results are reproducible across runs.
struct SymEig {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

SymEig sym_eig(const Eigen::MatrixXd& a);

// Isometry between symmetric q x q matrices and R^{q(q+1)/2}:
// diagonal entries kept, off-diagonals scaled by sqrt(2), column by column.
Eigen::VectorXd svec(const Eigen::MatrixXd& b);
Eigen::MatrixXd svec_inv(const Eigen::VectorXd& v);

// Proximal operators of the four penalties, i.e. minimizers of
//   0.5 * ||D - B||_F^2 + nu * penalty(D)
// over the symmetric matrices (optionally restricted to the PSD cone).
Eigen::MatrixXd prox_trace_psd(const Eigen::MatrixXd& b, double nu);
Eigen::MatrixXd prox_trace_sym(const Eigen::MatrixXd& b, double nu);
Eigen::MatrixXd prox_hs_psd(const Eigen::MatrixXd& b, double nu);
Eigen::MatrixXd prox_hs_sym(const Eigen::MatrixXd& b, double nu);

// Proximal step plus the penalty value at the output, sharing a single
// eigendecomposition.
struct ProxResult {
  Eigen::MatrixXd value;
  double penalty = 0.0;
};

ProxResult prox_penalty(Penalty p, const Eigen::MatrixXd& b, double nu);

// Penalty value at B (trace variants need an eigendecomposition).
double penalty_value(Penalty p, const Eigen::MatrixXd& b);

// Rank-revealing factorization M M^T = Ktilde of a kernel Gram matrix,
// with rows grouped into per-curve blocks.
struct GramFactor {
  Eigen::MatrixXd M;       // N x q
  Eigen::MatrixXd M_pinv;  // q x N, Moore-Penrose pseudoinverse of M
  Eigen::Index rank_q = 0;
  std::vector<Eigen::Index> curve_sizes;
  std::vector<Eigen::Index> curve_offsets;
  double rel_tol = 1e-10;

  Eigen::Index n_rows() const { return M.rows(); }
  std::size_t n_curves() const { return curve_sizes.size(); }
  auto curve_block(std::size_t i) const {
    return M.middleRows(curve_offsets[i], curve_sizes[i]);
  }
};

// Keeps eigenpairs above rel_tol * lambda_max. Throws NumericalError when the
// input has an eigenvalue below -1e-6 * lambda_max (not a Gram matrix).
GramFactor factor_gram(const Eigen::MatrixXd& ktilde,
                       const std::vector<Eigen::Index>& curve_sizes,
                       double rel_tol = 1e-10);

}  // namespace fdacov
