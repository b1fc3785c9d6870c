#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "fdacov/dataset.hpp"
#include "fdacov/kernel.hpp"
#include "fdacov/meanfit.hpp"
#include "fdacov/spectral.hpp"

namespace fdacov {

// Finite-dimensional form of the covariance fitting problem: Gram factor over
// the pooled retained times, centered cross-product blocks Z_i, and cached
// pieces of the quadratic loss
//   loss(B) = normalizer * sum_i || offdiag(Z_i - M_i B M_i^T) ||_F^2.
// Diagonals of the Z_i are stored but never enter the loss.
struct DesignCache {
  KernelSpec spec;
  GramFactor factor;
  std::vector<Eigen::MatrixXd> z_blocks;  // m_i x m_i, full outer products
  double normalizer = 0.0;                // 1 / sum_i m_i (m_i - 1)
  std::vector<double> anchor_points;      // pooled times, curve order
  int dropped_curves = 0;                 // curves with fewer than 2 points

  // grad(B) = hessian_apply(B) - linear_term; loss(0) = loss_at_zero.
  Eigen::MatrixXd linear_term;
  double loss_at_zero = 0.0;

  Eigen::Index q() const { return factor.rank_q; }
};

// Drops curves with fewer than two observations (counted in dropped_curves)
// and assembles the design over the retained ones.
DesignCache build_design(const FunctionalDataset& data, const MeanEstimate& mean,
                         const KernelSpec& spec, double rel_tol = 1e-10);

// Loss and (symmetric) gradient at B.
std::pair<double, Eigen::MatrixXd> loss_and_grad(const DesignCache& cache,
                                                 const Eigen::MatrixXd& B);

// Spectral radius of the loss gradient at B = 0; any lambda at or above this
// sends the trace-PSD solution to zero. Convenience for grid construction.
double lambda_max(const DesignCache& cache);

struct FitOptions {
  Penalty penalty = Penalty::TracePSD;
  double lambda = 0.0;
  Eigen::MatrixXd B0;     // empty means zero; clipped to the cone for PSD penalties
  double L_hat = 1.0;
  double eta = 2.0;       // step-size growth inside backtracking, > 1
  double alpha = 0.9;     // step-size decay across iterations, in (0,1)
  int max_iter = 2000;
  double rel_tol = 1e-7;  // stop when the relative objective change drops below this
};

struct CovarianceEstimate {
  Eigen::MatrixXd B;  // q x q symmetric coefficient matrix
  GramFactor factor;
  KernelSpec spec;
  std::vector<double> anchor_points;
  Penalty penalty = Penalty::TracePSD;
  double lambda_used = 0.0;
  int iterations = 0;
  std::vector<double> objective_trace;
  double first_theta = 0.0;  // momentum weight of the first iteration
};

// Accelerated proximal gradient with backtracking on the svec coordinates.
// Returns the best-objective iterate seen along the trajectory.
CovarianceEstimate apg_fit(const DesignCache& cache, const FitOptions& opts);

// C(s,t) = z(s)^T M_pinv^T B M_pinv z(t) with z(.) the kernel sections at the
// anchors.
double evaluate(const CovarianceEstimate& est, double s, double t);

// [C(pts_i, pts_j)] evaluated in one pass; symmetric by construction.
Eigen::MatrixXd evaluate_grid(const CovarianceEstimate& est, const std::vector<double>& pts);

// C(s,t) / sqrt(C(s,s) C(t,t)); throws NumericalError when a variance falls
// below the 1e-12 floor.
double correlation(const CovarianceEstimate& est, double s, double t);

struct CvCell {
  int fold = 0;
  double lambda = 0.0;
  double val_loss = 0.0;
};

struct CvResult {
  double best_lambda = 0.0;
  std::vector<CvCell> table;
  int skipped_folds = 0;
};

// Curve-level folds prepared once: training design plus the held-out curves'
// Z blocks and evaluation maps. Reusable across penalties.
struct CvFolds;

CvFolds make_cv_folds(const FunctionalDataset& data, const MeanEstimate& mean,
                      const KernelSpec& spec, int folds, std::uint64_t seed,
                      double rel_tol = 1e-10);

CvResult cross_validate(const CvFolds& folds, const FitOptions& opts_template,
                        const std::vector<double>& lambda_grid);

// Convenience overload: builds the folds and scores the grid. Validation
// score is the same empirical loss evaluated on the held-out curves through
// the fitted covariance. Ties prefer the larger lambda.
CvResult cross_validate(const FunctionalDataset& data, const MeanEstimate& mean,
                        const KernelSpec& spec, const FitOptions& opts_template,
                        const std::vector<double>& lambda_grid, int folds,
                        std::uint64_t seed);

// 30 log-spaced values in [1e-9, 1e-1].
std::vector<double> default_cv_lambda_grid();

struct CvFolds {
  struct Fold {
    DesignCache design;
    std::vector<Eigen::MatrixXd> val_z;  // held-out outer products
    std::vector<Eigen::MatrixXd> val_h;  // m_i x q maps, H B H^T = C at held-out times
    double val_pair_count = 0.0;
    bool usable = false;
  };
  std::vector<Fold> folds;
  int skipped = 0;
};

}  // namespace fdacov
