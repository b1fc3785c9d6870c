#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fdacov/dataset.hpp"
#include "fdacov/kernel.hpp"

namespace fdacov {

// Kernel ridge / smoothing-spline mean estimate over the pooled observation
// times: mu(t) = sum_i c_i K(t, anchor_i). An empty anchor set is the zero
// mean.
struct MeanEstimate {
  std::vector<double> anchor_points;
  Eigen::VectorXd coefficients;
  double gcv_lambda = 0.0;

  static MeanEstimate zero() { return MeanEstimate{}; }
  bool is_zero() const { return anchor_points.empty(); }
};

// Pools all observations, solves c(lambda) = (Ktilde + N lambda I)^{-1} y for
// each grid value and keeps the GCV minimizer, where
//   GCV(lambda) = N ||(I - A)y||^2 / trace(I - A)^2,  A = Ktilde (Ktilde + N lambda I)^{-1}.
MeanEstimate fit_mean(const FunctionalDataset& data, const KernelSpec& spec,
                      const std::vector<double>& lambda_grid);

// 40 log-spaced values in [1e-10, 1].
std::vector<double> default_mean_lambda_grid();

double eval_mean(const MeanEstimate& est, double t);
Eigen::VectorXd eval_mean_many(const MeanEstimate& est, const std::vector<double>& ts);

}  // namespace fdacov
