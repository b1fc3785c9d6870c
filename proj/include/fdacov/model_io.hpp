#pragma once

#include <string>
#include <vector>

#include "fdacov/covest.hpp"
#include "fdacov/meanfit.hpp"

namespace fdacov {

// Optional min-max map applied to raw observation times before fitting,
// recorded so grids and scores can be reported in original units.
struct TimeRescale {
  bool enabled = false;
  double t_min = 0.0;
  double t_max = 1.0;

  double to_unit(double t) const { return enabled ? (t - t_min) / (t_max - t_min) : t; }
  double to_original(double u) const { return enabled ? t_min + u * (t_max - t_min) : u; }
};

// Self-contained fitted model as written to disk.
struct Model {
  int format_version = 1;
  KernelSpec spec;
  TimeRescale rescale;
  std::vector<double> anchor_points;
  Eigen::MatrixXd B;       // q x q
  Eigen::MatrixXd M_pinv;  // q x N
  double factor_rel_tol = 1e-10;
  Penalty penalty = Penalty::TracePSD;
  double lambda_used = 0.0;
  int iterations = 0;
  double final_objective = 0.0;
  int dropped_curves = 0;
  int quad_nodes = 128;
  std::vector<CvCell> cv_table;
  MeanEstimate mean;

  // Evaluation-ready view (the forward factor M is not stored on disk and is
  // left empty; evaluation and eigen-analysis only need M_pinv).
  CovarianceEstimate estimate() const;
};

Model make_model(const CovarianceEstimate& est, const MeanEstimate& mean,
                 const TimeRescale& rescale, const std::vector<CvCell>& cv_table,
                 int dropped_curves, int quad_nodes);

// JSON round-trip; doubles are serialized losslessly. Writes are atomic
// (temp file + rename).
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

}  // namespace fdacov
