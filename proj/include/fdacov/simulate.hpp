#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fdacov/covest.hpp"
#include "fdacov/dataset.hpp"

namespace fdacov {

// Rank-L covariance sum_{k=1..L} (k+1)^{-2} phi_k(s) phi_k(t) over the
// first L Fourier modes sqrt(2)cos(2pi t), sqrt(2)sin(2pi t),
// sqrt(2)cos(4pi t), sqrt(2)sin(4pi t).
struct TrueCovariance {
  int L = 2;
  double eval(double s, double t) const;
};

double true_mean(double t);            // 3 sin(3pi(t+0.5)) + 2 t^3
double basis_phi(int k, double t);     // k is 1-based

struct SimConfig {
  int n = 200;
  int m = 5;
  int L = 2;
  double noise_var = 0.01;
  int n_reps = 30;
  std::uint64_t seed = 1;
  std::vector<Penalty> methods = {Penalty::TracePSD};
  bool use_true_mean_zero = false;
  int cv_folds = 5;
  int quad_nodes = 128;
  int workers = 0;  // 0 = hardware concurrency capped by n_reps
};

struct GeneratedData {
  FunctionalDataset data;
  TrueCovariance true_cov;
  Eigen::MatrixXd xi;  // n x L standard-normal scores actually drawn
};

// Deterministic in (cfg.seed, rep_index): each curve draws from its own
// seeded stream, so results do not depend on evaluation order or threading.
GeneratedData generate_dataset(const SimConfig& cfg, int rep_index);

// Tensor-product quadrature of (a - b)^2 over the unit square.
double aise(const std::function<double(double, double)>& a,
            const std::function<double(double, double)>& b, const QuadratureRule& rule);
double aise(const CovarianceEstimate& est, const TrueCovariance& truth,
            const QuadratureRule& rule);

struct ReplicateRecord {
  int rep = 0;
  Penalty method = Penalty::TracePSD;
  bool success = false;
  double ise = 0.0;
  int rank = 0;
  double lambda = 0.0;
  int iterations = 0;
  std::string error;
};

struct MethodSummary {
  Penalty method = Penalty::TracePSD;
  int n_success = 0;
  double mean_aise = 0.0;
  double se_aise = 0.0;   // sample SD of replicate ISEs / sqrt(n_success)
  double mean_rank = 0.0;
  double success_rate = 0.0;
};

struct ExperimentReport {
  SimConfig config;
  std::vector<ReplicateRecord> records;    // ordered by (rep, method)
  std::vector<MethodSummary> summaries;    // ordered as cfg.methods
};

// Full pipeline per replicate: generate, estimate the mean (GCV smoothing
// spline, or zero when configured), five-fold CV per method over the default
// lambda grid, final fit, ISE and rank. Failures are recorded per
// (replicate, method) and excluded from the summaries.
ExperimentReport run_experiment(const SimConfig& cfg);

}  // namespace fdacov
