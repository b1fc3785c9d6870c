#include "fdacov/meanfit.hpp"

#include <cmath>

#include "fdacov/errors.hpp"
#include "fdacov/spectral.hpp"

namespace fdacov {

std::vector<double> default_mean_lambda_grid() {
  std::vector<double> grid(40);
  const double lo = 1e-10, hi = 1.0;
  for (int i = 0; i < 40; ++i)
    grid[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, double(i) / 39.0);
  return grid;
}

MeanEstimate fit_mean(const FunctionalDataset& data, const KernelSpec& spec,
                      const std::vector<double>& lambda_grid) {
  std::vector<double> t_pool, y_pool;
  for (const auto& c : data.curves) {
    t_pool.insert(t_pool.end(), c.t.begin(), c.t.end());
    y_pool.insert(y_pool.end(), c.y.begin(), c.y.end());
  }
  if (t_pool.size() < 2) throw InputError("fit_mean: need at least two observations");
  if (lambda_grid.empty()) throw InputError("fit_mean: empty lambda grid");
  for (double l : lambda_grid)
    if (!(l > 0.0)) throw InputError("fit_mean: lambda values must be positive");

  const Eigen::Index n = static_cast<Eigen::Index>(t_pool.size());
  const double n_d = static_cast<double>(n);
  const Eigen::MatrixXd ktilde = gram(spec, t_pool);
  const SymEig es = sym_eig(ktilde);
  const Eigen::VectorXd vals = es.values.cwiseMax(0.0);
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(y_pool.data(), n);
  const Eigen::VectorXd proj = es.vectors.transpose() * y;

  double best_gcv = std::numeric_limits<double>::infinity();
  double best_lambda = lambda_grid.front();
  for (double lam : lambda_grid) {
    const double nl = n_d * lam;
    double rss = 0.0, tr = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double shrink = nl / (vals[i] + nl);  // I - A along this eigendirection
      rss += shrink * shrink * proj[i] * proj[i];
      tr += shrink;
    }
    const double gcv = n_d * rss / (tr * tr);
    if (gcv < best_gcv || (gcv == best_gcv && lam > best_lambda)) {
      best_gcv = gcv;
      best_lambda = lam;
    }
  }

  const double nl = n_d * best_lambda;
  Eigen::VectorXd scaled(n);
  for (Eigen::Index i = 0; i < n; ++i) scaled[i] = proj[i] / (vals[i] + nl);

  MeanEstimate out;
  out.anchor_points = std::move(t_pool);
  out.coefficients = es.vectors * scaled;
  out.gcv_lambda = best_lambda;
  return out;
}

double eval_mean(const MeanEstimate& est, double t) {
  if (est.is_zero()) return 0.0;
  const KernelSpec spec;
  double acc = 0.0;
  for (std::size_t i = 0; i < est.anchor_points.size(); ++i)
    acc += est.coefficients[static_cast<Eigen::Index>(i)] *
           kernel_eval(spec, t, est.anchor_points[i]);
  return acc;
}

Eigen::VectorXd eval_mean_many(const MeanEstimate& est, const std::vector<double>& ts) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(ts.size()));
  if (est.is_zero()) {
    out.setZero();
    return out;
  }
  const KernelSpec spec;
  const Eigen::MatrixXd k = kernel_cross(spec, ts, est.anchor_points);
  out = k * est.coefficients;
  return out;
}

}  // namespace fdacov
