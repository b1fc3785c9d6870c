#include "fdacov/eigensys.hpp"

#include <cmath>
#include <limits>

namespace fdacov {

EigenSystem l2_eigen(const CovarianceEstimate& est, const QuadratureRule& rule) {
  const Eigen::Index q = est.factor.rank_q;
  if (est.B.rows() != q || est.B.cols() != q)
    throw InputError("l2_eigen: estimate has inconsistent shapes");

  // R = M_pinv Q M_pinv^T computed in factored form: with G the kernel
  // sections on the quadrature nodes, Q = G^T W G.
  const Eigen::MatrixXd g = kernel_cross(
      est.spec, std::vector<double>(rule.nodes.data(), rule.nodes.data() + rule.nodes.size()),
      est.anchor_points);                                        // n_nodes x N
  const Eigen::MatrixXd w = g * est.factor.M_pinv.transpose();   // n_nodes x q
  Eigen::MatrixXd r = w.transpose() * rule.weights.asDiagonal() * w;
  r = 0.5 * (r + r.transpose()).eval();

  const SymEig er = sym_eig(r);
  const double mu_max = er.values.size() > 0 ? er.values[0] : 0.0;
  if (!(mu_max > 1e-300)) throw NumericalError("l2_eigen: degenerate estimate, R is zero");

  const double tol = est.factor.rel_tol;
  Eigen::VectorXd sqrt_mu(er.values.size()), inv_sqrt_mu(er.values.size());
  for (Eigen::Index i = 0; i < er.values.size(); ++i) {
    const double mu = std::max(er.values[i], 0.0);
    sqrt_mu[i] = std::sqrt(mu);
    inv_sqrt_mu[i] = mu > tol * mu_max ? 1.0 / std::sqrt(mu) : 0.0;
  }
  const Eigen::MatrixXd r_half = er.vectors * sqrt_mu.asDiagonal() * er.vectors.transpose();
  const Eigen::MatrixXd r_inv_half =
      er.vectors * inv_sqrt_mu.asDiagonal() * er.vectors.transpose();

  Eigen::MatrixXd s = r_half * est.B * r_half;
  s = 0.5 * (s + s.transpose()).eval();
  const SymEig es = sym_eig(s);

  const double zeta_max = es.values.size() > 0 ? es.values.cwiseAbs().maxCoeff() : 0.0;
  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = 0; i < es.values.size(); ++i)
    if (std::abs(es.values[i]) > 1e-10 * zeta_max && zeta_max > 0.0) kept.push_back(i);

  EigenSystem out;
  out.values.resize(static_cast<Eigen::Index>(kept.size()));
  out.coeffs.resize(est.factor.M_pinv.cols(), static_cast<Eigen::Index>(kept.size()));
  if (kept.empty()) return out;

  const Eigen::MatrixXd u_all = est.factor.M_pinv.transpose() * r_inv_half;  // N x q
  // int phi_k = U_k . int z, with int z the quadrature of the kernel sections.
  const Eigen::VectorXd int_z = g.transpose() * rule.weights;
  for (std::size_t j = 0; j < kept.size(); ++j) {
    const Eigen::Index col = static_cast<Eigen::Index>(j);
    out.values[col] = es.values[kept[j]];
    Eigen::VectorXd u = u_all * es.vectors.col(kept[j]);
    const double integral = u.dot(int_z);
    if (integral < -1e-10) {
      u = -u;
    } else if (std::abs(integral) <= 1e-10) {
      Eigen::Index imax = 0;
      u.cwiseAbs().maxCoeff(&imax);
      if (u[imax] < 0.0) u = -u;
    }
    out.coeffs.col(col) = u;
  }

  const double total = out.values.cwiseAbs().sum();
  out.fve.resize(kept.size());
  double acc = 0.0;
  for (std::size_t j = 0; j < kept.size(); ++j) {
    acc += std::abs(out.values[static_cast<Eigen::Index>(j)]);
    out.fve[j] = total > 0.0 ? acc / total : 0.0;
  }
  return out;
}

Eigen::VectorXd eigenfunction_values(const EigenSystem& sys, const CovarianceEstimate& est,
                                     int k, const std::vector<double>& ts) {
  if (k < 1 || k > sys.n_components())
    throw InputError("eigenfunction_values: component index out of range");
  const Eigen::MatrixXd z = kernel_cross(est.spec, ts, est.anchor_points);  // T x N
  return z * sys.coeffs.col(k - 1);
}

int numerical_rank(const CovarianceEstimate& est, double rel_tol) {
  if (est.B.size() == 0) return 0;
  const SymEig es = sym_eig(est.B);
  const double scale = std::max(es.values.cwiseAbs().maxCoeff(), 1e-300);
  int rank = 0;
  for (Eigen::Index i = 0; i < es.values.size(); ++i)
    if (std::abs(es.values[i]) > rel_tol * scale) ++rank;
  return rank;
}

std::vector<double> fpc_scores(const FunctionalDataset& data, const MeanEstimate& mean,
                               const EigenSystem& sys, const CovarianceEstimate& est,
                               int k, const QuadratureRule& rule,
                               const std::vector<double>& presmooth_grid) {
  if (k < 1 || k > sys.n_components())
    throw InputError("fpc_scores: component index out of range");

  const std::vector<double> nodes(rule.nodes.data(), rule.nodes.data() + rule.nodes.size());
  const Eigen::VectorXd phi = eigenfunction_values(sys, est, k, nodes);
  const Eigen::VectorXd mu = eval_mean_many(mean, nodes);

  std::vector<double> scores;
  scores.reserve(data.n_curves());
  for (const auto& curve : data.curves) {
    if (curve.size() < 2) {
      scores.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    try {
      FunctionalDataset single;
      single.curves.push_back(curve);
      const MeanEstimate smooth = fit_mean(single, est.spec, presmooth_grid);
      const Eigen::VectorXd xhat = eval_mean_many(smooth, nodes);
      scores.push_back(((xhat - mu).cwiseProduct(phi)).dot(rule.weights));
    } catch (const std::exception&) {
      scores.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  }
  return scores;
}

}  // namespace fdacov
