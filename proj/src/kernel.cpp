#include "fdacov/kernel.hpp"

#include <cmath>
#include <numbers>

namespace fdacov {

namespace {

void check_spec(const KernelSpec& spec) {
  if (spec.order != 2)
    throw InputError("kernel: only the second-order space is supported (order = 2)");
}

void check_unit_interval(double x, const char* name) {
  if (!(x >= 0.0 && x <= 1.0))
    throw InputError(std::string("kernel: ") + name + " must lie in [0,1]");
}

void check_points(const std::vector<double>& points, const char* where) {
  if (points.empty()) throw InputError(std::string(where) + ": empty point list");
  for (double p : points) check_unit_interval(p, "point");
}

// Scaled Bernoulli polynomials B_v(x)/v!.
inline double bern1(double x) { return x - 0.5; }
inline double bern2(double x) { return 0.5 * (bern1(x) * bern1(x) - 1.0 / 12.0); }
inline double bern4(double x) {
  const double u = bern1(x);
  const double u2 = u * u;
  return (u2 * u2 - 0.5 * u2 + 7.0 / 240.0) / 24.0;
}

inline double eval_raw(double s, double t) {
  return 1.0 + bern1(s) * bern1(t) + bern2(s) * bern2(t) - bern4(std::abs(s - t));
}

}  // namespace

double kernel_eval(const KernelSpec& spec, double s, double t) {
  check_spec(spec);
  check_unit_interval(s, "s");
  check_unit_interval(t, "t");
  return eval_raw(s, t);
}

Eigen::MatrixXd gram(const KernelSpec& spec, const std::vector<double>& points) {
  check_spec(spec);
  check_points(points, "gram");
  const Eigen::Index n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j; i < n; ++i) {
      const double v = eval_raw(points[i], points[j]);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

Eigen::MatrixXd kernel_cross(const KernelSpec& spec, const std::vector<double>& a,
                             const std::vector<double>& b) {
  check_spec(spec);
  check_points(a, "kernel_cross");
  check_points(b, "kernel_cross");
  Eigen::MatrixXd k(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
  for (Eigen::Index j = 0; j < k.cols(); ++j)
    for (Eigen::Index i = 0; i < k.rows(); ++i)
      k(i, j) = eval_raw(a[static_cast<std::size_t>(i)], b[static_cast<std::size_t>(j)]);
  return k;
}

QuadratureRule make_quadrature(int n_nodes) {
  if (n_nodes < 2) throw InputError("make_quadrature: need at least 2 nodes");
  const int n = n_nodes;
  Eigen::VectorXd x(n), w(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Newton iteration on P_n from the Chebyshev initial guess.
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    const double wi = 2.0 / ((1.0 - z * z) * pp * pp);
    w[i] = wi;
    w[n - 1 - i] = wi;
  }
  QuadratureRule rule;
  rule.nodes = (x.array() + 1.0) * 0.5;
  rule.weights = w * 0.5;
  return rule;
}

Eigen::MatrixXd l2_cross_gram(const KernelSpec& spec, const std::vector<double>& points,
                              const QuadratureRule& rule) {
  check_spec(spec);
  check_points(points, "l2_cross_gram");
  if (rule.nodes.size() < 2 || rule.nodes.size() != rule.weights.size())
    throw InputError("l2_cross_gram: invalid quadrature rule");
  const Eigen::Index n_nodes = rule.nodes.size();
  const Eigen::Index n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd g(n_nodes, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index a = 0; a < n_nodes; ++a)
      g(a, j) = eval_raw(rule.nodes[a], points[static_cast<std::size_t>(j)]);
  Eigen::MatrixXd q = g.transpose() * rule.weights.asDiagonal() * g;
  Eigen::MatrixXd sym = 0.5 * (q + q.transpose());
  return sym;
}

}  // namespace fdacov
