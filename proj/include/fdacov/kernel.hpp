#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fdacov/errors.hpp"

namespace fdacov {

// Second-order Sobolev-Hilbert space on [0,1]. Only order 2 is supported;
// the reproducing kernel below is the one matching the squared norm
//   (int g)^2 + (int g')^2 + int (g'')^2.
struct KernelSpec {
  int order = 2;
};

// Fixed-grid quadrature on [0,1]: strictly increasing nodes, positive
// weights summing to one.
struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;

  int size() const { return static_cast<int>(nodes.size()); }
};

// Reproducing kernel K(s,t), built from scaled Bernoulli polynomials.
double kernel_eval(const KernelSpec& spec, double s, double t);

// Gram matrix [K(p_i, p_j)] over a point set.
Eigen::MatrixXd gram(const KernelSpec& spec, const std::vector<double>& points);

// Rectangular kernel matrix [K(a_i, b_j)] between two point sets.
Eigen::MatrixXd kernel_cross(const KernelSpec& spec, const std::vector<double>& a,
                             const std::vector<double>& b);

// Gauss-Legendre rule mapped from [-1,1] to [0,1].
QuadratureRule make_quadrature(int n_nodes);

// L2 cross-Gram [int_0^1 K(s, p_i) K(s, p_j) ds] approximated by the rule.
Eigen::MatrixXd l2_cross_gram(const KernelSpec& spec, const std::vector<double>& points,
                              const QuadratureRule& rule);

}  // namespace fdacov
