#include <cmath>

#include "doctest.h"
#include "fdacov/kernel.hpp"
#include "fdacov/rng.hpp"
#include "fdacov/spectral.hpp"
#include "oracles.hpp"

using namespace fdacov;

TEST_CASE("kernel_eval matches the polynomial closed form at pinned points") {
  const KernelSpec spec;
  // 1 + 1/4 + 1/144 + 1/720
  CHECK(kernel_eval(spec, 0.0, 0.0) == doctest::Approx(906.0 / 720.0).epsilon(1e-14));
  // 1 + (1/24)^2 + 1/720
  CHECK(kernel_eval(spec, 0.5, 0.5) ==
        doctest::Approx(1.0 + 1.0 / 576.0 + 1.0 / 720.0).epsilon(1e-14));
}

TEST_CASE("kernel_eval is symmetric and pure") {
  const KernelSpec spec;
  Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    const double s = rng.uniform(), t = rng.uniform();
    CHECK(kernel_eval(spec, s, t) == kernel_eval(spec, t, s));
    CHECK(kernel_eval(spec, s, t) == kernel_eval(spec, s, t));
  }
}

TEST_CASE("kernel_eval validates the domain and the order") {
  const KernelSpec spec;
  CHECK_THROWS_AS(kernel_eval(spec, -0.1, 0.5), InputError);
  CHECK_THROWS_AS(kernel_eval(spec, 0.5, 1.5), InputError);
  KernelSpec bad;
  bad.order = 3;
  CHECK_THROWS_AS(kernel_eval(bad, 0.5, 0.5), InputError);
}

TEST_CASE("reproducing property: H(K) inner product of sections equals the kernel") {
  const KernelSpec spec;
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      const double s = 0.05 + 0.9 * i / 9.0;
      const double t = 0.05 + 0.9 * j / 9.0;
      const double ip = oracle::rkhs_inner_of_sections(s, t);
      worst = std::max(worst, std::abs(ip - kernel_eval(spec, s, t)));
    }
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("gram basics") {
  const KernelSpec spec;
  SUBCASE("single point") {
    const Eigen::MatrixXd g = gram(spec, {0.3});
    REQUIRE(g.rows() == 1);
    CHECK(g(0, 0) == kernel_eval(spec, 0.3, 0.3));
  }
  SUBCASE("empty input") { CHECK_THROWS_AS(gram(spec, {}), InputError); }
  SUBCASE("exact symmetry and PSD up to round-off") {
    Rng rng(5);
    std::vector<double> pts;
    for (int i = 0; i < 40; ++i) pts.push_back(rng.uniform());
    const Eigen::MatrixXd g = gram(spec, pts);
    CHECK((g - g.transpose()).norm() == 0.0);
    const SymEig es = sym_eig(g);
    CHECK(es.values[es.values.size() - 1] >= -1e-8 * es.values[0]);
  }
  SUBCASE("duplicated point gives a rank-1 2x2 block") {
    const Eigen::MatrixXd g = gram(spec, {0.4, 0.4});
    const SymEig es = sym_eig(g);
    CHECK(es.values[0] > 0.0);
    CHECK(std::abs(es.values[1]) <= 1e-12 * es.values[0]);
  }
}

TEST_CASE("make_quadrature") {
  SUBCASE("too few nodes") { CHECK_THROWS_AS(make_quadrature(1), InputError); }
  SUBCASE("weights sum to one, nodes strictly increasing") {
    for (int n : {2, 16, 128}) {
      const QuadratureRule rule = make_quadrature(n);
      CHECK(std::abs(rule.weights.sum() - 1.0) <= 1e-12);
      for (int i = 1; i < n; ++i) CHECK(rule.nodes[i] > rule.nodes[i - 1]);
      CHECK(rule.weights.minCoeff() > 0.0);
    }
  }
  SUBCASE("polynomial exactness: int t^3 = 1/4 with two nodes") {
    const QuadratureRule rule = make_quadrature(2);
    double acc = 0.0;
    for (int i = 0; i < 2; ++i) acc += rule.weights[i] * std::pow(rule.nodes[i], 3);
    CHECK(acc == doctest::Approx(0.25).epsilon(1e-14));
  }
  SUBCASE("int sin^2(2 pi t) = 1/2 at 128 nodes") {
    const QuadratureRule rule = make_quadrature(128);
    double acc = 0.0;
    for (int i = 0; i < 128; ++i) {
      const double s = std::sin(2.0 * std::numbers::pi * rule.nodes[i]);
      acc += rule.weights[i] * s * s;
    }
    CHECK(std::abs(acc - 0.5) <= 1e-10);
  }
}

TEST_CASE("l2_cross_gram") {
  const KernelSpec spec;
  Rng rng(17);
  std::vector<double> pts;
  for (int i = 0; i < 12; ++i) pts.push_back(rng.uniform());

  SUBCASE("single point is a positive integral") {
    const Eigen::MatrixXd q = l2_cross_gram(spec, {0.37}, make_quadrature(128));
    CHECK(q(0, 0) > 0.0);
  }
  SUBCASE("refinement: 128 vs 512 nodes agree to 1e-10") {
    const Eigen::MatrixXd q128 = l2_cross_gram(spec, pts, make_quadrature(128));
    const Eigen::MatrixXd q512 = l2_cross_gram(spec, pts, make_quadrature(512));
    CHECK((q128 - q512).cwiseAbs().maxCoeff() <= 1e-10);
  }
  SUBCASE("halving the spacing changes entries below 1e-10") {
    const Eigen::MatrixXd q256 = l2_cross_gram(spec, pts, make_quadrature(256));
    const Eigen::MatrixXd q128 = l2_cross_gram(spec, pts, make_quadrature(128));
    CHECK((q128 - q256).cwiseAbs().maxCoeff() <= 1e-10);
  }
  SUBCASE("agrees with direct quadrature of the integrand") {
    const QuadratureRule rule = make_quadrature(128);
    const Eigen::MatrixXd q = l2_cross_gram(spec, pts, rule);
    double worst = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t j = i; j < pts.size(); ++j) {
        double direct = 0.0;
        for (int a = 0; a < rule.size(); ++a)
          direct += rule.weights[a] * kernel_eval(spec, rule.nodes[a], pts[i]) *
                    kernel_eval(spec, rule.nodes[a], pts[j]);
        worst = std::max(worst, std::abs(direct - q(static_cast<Eigen::Index>(i),
                                                    static_cast<Eigen::Index>(j))));
      }
    }
    CHECK(worst <= 1e-12);
  }
  SUBCASE("PSD within relative tolerance") {
    const Eigen::MatrixXd q = l2_cross_gram(spec, pts, make_quadrature(128));
    const SymEig es = sym_eig(q);
    CHECK(es.values[es.values.size() - 1] >= -1e-8 * es.values[0]);
  }
  SUBCASE("empty input") {
    CHECK_THROWS_AS(l2_cross_gram(spec, {}, make_quadrature(16)), InputError);
  }
}
