#include <cmath>
#include <numbers>

#include "doctest.h"
#include "fdacov/kernel.hpp"
#include "fdacov/rng.hpp"
#include "fdacov/spectral.hpp"
#include "oracles.hpp"

using namespace fdacov;

TEST_CASE("sym_eig reconstructs and is orthogonal") {
  Rng rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::MatrixXd a = oracle::random_symmetric(8, 1.0, rng);
    const SymEig es = sym_eig(a);
    const Eigen::MatrixXd rec = es.vectors * es.values.asDiagonal() * es.vectors.transpose();
    CHECK((rec - a).norm() <= 1e-10 * std::max(1.0, a.norm()));
    CHECK((es.vectors.transpose() * es.vectors - Eigen::MatrixXd::Identity(8, 8)).norm() <=
          1e-10);
    for (Eigen::Index i = 1; i < es.values.size(); ++i)
      CHECK(es.values[i] <= es.values[i - 1]);
  }
}

TEST_CASE("svec examples and properties") {
  SUBCASE("pinned example") {
    Eigen::Matrix2d b;
    b << 1, 2, 2, 4;
    const Eigen::VectorXd v = svec(b);
    REQUIRE(v.size() == 3);
    CHECK(v[0] == doctest::Approx(1.0));
    CHECK(v[1] == doctest::Approx(2.0 * std::numbers::sqrt2));
    CHECK(v[2] == doctest::Approx(4.0));
    CHECK(v.squaredNorm() == doctest::Approx(25.0));  // frobenius norm squared
  }
  SUBCASE("identity") {
    const Eigen::VectorXd v = svec(Eigen::Matrix2d::Identity());
    CHECK(v[0] == 1.0);
    CHECK(v[1] == 0.0);
    CHECK(v[2] == 1.0);
  }
  SUBCASE("zero vector maps to zero matrix") {
    CHECK(svec_inv(Eigen::VectorXd::Zero(6)).norm() == 0.0);
  }
  SUBCASE("round trips") {
    Rng rng(9);
    const Eigen::MatrixXd b = oracle::random_symmetric(5, 2.0, rng);
    CHECK((svec_inv(svec(b)) - b).norm() <= 1e-14);
    Eigen::VectorXd v(10);
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
    CHECK((svec(svec_inv(v)) - v).norm() <= 1e-14);
  }
  SUBCASE("inner products are preserved") {
    Rng rng(13);
    for (int trial = 0; trial < 10; ++trial) {
      const Eigen::MatrixXd a = oracle::random_symmetric(4, 1.0, rng);
      const Eigen::MatrixXd b = oracle::random_symmetric(4, 1.0, rng);
      CHECK(std::abs(svec(a).dot(svec(b)) - (a * b).trace()) <= 1e-10);
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(svec(Eigen::MatrixXd::Zero(2, 3)), InputError);
    CHECK_THROWS_AS(svec_inv(Eigen::VectorXd::Zero(4)), InputError);  // not triangular
  }
}

TEST_CASE("prox operators: pinned examples") {
  Eigen::Matrix2d d31 = Eigen::Vector2d(3, 1).asDiagonal();
  Eigen::Matrix2d dm25 = Eigen::Vector2d(-2, 5).asDiagonal();
  Eigen::Matrix2d d3m1 = Eigen::Vector2d(3, -1).asDiagonal();

  SUBCASE("trace_psd soft-thresholds and clips") {
    CHECK((prox_trace_psd(d31, 1.0) - Eigen::Matrix2d(Eigen::Vector2d(2, 0).asDiagonal()))
              .norm() <= 1e-12);
    CHECK((prox_trace_psd(dm25, 0.5) - Eigen::Matrix2d(Eigen::Vector2d(0, 4.5).asDiagonal()))
              .norm() <= 1e-12);
  }
  SUBCASE("trace_sym keeps signs") {
    CHECK((prox_trace_sym(dm25, 0.5) -
           Eigen::Matrix2d(Eigen::Vector2d(-1.5, 4.5).asDiagonal()))
              .norm() <= 1e-12);
    CHECK(prox_trace_sym(dm25, 6.0).norm() == 0.0);  // nu above the spectral radius
  }
  SUBCASE("hs_psd shrinks and clips") {
    CHECK((prox_hs_psd(d3m1, 0.5) - Eigen::Matrix2d(Eigen::Vector2d(1.5, 0).asDiagonal()))
              .norm() <= 1e-12);
    // nu = 0 reduces to the PSD projection
    CHECK((prox_hs_psd(d3m1, 0.0) - Eigen::Matrix2d(Eigen::Vector2d(3, 0).asDiagonal()))
              .norm() <= 1e-12);
  }
  SUBCASE("hs_sym is a pure rescale") {
    Rng rng(7);
    const Eigen::MatrixXd b = oracle::random_symmetric(3, 1.0, rng);
    CHECK((prox_hs_sym(b, 0.5) - b / 2.0).norm() <= 1e-14);
    CHECK((prox_hs_sym(b, 0.0) - b).norm() == 0.0);
    const Eigen::MatrixXd c = oracle::random_symmetric(3, 1.0, rng);
    CHECK((prox_hs_sym(b + c, 0.7) - prox_hs_sym(b, 0.7) - prox_hs_sym(c, 0.7)).norm() <=
          1e-12);
  }
  SUBCASE("negative nu rejected") {
    CHECK_THROWS_AS(prox_trace_psd(d31, -0.1), InputError);
  }
}

TEST_CASE("prox operators beat the 2x2 grid oracle") {
  Rng rng(23);
  for (Penalty p : {Penalty::TracePSD, Penalty::TraceSym, Penalty::HSPSD, Penalty::HSSym}) {
    for (int trial = 0; trial < 4; ++trial) {
      const Eigen::MatrixXd b = oracle::random_symmetric(2, 1.0, rng);
      const double nu = 0.3;
      const Eigen::MatrixXd d = prox_penalty(p, b, nu).value;
      const double mine = oracle::prox_objective(p, d, b, nu);
      const double grid = oracle::grid_prox_2x2(p, b, nu);
      CHECK(mine <= grid + 1e-6);
      CHECK(std::abs(mine - grid) <= 1e-6);
    }
  }
}

TEST_CASE("prox outputs are local minima under feasible perturbations") {
  Rng rng(29);
  const double eps = 1e-3;
  for (Penalty p : {Penalty::TracePSD, Penalty::TraceSym, Penalty::HSPSD, Penalty::HSSym}) {
    const Eigen::MatrixXd b = oracle::random_symmetric(3, 1.0, rng);
    const double nu = 0.4;
    const Eigen::MatrixXd d = prox_penalty(p, b, nu).value;
    const double base = oracle::prox_objective(p, d, b, nu);
    for (int trial = 0; trial < 1000; ++trial) {
      Eigen::MatrixXd cand = d + eps * oracle::random_symmetric(3, 1.0, rng);
      if (penalty_is_psd(p)) cand = oracle::psd_clip(cand);
      CHECK(base <= oracle::prox_objective(p, cand, b, nu) + 1e-9);
    }
    if (penalty_is_psd(p)) {
      const SymEig es = sym_eig(d);
      CHECK(es.values[es.values.size() - 1] >= -1e-10);
    }
  }
}

TEST_CASE("factor_gram") {
  const KernelSpec spec;
  SUBCASE("identity input keeps full rank") {
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(6, 6);
    const GramFactor f = factor_gram(eye, {3, 3});
    CHECK(f.rank_q == 6);
    CHECK((f.M * f.M.transpose() - eye).norm() <= 1e-12);
  }
  SUBCASE("duplicated times reduce the rank") {
    std::vector<double> pts = {0.2, 0.2, 0.5, 0.5, 0.8, 0.8};
    const Eigen::MatrixXd k = gram(spec, pts);
    const GramFactor f = factor_gram(k, {2, 2, 2});
    CHECK(f.rank_q < 6);
    CHECK((f.M * f.M.transpose() - k).norm() <= 1e-8 * k.norm());
  }
  SUBCASE("pseudoinverse identity and block structure") {
    Rng rng(31);
    std::vector<double> pts;
    for (int i = 0; i < 20; ++i) pts.push_back(rng.uniform());
    const Eigen::MatrixXd k = gram(spec, pts);
    const GramFactor f = factor_gram(k, {7, 6, 7}, 1e-10);
    CHECK((f.M_pinv * f.M - Eigen::MatrixXd::Identity(f.rank_q, f.rank_q)).norm() <= 1e-8);
    Eigen::MatrixXd stacked(f.n_rows(), f.rank_q);
    for (std::size_t i = 0; i < f.n_curves(); ++i)
      stacked.middleRows(f.curve_offsets[i], f.curve_sizes[i]) = f.curve_block(i);
    CHECK((stacked - f.M).norm() == 0.0);
  }
  SUBCASE("rank is monotone non-increasing in rel_tol") {
    Rng rng(37);
    std::vector<double> pts;
    for (int i = 0; i < 30; ++i) pts.push_back(rng.uniform());
    const Eigen::MatrixXd k = gram(spec, pts);
    Eigen::Index prev = k.rows() + 1;
    for (double tol : {1e-14, 1e-10, 1e-6, 1e-2}) {
      const GramFactor f = factor_gram(k, {30}, tol);
      CHECK(f.rank_q <= prev);
      prev = f.rank_q;
    }
  }
  SUBCASE("rejects non-Gram input") {
    Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(3, 3);
    bad(2, 2) = -1.0;
    CHECK_THROWS_AS(factor_gram(bad, {3}), NumericalError);
  }
  SUBCASE("input validation") {
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(4, 4);
    CHECK_THROWS_AS(factor_gram(eye, {3}), InputError);
    CHECK_THROWS_AS(factor_gram(eye, {4}, 2.0), InputError);
  }
}
