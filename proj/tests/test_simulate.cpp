#include <cmath>

#include "doctest.h"
#include "fdacov/eigensys.hpp"
#include "fdacov/simulate.hpp"
#include "oracles.hpp"

using namespace fdacov;

TEST_CASE("generator reproducibility and marginals") {
  SimConfig cfg;
  cfg.n = 40;
  cfg.m = 5;
  cfg.seed = 1234;

  SUBCASE("identical (seed, rep) draws are bitwise equal") {
    const GeneratedData a = generate_dataset(cfg, 3);
    const GeneratedData b = generate_dataset(cfg, 3);
    REQUIRE(a.data.n_curves() == b.data.n_curves());
    for (std::size_t i = 0; i < a.data.n_curves(); ++i) {
      CHECK(a.data.curves[i].t == b.data.curves[i].t);
      CHECK(a.data.curves[i].y == b.data.curves[i].y);
    }
    CHECK((a.xi - b.xi).norm() == 0.0);
    const GeneratedData c = generate_dataset(cfg, 4);
    CHECK(c.data.curves[0].y != a.data.curves[0].y);
  }

  SUBCASE("Monte Carlo mean and variance of X(0.3)") {
    SimConfig big = cfg;
    big.n = 20000;
    big.m = 1;
    const GeneratedData gen = generate_dataset(big, 0);
    const double t0 = 0.3;
    std::vector<double> draws;
    draws.reserve(static_cast<std::size_t>(big.n));
    for (int i = 0; i < big.n; ++i) {
      double x = true_mean(t0);
      for (int k = 1; k <= big.L; ++k) x += gen.xi(i, k - 1) / (k + 1.0) * basis_phi(k, t0);
      draws.push_back(x);
    }
    double mean = 0.0;
    for (double v : draws) mean += v;
    mean /= draws.size();
    double var = 0.0;
    for (double v : draws) var += (v - mean) * (v - mean);
    var /= (draws.size() - 1);

    const double true_var = gen.true_cov.eval(t0, t0);
    const double se_mean = std::sqrt(true_var / draws.size());
    const double se_var = true_var * std::sqrt(2.0 / (draws.size() - 1.0));
    CHECK(std::abs(mean - true_mean(t0)) <= 3.0 * se_mean);
    CHECK(std::abs(var - true_var) <= 3.0 * se_var);
  }

  SUBCASE("times fall in the unit interval, noise respects the variance flag") {
    const GeneratedData gen = generate_dataset(cfg, 0);
    for (const auto& c : gen.data.curves)
      for (double t : c.t) {
        CHECK(t >= 0.0);
        CHECK(t < 1.0);
      }
  }
}

TEST_CASE("true covariance grid has rank L") {
  for (int L : {2, 4}) {
    TrueCovariance truth;
    truth.L = L;
    Eigen::MatrixXd c0(50, 50);
    for (int i = 0; i < 50; ++i)
      for (int j = 0; j < 50; ++j) c0(i, j) = truth.eval(i / 49.0, j / 49.0);
    const SymEig es = sym_eig(c0);
    int rank = 0;
    for (Eigen::Index i = 0; i < es.values.size(); ++i)
      if (std::abs(es.values[i]) > 1e-10 * es.values.cwiseAbs().maxCoeff()) ++rank;
    CHECK(rank == L);
  }
}

TEST_CASE("aise") {
  const QuadratureRule rule = make_quadrature(128);
  TrueCovariance truth;
  truth.L = 2;
  auto c0 = [&](double s, double t) { return truth.eval(s, t); };

  SUBCASE("identical arguments give zero") {
    CHECK(aise(c0, c0, rule) == 0.0);
  }
  SUBCASE("constant offset integrates to its square") {
    for (double c : {0.5, -0.2}) {
      auto shifted = [&](double s, double t) { return truth.eval(s, t) + c; };
      CHECK(aise(shifted, c0, rule) == doctest::Approx(c * c).epsilon(1e-12));
    }
  }
  SUBCASE("quadrature refinement on a fitted estimate") {
    // The sharper representative-scale version lives in the slow suite.
    SimConfig cfg;
    cfg.n = 40;
    cfg.m = 5;
    cfg.seed = 77;
    cfg.use_true_mean_zero = true;
    const GeneratedData gen = generate_dataset(cfg, 0);
    const KernelSpec spec;
    const DesignCache cache = build_design(gen.data, MeanEstimate::zero(), spec);
    FitOptions opts;
    opts.penalty = Penalty::TracePSD;
    opts.lambda = 1e-4;
    const CovarianceEstimate est = apg_fit(cache, opts);
    const double a128 = aise(est, gen.true_cov, make_quadrature(128));
    const double a512 = aise(est, gen.true_cov, make_quadrature(512));
    CHECK(std::abs(a128 - a512) <= 1e-6 * std::max(a512, 1e-12));
    // the matrix fast path agrees with the callable route
    auto eval_fn = [&](double s, double t) { return evaluate(est, s, t); };
    const double via_callable = aise(eval_fn, c0, make_quadrature(64));
    const double via_grid = aise(est, gen.true_cov, make_quadrature(64));
    CHECK(via_callable == doctest::Approx(via_grid).epsilon(1e-10));
  }
}

TEST_CASE("run_experiment smoke and determinism") {
  SimConfig cfg;
  cfg.n = 24;
  cfg.m = 5;
  cfg.L = 2;
  cfg.n_reps = 2;
  cfg.seed = 2024;
  cfg.methods = {Penalty::TracePSD};
  cfg.quad_nodes = 64;
  cfg.workers = 2;

  const ExperimentReport report = run_experiment(cfg);
  REQUIRE(report.records.size() == 2);
  REQUIRE(report.summaries.size() == 1);
  for (const auto& rec : report.records) {
    CHECK(rec.success);
    CHECK(std::isfinite(rec.ise));
    CHECK(rec.ise >= 0.0);
    CHECK(rec.rank >= 0);
  }
  CHECK(report.summaries[0].n_success == 2);
  CHECK(report.summaries[0].success_rate == 1.0);
  CHECK(report.summaries[0].se_aise >= 0.0);

  const ExperimentReport again = run_experiment(cfg);
  for (std::size_t i = 0; i < report.records.size(); ++i) {
    CHECK(report.records[i].ise == again.records[i].ise);
    CHECK(report.records[i].rank == again.records[i].rank);
    CHECK(report.records[i].lambda == again.records[i].lambda);
  }
}

TEST_CASE("config validation") {
  SimConfig cfg;
  cfg.L = 3;
  CHECK_THROWS_AS(generate_dataset(cfg, 0), InputError);
  cfg.L = 2;
  cfg.methods.clear();
  CHECK_THROWS_AS(run_experiment(cfg), InputError);
}
