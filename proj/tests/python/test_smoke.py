"""Smoke tests for the python module (run by ctest with PYTHONPATH set to the
build tree)."""

import math
import sys

import numpy as np

import fdacov as fc


def check(cond, what):
    if not cond:
        raise AssertionError(what)


def main():
    spec = fc.KernelSpec()
    check(abs(fc.kernel_eval(spec, 0.0, 0.0) - 906.0 / 720.0) < 1e-14, "kernel value")
    check(fc.kernel_eval(spec, 0.2, 0.8) == fc.kernel_eval(spec, 0.8, 0.2), "symmetry")

    rule = fc.make_quadrature(64)
    check(abs(np.sum(rule.weights) - 1.0) < 1e-12, "weights sum to one")

    b = np.array([[1.0, 2.0], [2.0, 4.0]])
    v = fc.svec(b)
    check(abs(v[1] - 2.0 * math.sqrt(2.0)) < 1e-14, "svec scaling")
    check(np.allclose(fc.svec_inv(v), b), "svec round trip")

    cfg = fc.SimConfig()
    cfg.n = 30
    cfg.m = 5
    cfg.seed = 42
    gen = fc.generate_dataset(cfg, 0)
    check(gen.data.n_curves() == 30, "generated curves")

    mean = fc.fit_mean(gen.data, spec, fc.default_mean_lambda_grid())
    check(np.isfinite(mean(0.5)), "mean evaluation")

    design = fc.build_design(gen.data, mean, spec)
    check(design.q > 0, "design rank")

    opts = fc.FitOptions()
    opts.lambda_ = 1e-4
    est = fc.apg_fit(design, opts)
    check(est.iterations >= 1, "iterations recorded")
    check(abs(est(0.3, 0.7) - est(0.7, 0.3)) < 1e-12, "covariance symmetry")

    grid = est.evaluate_grid([i / 19.0 for i in range(20)])
    eigvals = np.linalg.eigvalsh(grid)
    check(eigvals.min() >= -1e-8 * max(1.0, eigvals.max()), "grid PSD")
    check(abs(est.correlation(0.4, 0.4) - 1.0) < 1e-9, "unit correlation on the diagonal")

    sys_ = fc.l2_eigen(est, fc.make_quadrature(128))
    check(sys_.n_components() >= 1, "eigen components")
    check(abs(sys_.fve[-1] - 1.0) < 1e-12, "FVE ends at one")
    check(fc.numerical_rank(est) == sum(abs(z) > 1e-6 * abs(sys_.values[0]) for z in sys_.values),
          "rank consistent with the nonzero eigenvalue count")

    scores = fc.fpc_scores(gen.data, mean, sys_, est, 1, fc.make_quadrature(128),
                           fc.default_mean_lambda_grid())
    check(len(scores) == gen.data.n_curves(), "one score per curve")

    # tiny end-to-end experiment
    cfg.n = 16
    cfg.n_reps = 1
    cfg.quad_nodes = 64
    cfg.methods = [fc.Penalty.TRACE_PSD]
    report = fc.run_experiment(cfg)
    check(len(report.records) == 1 and report.records[0].success, "experiment record")
    check(report.summaries[0].success_rate == 1.0, "experiment summary")

    print("python smoke: all checks passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
