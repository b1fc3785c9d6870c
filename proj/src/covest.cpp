#include "fdacov/covest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fdacov/rng.hpp"

namespace fdacov {

namespace {

Eigen::VectorXd residuals(const Curve& curve, const MeanEstimate& mean) {
  Eigen::VectorXd r = Eigen::Map<const Eigen::VectorXd>(
      curve.y.data(), static_cast<Eigen::Index>(curve.y.size()));
  if (!mean.is_zero()) r -= eval_mean_many(mean, curve.t);
  return r;
}

Eigen::MatrixXd off_diagonal(Eigen::MatrixXd m) {
  m.diagonal().setZero();
  return m;
}

}  // namespace

DesignCache build_design(const FunctionalDataset& data, const MeanEstimate& mean,
                         const KernelSpec& spec, double rel_tol) {
  DesignCache cache;
  cache.spec = spec;

  std::vector<const Curve*> kept;
  for (const auto& c : data.curves) {
    if (c.size() >= 2)
      kept.push_back(&c);
    else
      ++cache.dropped_curves;
  }

  double pairs = 0.0;
  std::vector<Eigen::Index> sizes;
  for (const Curve* c : kept) {
    const double m = static_cast<double>(c->size());
    pairs += m * (m - 1.0);
    sizes.push_back(static_cast<Eigen::Index>(c->size()));
    cache.anchor_points.insert(cache.anchor_points.end(), c->t.begin(), c->t.end());
  }
  if (kept.empty() || pairs <= 0.0)
    throw InputError("build_design: loss undefined, m(m-1) = 0 over all curves");

  const Eigen::MatrixXd ktilde = gram(spec, cache.anchor_points);
  cache.factor = factor_gram(ktilde, sizes, rel_tol);
  cache.normalizer = 1.0 / pairs;

  const Eigen::Index q = cache.factor.rank_q;
  cache.linear_term = Eigen::MatrixXd::Zero(q, q);
  cache.z_blocks.reserve(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const Eigen::VectorXd r = residuals(*kept[i], mean);
    Eigen::MatrixXd z = r * r.transpose();
    const Eigen::MatrixXd z_off = off_diagonal(z);
    cache.loss_at_zero += z_off.squaredNorm();
    const auto mi = cache.factor.curve_block(i);
    cache.linear_term.noalias() += mi.transpose() * (z_off * mi);
    cache.z_blocks.push_back(std::move(z));
  }
  cache.loss_at_zero *= cache.normalizer;
  cache.linear_term *= 2.0 * cache.normalizer;
  return cache;
}

std::pair<double, Eigen::MatrixXd> loss_and_grad(const DesignCache& cache,
                                                 const Eigen::MatrixXd& B) {
  const Eigen::Index q = cache.factor.rank_q;
  if (B.rows() != q || B.cols() != q)
    throw InputError("loss_and_grad: B must be q x q with q = " + std::to_string(q));

  const auto& f = cache.factor;
  const Eigen::MatrixXd s = f.M * B;  // N x q
  Eigen::MatrixXd w(f.n_rows(), q);   // stacked rows offdiag(M_i B M_i^T - Z_i) M_i
  double loss = 0.0;
  Eigen::MatrixXd ri;
  for (std::size_t i = 0; i < cache.z_blocks.size(); ++i) {
    const auto mi = f.curve_block(i);
    ri.noalias() = s.middleRows(f.curve_offsets[i], f.curve_sizes[i]) * mi.transpose();
    ri -= cache.z_blocks[i];
    ri.diagonal().setZero();
    loss += ri.squaredNorm();
    w.middleRows(f.curve_offsets[i], f.curve_sizes[i]).noalias() = ri * mi;
  }
  Eigen::MatrixXd grad = f.M.transpose() * w;
  loss *= cache.normalizer;
  grad *= 2.0 * cache.normalizer;
  Eigen::MatrixXd grad_sym = 0.5 * (grad + grad.transpose());
  return {loss, grad_sym};
}

double lambda_max(const DesignCache& cache) {
  if (cache.linear_term.size() == 0) return 0.0;
  const SymEig es = sym_eig(cache.linear_term);
  return es.values.cwiseAbs().maxCoeff();
}

std::vector<double> default_cv_lambda_grid() {
  std::vector<double> grid(30);
  const double lo = 1e-9, hi = 1e-1;
  for (int i = 0; i < 30; ++i)
    grid[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, double(i) / 29.0);
  return grid;
}

namespace {

void validate_options(const FitOptions& opts, Eigen::Index q) {
  if (!(opts.eta > 1.0)) throw InputError("apg_fit: eta must exceed 1");
  if (!(opts.alpha > 0.0 && opts.alpha < 1.0))
    throw InputError("apg_fit: alpha must lie in (0,1)");
  if (!(opts.lambda >= 0.0)) throw InputError("apg_fit: lambda must be nonnegative");
  if (!(opts.L_hat > 0.0)) throw InputError("apg_fit: L_hat must be positive");
  if (opts.max_iter < 1) throw InputError("apg_fit: max_iter must be at least 1");
  if (!(opts.rel_tol > 0.0)) throw InputError("apg_fit: rel_tol must be positive");
  if (opts.B0.size() != 0 && (opts.B0.rows() != q || opts.B0.cols() != q))
    throw InputError("apg_fit: B0 must be q x q");
}

Eigen::MatrixXd starting_point(const FitOptions& opts, Eigen::Index q) {
  if (opts.B0.size() == 0) return Eigen::MatrixXd::Zero(q, q);
  Eigen::MatrixXd b0 = 0.5 * (opts.B0 + opts.B0.transpose());
  if (penalty_is_psd(opts.penalty)) {
    // Algorithm input contract: the start must be feasible.
    const SymEig es = sym_eig(b0);
    if (es.values.size() > 0 && es.values[es.values.size() - 1] < 0.0)
      b0 = es.vectors * es.values.cwiseMax(0.0).asDiagonal() * es.vectors.transpose();
  }
  return b0;
}

}  // namespace

CovarianceEstimate apg_fit(const DesignCache& cache, const FitOptions& opts) {
  const Eigen::Index q = cache.factor.rank_q;
  validate_options(opts, q);

  const Eigen::MatrixXd b0_mat = starting_point(opts, q);

  // Fresh loss/gradient in svec coordinates.
  auto fresh = [&](const Eigen::VectorXd& bv, Eigen::VectorXd& grad_out) {
    auto [loss, grad] = loss_and_grad(cache, svec_inv(bv));
    grad_out = svec(grad);
    return loss;
  };

  Eigen::VectorXd b = svec(b0_mat);
  Eigen::VectorXd b_bar = b;
  Eigen::VectorXd g_b(b.size()), g_bar(b.size());
  double loss_b = fresh(b, g_b);
  g_bar = g_b;

  double f_prev = loss_b + opts.lambda * penalty_value(opts.penalty, b0_mat);
  if (!std::isfinite(f_prev))
    throw NumericalError("apg_fit: non-finite objective at the starting point");

  std::vector<double> trace{f_prev};
  double f_best = f_prev;
  Eigen::VectorXd b_best = b;

  double theta_prev = std::numeric_limits<double>::infinity();
  double l_prev = opts.L_hat;
  double first_theta = 0.0;
  int iters = 0;
  int quiet_steps = 0;  // consecutive iterations below the change tolerance

  for (int k = 0; k < opts.max_iter; ++k) {
    double l = opts.alpha * l_prev;
    double theta = 0.0, pen_next = 0.0, loss_next = 0.0;
    Eigen::VectorXd b_next, g_next;
    for (int bt = 0;; ++bt) {
      theta = 2.0 / (1.0 + std::sqrt(1.0 + 4.0 * l / (l_prev * theta_prev * theta_prev)));
      const Eigen::VectorXd e = (1.0 - theta) * b + theta * b_bar;
      // The loss is quadratic, so gradients combine linearly along the
      // momentum direction; only the prox point needs a fresh evaluation.
      const Eigen::VectorXd g_e = (1.0 - theta) * g_b + theta * g_bar;
      const ProxResult pr =
          prox_penalty(opts.penalty, svec_inv(e - g_e / l), opts.lambda / l);
      b_next = svec(pr.value);
      pen_next = pr.penalty;
      loss_next = fresh(b_next, g_next);
      const Eigen::VectorXd diff = b_next - e;
      const double denom = diff.squaredNorm();
      const double l_hat = denom > 0.0 ? 2.0 * std::abs(diff.dot(g_next - g_e)) / denom : 0.0;
      if (l >= l_hat) break;
      l = std::max(opts.eta * l, l_hat);
      if (bt > 200)
        throw NumericalError("apg_fit: backtracking failed to settle at iteration " +
                             std::to_string(k));
    }
    if (k == 0) first_theta = theta;

    const double f = loss_next + opts.lambda * pen_next;
    if (!std::isfinite(f) || !g_next.allFinite())
      throw NumericalError("apg_fit: non-finite value at iteration " + std::to_string(k));

    const Eigen::VectorXd b_bar_next = (b_next - (1.0 - theta) * b) / theta;
    const Eigen::VectorXd g_bar_next = (g_next - (1.0 - theta) * g_b) / theta;

    trace.push_back(f);
    if (f < f_best) {
      f_best = f;
      b_best = b_next;
    }
    // A single sub-tolerance step can be a momentum stall; require it to hold
    // on three consecutive iterations.
    if (std::abs(f - f_prev) <= opts.rel_tol * std::max(std::abs(f_prev), 1e-12))
      ++quiet_steps;
    else
      quiet_steps = 0;
    const bool stop = quiet_steps >= 3;

    b = b_next;
    g_b = g_next;
    b_bar = b_bar_next;
    g_bar = g_bar_next;
    theta_prev = theta;
    l_prev = l;
    f_prev = f;
    iters = k + 1;
    if (stop) break;
  }

  CovarianceEstimate est;
  est.B = svec_inv(b_best);
  est.factor = cache.factor;
  est.spec = cache.spec;
  est.anchor_points = cache.anchor_points;
  est.penalty = opts.penalty;
  est.lambda_used = opts.lambda;
  est.iterations = iters;
  est.objective_trace = std::move(trace);
  est.first_theta = first_theta;
  return est;
}

namespace {

Eigen::VectorXd feature_vector(const CovarianceEstimate& est, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw InputError("evaluate: point must lie in [0,1]");
  const Eigen::Index n = static_cast<Eigen::Index>(est.anchor_points.size());
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i)
    z[i] = kernel_eval(est.spec, t, est.anchor_points[static_cast<std::size_t>(i)]);
  return est.factor.M_pinv * z;  // q-vector
}

}  // namespace

double evaluate(const CovarianceEstimate& est, double s, double t) {
  const Eigen::VectorXd vs = feature_vector(est, s);
  const Eigen::VectorXd vt = feature_vector(est, t);
  return vs.dot(est.B * vt);
}

Eigen::MatrixXd evaluate_grid(const CovarianceEstimate& est, const std::vector<double>& pts) {
  const Eigen::MatrixXd z = kernel_cross(est.spec, est.anchor_points, pts);  // N x G
  const Eigen::MatrixXd p = est.factor.M_pinv * z;                           // q x G
  Eigen::MatrixXd e = p.transpose() * est.B * p;
  Eigen::MatrixXd sym = 0.5 * (e + e.transpose());
  return sym;
}

double correlation(const CovarianceEstimate& est, double s, double t) {
  constexpr double kFloor = 1e-12;
  const double vs = evaluate(est, s, s);
  const double vt = evaluate(est, t, t);
  if (!(vs > kFloor))
    throw NumericalError("correlation: degenerate variance " + std::to_string(vs) +
                         " at t = " + std::to_string(s));
  if (!(vt > kFloor))
    throw NumericalError("correlation: degenerate variance " + std::to_string(vt) +
                         " at t = " + std::to_string(t));
  return evaluate(est, s, t) / std::sqrt(vs * vt);
}

CvFolds make_cv_folds(const FunctionalDataset& data, const MeanEstimate& mean,
                      const KernelSpec& spec, int folds, std::uint64_t seed,
                      double rel_tol) {
  if (folds < 2) throw InputError("cross_validate: need at least 2 folds");
  const std::size_t n = data.n_curves();
  if (n < 2) throw InputError("cross_validate: need at least 2 curves");

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(mix_seed(seed, 0x8c76f5u));
  shuffle_indices(order, rng);
  std::vector<int> fold_of(n);
  for (std::size_t p = 0; p < n; ++p) fold_of[order[p]] = static_cast<int>(p % folds);

  CvFolds out;
  out.folds.resize(static_cast<std::size_t>(folds));
  for (int f = 0; f < folds; ++f) {
    auto& fold = out.folds[static_cast<std::size_t>(f)];
    FunctionalDataset train;
    std::vector<const Curve*> val;
    for (std::size_t i = 0; i < n; ++i) {
      if (fold_of[i] == f) {
        if (data.curves[i].size() >= 2) val.push_back(&data.curves[i]);
      } else {
        train.curves.push_back(data.curves[i]);
      }
    }
    double pairs = 0.0;
    for (const Curve* c : val) {
      const double m = static_cast<double>(c->size());
      pairs += m * (m - 1.0);
    }
    if (val.empty() || pairs <= 0.0) {
      ++out.skipped;
      continue;
    }
    try {
      fold.design = build_design(train, mean, spec, rel_tol);
    } catch (const InputError&) {
      ++out.skipped;
      continue;
    }
    fold.val_pair_count = pairs;
    for (const Curve* c : val) {
      const Eigen::VectorXd r = residuals(*c, mean);
      fold.val_z.push_back(r * r.transpose());
      const Eigen::MatrixXd g = kernel_cross(spec, c->t, fold.design.anchor_points);
      fold.val_h.push_back(g * fold.design.factor.M_pinv.transpose());
    }
    fold.usable = true;
  }
  return out;
}

CvResult cross_validate(const CvFolds& folds, const FitOptions& opts_template,
                        const std::vector<double>& lambda_grid) {
  if (lambda_grid.empty()) throw InputError("cross_validate: empty lambda grid");
  for (double l : lambda_grid)
    if (!(l > 0.0)) throw InputError("cross_validate: lambda values must be positive");

  std::vector<double> descending = lambda_grid;
  std::sort(descending.begin(), descending.end(), std::greater<>());

  CvResult out;
  out.skipped_folds = folds.skipped;
  std::vector<double> sums(descending.size(), 0.0);
  int used_folds = 0;

  for (std::size_t f = 0; f < folds.folds.size(); ++f) {
    const auto& fold = folds.folds[f];
    if (!fold.usable) continue;
    ++used_folds;
    FitOptions opts = opts_template;
    // Warm starts along the decreasing-lambda path.
    for (std::size_t j = 0; j < descending.size(); ++j) {
      opts.lambda = descending[j];
      const CovarianceEstimate est = apg_fit(fold.design, opts);
      opts.B0 = est.B;
      double vloss = 0.0;
      for (std::size_t i = 0; i < fold.val_z.size(); ++i) {
        Eigen::MatrixXd ri = fold.val_h[i] * est.B * fold.val_h[i].transpose() - fold.val_z[i];
        ri.diagonal().setZero();
        vloss += ri.squaredNorm();
      }
      vloss /= fold.val_pair_count;
      sums[j] += vloss;
      out.table.push_back(CvCell{static_cast<int>(f), descending[j], vloss});
    }
  }
  if (used_folds == 0) throw InputError("cross_validate: every fold was unusable");

  double best_loss = std::numeric_limits<double>::infinity();
  double best_lambda = std::numeric_limits<double>::quiet_NaN();
  // Scan ascending so exact ties resolve toward the larger lambda.
  for (std::size_t j = descending.size(); j-- > 0;) {
    const double mean_loss = sums[j] / used_folds;
    if (std::isfinite(mean_loss) && mean_loss <= best_loss) {
      best_loss = mean_loss;
      best_lambda = descending[j];
    }
  }
  if (!std::isfinite(best_loss))
    throw NumericalError("cross_validate: no finite validation loss");
  out.best_lambda = best_lambda;

  std::sort(out.table.begin(), out.table.end(), [](const CvCell& a, const CvCell& b) {
    return a.fold != b.fold ? a.fold < b.fold : a.lambda < b.lambda;
  });
  return out;
}

CvResult cross_validate(const FunctionalDataset& data, const MeanEstimate& mean,
                        const KernelSpec& spec, const FitOptions& opts_template,
                        const std::vector<double>& lambda_grid, int folds,
                        std::uint64_t seed) {
  const CvFolds prepared = make_cv_folds(data, mean, spec, folds, seed);
  return cross_validate(prepared, opts_template, lambda_grid);
}

}  // namespace fdacov
