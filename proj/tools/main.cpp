#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "fdacov/commands.hpp"

namespace {

std::vector<fdacov::Penalty> parse_methods(const std::string& list) {
  std::vector<fdacov::Penalty> out;
  std::string cur;
  for (char c : list + ",") {
    if (c == ',') {
      if (!cur.empty()) out.push_back(fdacov::penalty_from_name(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (out.empty()) throw fdacov::InputError("--methods: empty list");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Positive-semidefinite, low-rank covariance function estimation "
               "for sparsely observed functional data"};
  app.require_subcommand(1);

  using namespace fdacov::cli;

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a covariance model from long-format CSV");
  fit_cmd->add_option("input", fit.input, "Input CSV with header curve_id,t,y")->required();
  fit_cmd->add_option("-o,--output", fit.output, "Output model file (JSON)");
  fit_cmd->add_option("--penalty", fit.penalty, "Penalty: trace | hs")
      ->check(CLI::IsMember({"trace", "hs"}));
  fit_cmd->add_flag("--psd,!--no-psd", fit.psd, "Constrain the fit to the PSD cone (default on)");
  double lambda_value = -1.0;
  auto* lambda_opt = fit_cmd->add_option("--lambda", lambda_value, "Fixed lambda (skips CV)");
  fit_cmd->add_option("--cv-grid", fit.cv_grid, "CV grid as lo:hi:k (log-spaced)");
  fit_cmd->add_option("--folds", fit.folds, "CV folds")->check(CLI::Range(2, 1000));
  fit_cmd->add_option("--seed", fit.seed, "Seed for the CV fold shuffle");
  fit_cmd->add_flag("--rescale-time", fit.rescale_time, "Min-max map times onto [0,1]");
  fit_cmd->add_option("--mean", fit.mean, "Mean estimator: gcv | zero")
      ->check(CLI::IsMember({"gcv", "zero"}));
  fit_cmd->add_option("--quad-nodes", fit.quad_nodes, "Quadrature nodes stored with the model")
      ->check(CLI::Range(2, 100000));

  EvalGridArgs eval;
  auto* eval_cmd = app.add_subcommand("eval-grid", "Evaluate the fitted covariance on a grid");
  eval_cmd->add_option("model", eval.model, "Model file from 'fit'")->required();
  eval_cmd->add_option("-o,--output", eval.output, "Output CSV");
  eval_cmd->add_option("--grid", eval.grid, "Dense k x k grid over the time range");
  eval_cmd->add_option("--points", eval.points_file, "CSV of (s,t) pairs with header s,t");
  eval_cmd->add_flag("--corr", eval.corr, "Also emit the correlation");

  EigenArgs eig;
  auto* eig_cmd = app.add_subcommand("eigen", "Eigenvalues, eigenfunctions and FVE report");
  eig_cmd->add_option("model", eig.model, "Model file from 'fit'")->required();
  eig_cmd->add_option("-o,--out", eig.out_prefix, "Output prefix (.csv and .json)");
  eig_cmd->add_option("-k,--k", eig.k, "Components to report (default: all)");
  eig_cmd->add_option("--grid", eig.grid, "Grid size for eigenfunction values");
  eig_cmd->add_option("--quad-nodes", eig.quad_nodes, "Quadrature nodes (default: model value)");

  ScoresArgs scores;
  auto* scores_cmd = app.add_subcommand("scores", "Projection scores of curves onto eigenfunctions");
  scores_cmd->add_option("model", scores.model, "Model file from 'fit'")->required();
  scores_cmd->add_option("input", scores.input, "Input CSV with header curve_id,t,y")->required();
  scores_cmd->add_option("-o,--output", scores.output, "Output CSV");
  scores_cmd->add_option("-k,--k", scores.k, "Number of leading components")->check(CLI::Range(1, 10000));
  scores_cmd->add_option("--quad-nodes", scores.quad_nodes, "Quadrature nodes (default: model value)");

  SimulateArgs sim;
  std::string methods_list;
  auto* sim_cmd = app.add_subcommand("simulate", "Run the simulation experiment");
  sim_cmd->add_option("--config", sim.config_file, "JSON config (overrides the flags)");
  sim_cmd->add_option("-o,--out", sim.out_prefix, "Output prefix (.csv and .json)");
  sim_cmd->add_option("--n", sim.config.n, "Number of curves");
  sim_cmd->add_option("--m", sim.config.m, "Observations per curve");
  sim_cmd->add_option("--L", sim.config.L, "True covariance rank (2 or 4)");
  sim_cmd->add_option("--reps", sim.config.n_reps, "Replicates");
  sim_cmd->add_option("--noise-var", sim.config.noise_var, "Measurement noise variance");
  sim_cmd->add_option("--seed", sim.config.seed, "Base seed");
  sim_cmd->add_option("--methods", methods_list,
                      "Comma list of trace_psd,trace_sym,hs_psd,hs_sym");
  sim_cmd->add_flag("--mean-zero", sim.config.use_true_mean_zero,
                    "Generate centered data and fit with a zero mean");
  sim_cmd->add_option("--folds", sim.config.cv_folds, "CV folds");
  sim_cmd->add_option("--quad-nodes", sim.config.quad_nodes, "Quadrature nodes for the ISE");
  sim_cmd->add_option("--workers", sim.config.workers, "Parallel replicate workers (0 = auto)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fit_cmd) {
      if (*lambda_opt) fit.lambda = lambda_value;
      cmd_fit(fit);
    } else if (*eval_cmd) {
      cmd_eval_grid(eval);
    } else if (*eig_cmd) {
      cmd_eigen(eig);
    } else if (*scores_cmd) {
      cmd_scores(scores);
    } else if (*sim_cmd) {
      if (!methods_list.empty()) sim.config.methods = parse_methods(methods_list);
      cmd_simulate(sim);
    }
  } catch (const fdacov::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const fdacov::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
