#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fdacov/covest.hpp"
#include "fdacov/eigensys.hpp"
#include "fdacov/kernel.hpp"
#include "fdacov/meanfit.hpp"
#include "fdacov/model_io.hpp"
#include "fdacov/simulate.hpp"
#include "fdacov/spectral.hpp"

namespace py = pybind11;
using namespace fdacov;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Positive-semidefinite, low-rank covariance function estimation for "
            "sparsely observed functional data";
  m.attr("__version__") = "0.1.0";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

  py::enum_<Penalty>(m, "Penalty")
      .value("TRACE_PSD", Penalty::TracePSD)
      .value("TRACE_SYM", Penalty::TraceSym)
      .value("HS_PSD", Penalty::HSPSD)
      .value("HS_SYM", Penalty::HSSym);

  py::class_<KernelSpec>(m, "KernelSpec")
      .def(py::init<>())
      .def_readwrite("order", &KernelSpec::order);

  py::class_<QuadratureRule>(m, "QuadratureRule")
      .def_readonly("nodes", &QuadratureRule::nodes)
      .def_readonly("weights", &QuadratureRule::weights);

  py::class_<Curve>(m, "Curve")
      .def(py::init([](std::string id, std::vector<double> t, std::vector<double> y) {
             if (t.size() != y.size())
               throw InputError("Curve: t and y must have the same length");
             return Curve{std::move(id), std::move(t), std::move(y)};
           }),
           py::arg("id"), py::arg("t"), py::arg("y"))
      .def_readonly("id", &Curve::id)
      .def_readonly("t", &Curve::t)
      .def_readonly("y", &Curve::y);

  py::class_<FunctionalDataset>(m, "FunctionalDataset")
      .def(py::init<>())
      .def("add_curve",
           [](FunctionalDataset& self, std::string id, std::vector<double> t,
              std::vector<double> y) {
             if (t.size() != y.size())
               throw InputError("add_curve: t and y must have the same length");
             self.curves.push_back(Curve{std::move(id), std::move(t), std::move(y)});
           },
           py::arg("id"), py::arg("t"), py::arg("y"))
      .def_readonly("curves", &FunctionalDataset::curves)
      .def("n_curves", &FunctionalDataset::n_curves)
      .def("n_observations", &FunctionalDataset::n_observations);

  py::class_<MeanEstimate>(m, "MeanEstimate")
      .def_static("zero", &MeanEstimate::zero)
      .def_readonly("anchor_points", &MeanEstimate::anchor_points)
      .def_readonly("coefficients", &MeanEstimate::coefficients)
      .def_readonly("gcv_lambda", &MeanEstimate::gcv_lambda)
      .def("__call__", &eval_mean, py::arg("t"))
      .def("evaluate", &eval_mean_many, py::arg("ts"));

  py::class_<GramFactor>(m, "GramFactor")
      .def_readonly("M", &GramFactor::M)
      .def_readonly("M_pinv", &GramFactor::M_pinv)
      .def_readonly("rank_q", &GramFactor::rank_q)
      .def_readonly("rel_tol", &GramFactor::rel_tol);

  py::class_<DesignCache>(m, "DesignCache")
      .def_readonly("normalizer", &DesignCache::normalizer)
      .def_readonly("anchor_points", &DesignCache::anchor_points)
      .def_readonly("dropped_curves", &DesignCache::dropped_curves)
      .def_property_readonly("q", &DesignCache::q)
      .def_readonly("factor", &DesignCache::factor);

  py::class_<FitOptions>(m, "FitOptions")
      .def(py::init<>())
      .def_readwrite("penalty", &FitOptions::penalty)
      .def_readwrite("lambda_", &FitOptions::lambda)
      .def_readwrite("B0", &FitOptions::B0)
      .def_readwrite("L_hat", &FitOptions::L_hat)
      .def_readwrite("eta", &FitOptions::eta)
      .def_readwrite("alpha", &FitOptions::alpha)
      .def_readwrite("max_iter", &FitOptions::max_iter)
      .def_readwrite("rel_tol", &FitOptions::rel_tol);

  py::class_<CovarianceEstimate>(m, "CovarianceEstimate")
      .def_readonly("B", &CovarianceEstimate::B)
      .def_readonly("anchor_points", &CovarianceEstimate::anchor_points)
      .def_readonly("penalty", &CovarianceEstimate::penalty)
      .def_readonly("lambda_used", &CovarianceEstimate::lambda_used)
      .def_readonly("iterations", &CovarianceEstimate::iterations)
      .def_readonly("objective_trace", &CovarianceEstimate::objective_trace)
      .def_readonly("factor", &CovarianceEstimate::factor)
      .def("__call__", &evaluate, py::arg("s"), py::arg("t"))
      .def("evaluate_grid", &evaluate_grid, py::arg("pts"))
      .def("correlation", &correlation, py::arg("s"), py::arg("t"));

  py::class_<CvCell>(m, "CvCell")
      .def_readonly("fold", &CvCell::fold)
      .def_readonly("lambda_", &CvCell::lambda)
      .def_readonly("val_loss", &CvCell::val_loss);

  py::class_<CvResult>(m, "CvResult")
      .def_readonly("best_lambda", &CvResult::best_lambda)
      .def_readonly("table", &CvResult::table)
      .def_readonly("skipped_folds", &CvResult::skipped_folds);

  py::class_<EigenSystem>(m, "EigenSystem")
      .def_readonly("values", &EigenSystem::values)
      .def_readonly("coeffs", &EigenSystem::coeffs)
      .def_readonly("fve", &EigenSystem::fve)
      .def("n_components", &EigenSystem::n_components);

  py::class_<TrueCovariance>(m, "TrueCovariance")
      .def_readonly("L", &TrueCovariance::L)
      .def("__call__", &TrueCovariance::eval, py::arg("s"), py::arg("t"));

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_readwrite("n", &SimConfig::n)
      .def_readwrite("m", &SimConfig::m)
      .def_readwrite("L", &SimConfig::L)
      .def_readwrite("noise_var", &SimConfig::noise_var)
      .def_readwrite("n_reps", &SimConfig::n_reps)
      .def_readwrite("seed", &SimConfig::seed)
      .def_readwrite("methods", &SimConfig::methods)
      .def_readwrite("use_true_mean_zero", &SimConfig::use_true_mean_zero)
      .def_readwrite("cv_folds", &SimConfig::cv_folds)
      .def_readwrite("quad_nodes", &SimConfig::quad_nodes)
      .def_readwrite("workers", &SimConfig::workers);

  py::class_<GeneratedData>(m, "GeneratedData")
      .def_readonly("data", &GeneratedData::data)
      .def_readonly("true_cov", &GeneratedData::true_cov)
      .def_readonly("xi", &GeneratedData::xi);

  py::class_<ReplicateRecord>(m, "ReplicateRecord")
      .def_readonly("rep", &ReplicateRecord::rep)
      .def_readonly("method", &ReplicateRecord::method)
      .def_readonly("success", &ReplicateRecord::success)
      .def_readonly("ise", &ReplicateRecord::ise)
      .def_readonly("rank", &ReplicateRecord::rank)
      .def_readonly("lambda_", &ReplicateRecord::lambda)
      .def_readonly("iterations", &ReplicateRecord::iterations)
      .def_readonly("error", &ReplicateRecord::error);

  py::class_<MethodSummary>(m, "MethodSummary")
      .def_readonly("method", &MethodSummary::method)
      .def_readonly("n_success", &MethodSummary::n_success)
      .def_readonly("mean_aise", &MethodSummary::mean_aise)
      .def_readonly("se_aise", &MethodSummary::se_aise)
      .def_readonly("mean_rank", &MethodSummary::mean_rank)
      .def_readonly("success_rate", &MethodSummary::success_rate);

  py::class_<ExperimentReport>(m, "ExperimentReport")
      .def_readonly("records", &ExperimentReport::records)
      .def_readonly("summaries", &ExperimentReport::summaries);

  m.def("kernel_eval", &kernel_eval, py::arg("spec"), py::arg("s"), py::arg("t"));
  m.def("gram", &gram, py::arg("spec"), py::arg("points"));
  m.def("kernel_cross", &kernel_cross, py::arg("spec"), py::arg("a"), py::arg("b"));
  m.def("make_quadrature", &make_quadrature, py::arg("n_nodes"));
  m.def("l2_cross_gram", &l2_cross_gram, py::arg("spec"), py::arg("points"), py::arg("rule"));

  m.def("svec", &svec, py::arg("B"));
  m.def("svec_inv", &svec_inv, py::arg("v"));
  m.def("prox_trace_psd", &prox_trace_psd, py::arg("B"), py::arg("nu"));
  m.def("prox_trace_sym", &prox_trace_sym, py::arg("B"), py::arg("nu"));
  m.def("prox_hs_psd", &prox_hs_psd, py::arg("B"), py::arg("nu"));
  m.def("prox_hs_sym", &prox_hs_sym, py::arg("B"), py::arg("nu"));
  m.def("factor_gram", &factor_gram, py::arg("ktilde"), py::arg("curve_sizes"),
        py::arg("rel_tol") = 1e-10);

  m.def("fit_mean", &fit_mean, py::arg("data"), py::arg("spec"), py::arg("lambda_grid"));
  m.def("default_mean_lambda_grid", &default_mean_lambda_grid);

  m.def("build_design", &build_design, py::arg("data"), py::arg("mean"), py::arg("spec"),
        py::arg("rel_tol") = 1e-10);
  m.def("loss_and_grad", &loss_and_grad, py::arg("design"), py::arg("B"));
  m.def("lambda_max", &lambda_max, py::arg("design"));
  m.def("apg_fit", &apg_fit, py::arg("design"), py::arg("options"),
        py::call_guard<py::gil_scoped_release>());
  m.def("cross_validate",
        py::overload_cast<const FunctionalDataset&, const MeanEstimate&, const KernelSpec&,
                          const FitOptions&, const std::vector<double>&, int, std::uint64_t>(
            &cross_validate),
        py::arg("data"), py::arg("mean"), py::arg("spec"), py::arg("options"),
        py::arg("lambda_grid"), py::arg("folds") = 5, py::arg("seed") = 1,
        py::call_guard<py::gil_scoped_release>());
  m.def("default_cv_lambda_grid", &default_cv_lambda_grid);

  m.def("l2_eigen", &l2_eigen, py::arg("estimate"), py::arg("rule"));
  m.def("eigenfunction_values", &eigenfunction_values, py::arg("system"), py::arg("estimate"),
        py::arg("k"), py::arg("ts"));
  m.def("numerical_rank", &numerical_rank, py::arg("estimate"), py::arg("rel_tol") = 1e-6);
  m.def("fpc_scores", &fpc_scores, py::arg("data"), py::arg("mean"), py::arg("system"),
        py::arg("estimate"), py::arg("k"), py::arg("rule"), py::arg("presmooth_grid"));

  m.def("true_mean", &true_mean, py::arg("t"));
  m.def("generate_dataset", &generate_dataset, py::arg("config"), py::arg("rep_index"));
  m.def("aise",
        py::overload_cast<const CovarianceEstimate&, const TrueCovariance&,
                          const QuadratureRule&>(&aise),
        py::arg("estimate"), py::arg("truth"), py::arg("rule"));
  m.def("run_experiment", &run_experiment, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
}
