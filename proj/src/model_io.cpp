#include "fdacov/model_io.hpp"

#include <cstdio>
#include <fstream>

#include "json.hpp"

namespace fdacov {

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
  // Row-major flat layout.
  json arr = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) arr.push_back(m(i, j));
  return arr;
}

Eigen::MatrixXd matrix_from_json(const json& arr, Eigen::Index rows, Eigen::Index cols,
                                 const char* what) {
  if (static_cast<Eigen::Index>(arr.size()) != rows * cols)
    throw InputError(std::string("model: ") + what + " has wrong length");
  Eigen::MatrixXd m(rows, cols);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = arr[static_cast<std::size_t>(k++)];
  return m;
}

void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot open " + tmp + " for writing");
    out << content;
    if (!out) throw InputError("failed to write " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw InputError("failed to move " + tmp + " into place");
}

}  // namespace

CovarianceEstimate Model::estimate() const {
  CovarianceEstimate est;
  est.B = B;
  est.factor.M_pinv = M_pinv;
  est.factor.rank_q = M_pinv.rows();
  est.factor.rel_tol = factor_rel_tol;
  est.spec = spec;
  est.anchor_points = anchor_points;
  est.penalty = penalty;
  est.lambda_used = lambda_used;
  est.iterations = iterations;
  return est;
}

Model make_model(const CovarianceEstimate& est, const MeanEstimate& mean,
                 const TimeRescale& rescale, const std::vector<CvCell>& cv_table,
                 int dropped_curves, int quad_nodes) {
  Model m;
  m.spec = est.spec;
  m.rescale = rescale;
  m.anchor_points = est.anchor_points;
  m.B = est.B;
  m.M_pinv = est.factor.M_pinv;
  m.factor_rel_tol = est.factor.rel_tol;
  m.penalty = est.penalty;
  m.lambda_used = est.lambda_used;
  m.iterations = est.iterations;
  m.final_objective = est.objective_trace.empty() ? 0.0 : est.objective_trace.back();
  m.dropped_curves = dropped_curves;
  m.quad_nodes = quad_nodes;
  m.cv_table = cv_table;
  m.mean = mean;
  return m;
}

void save_model(const Model& model, const std::string& path) {
  json j;
  j["format_version"] = model.format_version;
  j["kernel"] = {{"order", model.spec.order}, {"domain", {0.0, 1.0}}};
  j["time_rescale"] = {{"enabled", model.rescale.enabled},
                       {"t_min", model.rescale.t_min},
                       {"t_max", model.rescale.t_max}};
  j["anchor_points"] = model.anchor_points;
  j["rank_q"] = model.M_pinv.rows();
  j["B"] = matrix_to_json(model.B);
  j["M_pinv"] = matrix_to_json(model.M_pinv);
  j["factor_rel_tol"] = model.factor_rel_tol;
  j["penalty"] = penalty_name(model.penalty);
  j["lambda_used"] = model.lambda_used;
  j["fit"] = {{"iterations", model.iterations},
              {"final_objective", model.final_objective},
              {"dropped_curves", model.dropped_curves}};
  j["quad_nodes"] = model.quad_nodes;
  json cv = json::array();
  for (const auto& cell : model.cv_table)
    cv.push_back({{"fold", cell.fold}, {"lambda", cell.lambda}, {"val_loss", cell.val_loss}});
  j["cv_table"] = cv;
  if (model.mean.is_zero()) {
    j["mean"] = {{"type", "zero"}};
  } else {
    j["mean"] = {{"type", "gcv"},
                 {"anchor_points", model.mean.anchor_points},
                 {"coefficients", std::vector<double>(
                                      model.mean.coefficients.data(),
                                      model.mean.coefficients.data() + model.mean.coefficients.size())},
                 {"gcv_lambda", model.mean.gcv_lambda}};
  }
  atomic_write(path, j.dump(1));
}

Model load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open model file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw InputError("model file " + path + " is not valid JSON: " + e.what());
  }

  Model m;
  m.format_version = j.at("format_version").get<int>();
  if (m.format_version != 1)
    throw InputError("model: unsupported format_version " + std::to_string(m.format_version));
  m.spec.order = j.at("kernel").at("order").get<int>();
  const auto& rs = j.at("time_rescale");
  m.rescale.enabled = rs.at("enabled").get<bool>();
  m.rescale.t_min = rs.at("t_min").get<double>();
  m.rescale.t_max = rs.at("t_max").get<double>();
  m.anchor_points = j.at("anchor_points").get<std::vector<double>>();
  const Eigen::Index q = j.at("rank_q").get<Eigen::Index>();
  const Eigen::Index n = static_cast<Eigen::Index>(m.anchor_points.size());
  m.B = matrix_from_json(j.at("B"), q, q, "B");
  m.M_pinv = matrix_from_json(j.at("M_pinv"), q, n, "M_pinv");
  m.factor_rel_tol = j.value("factor_rel_tol", 1e-10);
  m.penalty = penalty_from_name(j.at("penalty").get<std::string>());
  m.lambda_used = j.at("lambda_used").get<double>();
  m.iterations = j.at("fit").at("iterations").get<int>();
  m.final_objective = j.at("fit").at("final_objective").get<double>();
  m.dropped_curves = j.at("fit").at("dropped_curves").get<int>();
  m.quad_nodes = j.value("quad_nodes", 128);
  for (const auto& cell : j.at("cv_table"))
    m.cv_table.push_back(CvCell{cell.at("fold").get<int>(), cell.at("lambda").get<double>(),
                                cell.at("val_loss").get<double>()});
  const auto& mean = j.at("mean");
  if (mean.at("type").get<std::string>() == "zero") {
    m.mean = MeanEstimate::zero();
  } else {
    m.mean.anchor_points = mean.at("anchor_points").get<std::vector<double>>();
    const auto coefs = mean.at("coefficients").get<std::vector<double>>();
    m.mean.coefficients =
        Eigen::Map<const Eigen::VectorXd>(coefs.data(), static_cast<Eigen::Index>(coefs.size()));
    m.mean.gcv_lambda = mean.at("gcv_lambda").get<double>();
  }
  return m;
}

}  // namespace fdacov
