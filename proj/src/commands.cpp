#include "fdacov/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "fdacov/eigensys.hpp"
#include "json.hpp"

namespace fdacov::cli {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& field, double& out) {
  const std::string t = trim(field);
  if (t.empty()) return false;
  char* end = nullptr;
  out = std::strtod(t.c_str(), &end);
  return end == t.c_str() + t.size() && std::isfinite(out);
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

void write_text_atomic(const std::string& path, const std::string& content) {
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

FunctionalDataset read_long_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open input file " + path);

  std::string line;
  if (!std::getline(in, line)) throw InputError(path + ": empty file");
  {
    auto header = split_csv_line(trim(line));
    for (auto& h : header) h = trim(h);
    if (header.size() != 3 || header[0] != "curve_id" || header[1] != "t" || header[2] != "y")
      throw InputError(path + ": expected header 'curve_id,t,y'");
  }

  FunctionalDataset data;
  std::map<std::string, std::size_t> index;
  std::vector<long> bad_lines;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    double t = 0.0, y = 0.0;
    if (fields.size() != 3 || trim(fields[0]).empty() || !parse_double(fields[1], t) ||
        !parse_double(fields[2], y)) {
      bad_lines.push_back(line_no);
      continue;
    }
    const std::string id = trim(fields[0]);
    auto it = index.find(id);
    if (it == index.end()) {
      index.emplace(id, data.curves.size());
      data.curves.push_back(Curve{id, {t}, {y}});
    } else {
      data.curves[it->second].t.push_back(t);
      data.curves[it->second].y.push_back(y);
    }
  }
  if (!bad_lines.empty()) {
    std::string msg = path + ": malformed rows at lines";
    for (std::size_t i = 0; i < bad_lines.size() && i < 20; ++i)
      msg += (i ? "," : "") + std::string(" ") + std::to_string(bad_lines[i]);
    if (bad_lines.size() > 20) msg += " ... (" + std::to_string(bad_lines.size()) + " total)";
    throw InputError(msg);
  }
  if (data.curves.empty()) throw InputError(path + ": no data rows");
  return data;
}

TimeRescale apply_time_domain(FunctionalDataset& data, bool rescale) {
  TimeRescale map;
  if (rescale) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& c : data.curves)
      for (double t : c.t) {
        lo = std::min(lo, t);
        hi = std::max(hi, t);
      }
    if (!(hi > lo))
      throw InputError("rescale-time: degenerate time range [" + std::to_string(lo) + ", " +
                       std::to_string(hi) + "]");
    map.enabled = true;
    map.t_min = lo;
    map.t_max = hi;
    for (auto& c : data.curves)
      for (double& t : c.t) t = map.to_unit(t);
  } else {
    for (const auto& c : data.curves)
      for (double t : c.t)
        if (!(t >= 0.0 && t <= 1.0))
          throw InputError("curve " + c.id + ": t = " + std::to_string(t) +
                           " outside [0,1]; pass --rescale-time to map times");
  }
  return map;
}

std::vector<double> parse_lambda_grid(const std::string& text) {
  // "lo:hi:k" log-spaced.
  const auto p1 = text.find(':');
  const auto p2 = text.find(':', p1 == std::string::npos ? p1 : p1 + 1);
  double lo = 0.0, hi = 0.0;
  if (p1 == std::string::npos || p2 == std::string::npos ||
      !parse_double(text.substr(0, p1), lo) ||
      !parse_double(text.substr(p1 + 1, p2 - p1 - 1), hi))
    throw InputError("cv-grid: expected lo:hi:k, got '" + text + "'");
  int k = 0;
  try {
    k = std::stoi(text.substr(p2 + 1));
  } catch (...) {
    throw InputError("cv-grid: expected lo:hi:k, got '" + text + "'");
  }
  if (!(lo > 0.0) || !(hi > lo) || k < 2)
    throw InputError("cv-grid: need 0 < lo < hi and k >= 2");
  std::vector<double> grid(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i)
    grid[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, double(i) / (k - 1));
  return grid;
}

void cmd_fit(const FitArgs& args) {
  FunctionalDataset data = read_long_csv(args.input);
  const TimeRescale rescale = apply_time_domain(data, args.rescale_time);
  const KernelSpec spec;

  MeanEstimate mean;
  if (args.mean == "gcv")
    mean = fit_mean(data, spec, default_mean_lambda_grid());
  else if (args.mean == "zero")
    mean = MeanEstimate::zero();
  else
    throw InputError("fit: --mean must be 'gcv' or 'zero'");

  Penalty penalty;
  if (args.penalty == "trace")
    penalty = args.psd ? Penalty::TracePSD : Penalty::TraceSym;
  else if (args.penalty == "hs")
    penalty = args.psd ? Penalty::HSPSD : Penalty::HSSym;
  else
    throw InputError("fit: --penalty must be 'trace' or 'hs'");

  const DesignCache design = build_design(data, mean, spec);
  if (design.dropped_curves > 0)
    std::cerr << "fit: dropped " << design.dropped_curves
              << " curve(s) with fewer than 2 observations\n";

  FitOptions opts;
  opts.penalty = penalty;
  std::vector<CvCell> cv_table;
  if (args.lambda) {
    if (!(*args.lambda >= 0.0)) throw InputError("fit: --lambda must be nonnegative");
    opts.lambda = *args.lambda;
  } else {
    const std::vector<double> grid =
        args.cv_grid.empty() ? default_cv_lambda_grid() : parse_lambda_grid(args.cv_grid);
    const CvResult cv = cross_validate(data, mean, spec, opts, grid, args.folds, args.seed);
    opts.lambda = cv.best_lambda;
    cv_table = cv.table;
    std::cerr << "fit: cross-validated lambda = " << opts.lambda << "\n";
  }

  const CovarianceEstimate est = apg_fit(design, opts);
  std::cerr << "fit: " << est.iterations << " iterations, objective "
            << (est.objective_trace.empty() ? 0.0 : est.objective_trace.back()) << "\n";

  const Model model =
      make_model(est, mean, rescale, cv_table, design.dropped_curves, args.quad_nodes);
  save_model(model, args.output);
}

void cmd_eval_grid(const EvalGridArgs& args) {
  const Model model = load_model(args.model);
  const CovarianceEstimate est = model.estimate();

  std::vector<double> s_pts, t_pts;  // unit-interval coordinates, paired rows
  bool dense_grid = false;
  std::vector<double> grid_pts;
  if (args.grid > 0) {
    if (args.grid < 2) throw InputError("eval-grid: --grid must be at least 2");
    dense_grid = true;
    grid_pts.resize(static_cast<std::size_t>(args.grid));
    for (int i = 0; i < args.grid; ++i)
      grid_pts[static_cast<std::size_t>(i)] = double(i) / (args.grid - 1);
  } else if (!args.points_file.empty()) {
    std::ifstream in(args.points_file);
    if (!in) throw InputError("cannot open points file " + args.points_file);
    std::string line;
    if (!std::getline(in, line) || trim(line) != "s,t")
      throw InputError(args.points_file + ": expected header 's,t'");
    long line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      const auto fields = split_csv_line(line);
      double s = 0.0, t = 0.0;
      if (fields.size() != 2 || !parse_double(fields[0], s) || !parse_double(fields[1], t))
        throw InputError(args.points_file + ": malformed row at line " + std::to_string(line_no));
      s = model.rescale.to_unit(s);
      t = model.rescale.to_unit(t);
      if (!(s >= 0.0 && s <= 1.0 && t >= 0.0 && t <= 1.0))
        throw InputError(args.points_file + ": point outside the fitted time range at line " +
                         std::to_string(line_no));
      s_pts.push_back(s);
      t_pts.push_back(t);
    }
    if (s_pts.empty()) throw InputError(args.points_file + ": no points");
  } else {
    throw InputError("eval-grid: pass --grid K or --points FILE");
  }

  constexpr double kVarFloor = 1e-12;
  std::ostringstream csv;
  csv << (args.corr ? "s,t,cov,corr\n" : "s,t,cov\n");

  if (dense_grid) {
    const Eigen::MatrixXd cov = evaluate_grid(est, grid_pts);
    const int k = args.grid;
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) {
        const double s_orig = model.rescale.to_original(grid_pts[static_cast<std::size_t>(i)]);
        const double t_orig = model.rescale.to_original(grid_pts[static_cast<std::size_t>(j)]);
        csv << fmt_double(s_orig) << ',' << fmt_double(t_orig) << ',' << fmt_double(cov(i, j));
        if (args.corr) {
          const double vs = cov(i, i), vt = cov(j, j);
          csv << ',';
          if (vs > kVarFloor && vt > kVarFloor)
            csv << fmt_double(cov(i, j) / std::sqrt(vs * vt));
        }
        csv << '\n';
      }
    }
    const SymEig es = sym_eig(cov);
    const double min_eig = es.values[es.values.size() - 1];
    std::cerr << "eval-grid: grid matrix min eigenvalue " << min_eig
              << (min_eig >= -1e-8 * std::max(1.0, es.values[0]) ? " (PSD)" : " (not PSD)")
              << "\n";
  } else {
    for (std::size_t r = 0; r < s_pts.size(); ++r) {
      const double c = evaluate(est, s_pts[r], t_pts[r]);
      csv << fmt_double(model.rescale.to_original(s_pts[r])) << ','
          << fmt_double(model.rescale.to_original(t_pts[r])) << ',' << fmt_double(c);
      if (args.corr) {
        const double vs = evaluate(est, s_pts[r], s_pts[r]);
        const double vt = evaluate(est, t_pts[r], t_pts[r]);
        csv << ',';
        if (vs > kVarFloor && vt > kVarFloor) csv << fmt_double(c / std::sqrt(vs * vt));
      }
      csv << '\n';
    }
  }
  write_text_atomic(args.output, csv.str());
}

void cmd_eigen(const EigenArgs& args) {
  const Model model = load_model(args.model);
  const CovarianceEstimate est = model.estimate();
  const int nodes = args.quad_nodes > 0 ? args.quad_nodes : model.quad_nodes;
  const QuadratureRule rule = make_quadrature(nodes);
  const EigenSystem sys = l2_eigen(est, rule);

  const int k_all = sys.n_components();
  const int k = args.k > 0 ? std::min(args.k, k_all) : k_all;
  if (args.grid < 2) throw InputError("eigen: --grid must be at least 2");
  std::vector<double> grid_pts(static_cast<std::size_t>(args.grid));
  for (int i = 0; i < args.grid; ++i)
    grid_pts[static_cast<std::size_t>(i)] = double(i) / (args.grid - 1);

  std::ostringstream csv;
  csv << "k,zeta,t,phi\n";
  for (int comp = 1; comp <= k; ++comp) {
    const Eigen::VectorXd phi = eigenfunction_values(sys, est, comp, grid_pts);
    for (int i = 0; i < args.grid; ++i) {
      csv << comp << ',' << fmt_double(sys.values[comp - 1]) << ','
          << fmt_double(model.rescale.to_original(grid_pts[static_cast<std::size_t>(i)])) << ','
          << fmt_double(phi[i]) << '\n';
    }
  }
  write_text_atomic(args.out_prefix + ".csv", csv.str());

  json j;
  j["eigenvalues"] = std::vector<double>(sys.values.data(), sys.values.data() + sys.values.size());
  j["fve"] = sys.fve;
  j["rank"] = numerical_rank(est);
  j["components_reported"] = k;
  write_text_atomic(args.out_prefix + ".json", j.dump(1));
}

void cmd_scores(const ScoresArgs& args) {
  const Model model = load_model(args.model);
  const CovarianceEstimate est = model.estimate();
  FunctionalDataset data = read_long_csv(args.input);
  if (model.rescale.enabled) {
    for (auto& c : data.curves)
      for (double& t : c.t) t = model.rescale.to_unit(t);
  }
  for (const auto& c : data.curves)
    for (double t : c.t)
      if (!(t >= 0.0 && t <= 1.0))
        throw InputError("scores: curve " + c.id + " has t outside the fitted time range");

  const int nodes = args.quad_nodes > 0 ? args.quad_nodes : model.quad_nodes;
  const QuadratureRule rule = make_quadrature(nodes);
  const EigenSystem sys = l2_eigen(est, rule);
  const int k = std::min(args.k, sys.n_components());
  if (k < 1) throw InputError("scores: the model has no usable components");

  std::vector<std::vector<double>> cols;
  for (int comp = 1; comp <= k; ++comp)
    cols.push_back(
        fpc_scores(data, model.mean, sys, est, comp, rule, default_mean_lambda_grid()));

  std::ostringstream csv;
  csv << "curve_id";
  for (int comp = 1; comp <= k; ++comp) csv << ",score_" << comp;
  csv << '\n';
  for (std::size_t i = 0; i < data.curves.size(); ++i) {
    csv << csv_escape(data.curves[i].id);
    for (int comp = 0; comp < k; ++comp) {
      csv << ',';
      const double v = cols[static_cast<std::size_t>(comp)][i];
      if (std::isfinite(v)) csv << fmt_double(v);
    }
    csv << '\n';
  }
  write_text_atomic(args.output, csv.str());
}

SimConfig sim_config_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw InputError("config file " + path + " is not valid JSON: " + e.what());
  }
  SimConfig cfg;
  cfg.n = j.value("n", cfg.n);
  cfg.m = j.value("m", cfg.m);
  cfg.L = j.value("L", cfg.L);
  cfg.noise_var = j.value("noise_var", cfg.noise_var);
  cfg.n_reps = j.value("n_reps", cfg.n_reps);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.use_true_mean_zero = j.value("use_true_mean_zero", cfg.use_true_mean_zero);
  cfg.cv_folds = j.value("cv_folds", cfg.cv_folds);
  cfg.quad_nodes = j.value("quad_nodes", cfg.quad_nodes);
  cfg.workers = j.value("workers", cfg.workers);
  if (j.contains("methods")) {
    cfg.methods.clear();
    for (const auto& name : j.at("methods"))
      cfg.methods.push_back(penalty_from_name(name.get<std::string>()));
  }
  return cfg;
}

std::string report_to_csv(const ExperimentReport& report) {
  std::ostringstream csv;
  csv << "rep,method,success,ise,rank,lambda,iterations,error\n";
  for (const auto& rec : report.records) {
    csv << rec.rep << ',' << penalty_name(rec.method) << ',' << (rec.success ? 1 : 0) << ',';
    if (rec.success)
      csv << fmt_double(rec.ise) << ',' << rec.rank << ',' << fmt_double(rec.lambda) << ','
          << rec.iterations;
    else
      csv << ",,,";
    csv << ',' << csv_escape(rec.error) << '\n';
  }
  return csv.str();
}

std::string report_to_json(const ExperimentReport& report) {
  json j;
  j["config"] = {{"n", report.config.n},
                 {"m", report.config.m},
                 {"L", report.config.L},
                 {"noise_var", report.config.noise_var},
                 {"n_reps", report.config.n_reps},
                 {"seed", report.config.seed},
                 {"use_true_mean_zero", report.config.use_true_mean_zero},
                 {"cv_folds", report.config.cv_folds},
                 {"quad_nodes", report.config.quad_nodes}};
  json methods = json::array();
  for (Penalty p : report.config.methods) methods.push_back(penalty_name(p));
  j["config"]["methods"] = methods;
  json summaries = json::array();
  for (const auto& s : report.summaries) {
    summaries.push_back({{"method", penalty_name(s.method)},
                         {"n_success", s.n_success},
                         {"mean_aise", s.mean_aise},
                         {"se_aise", s.se_aise},
                         {"mean_rank", s.mean_rank},
                         {"success_rate", s.success_rate}});
  }
  j["summaries"] = summaries;
  return j.dump(1);
}

void cmd_simulate(const SimulateArgs& args) {
  const SimConfig cfg =
      args.config_file.empty() ? args.config : sim_config_from_json_file(args.config_file);
  const ExperimentReport report = run_experiment(cfg);
  write_text_atomic(args.out_prefix + ".csv", report_to_csv(report));
  write_text_atomic(args.out_prefix + ".json", report_to_json(report));
  for (const auto& s : report.summaries)
    std::cerr << "simulate: " << penalty_name(s.method) << " mean AISE " << s.mean_aise
              << " (se " << s.se_aise << "), mean rank " << s.mean_rank << ", success "
              << 100.0 * s.success_rate << "%\n";
}

}  // namespace fdacov::cli
