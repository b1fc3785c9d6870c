#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fdacov/dataset.hpp"
#include "fdacov/model_io.hpp"
#include "fdacov/simulate.hpp"

namespace fdacov::cli {

// Long-format CSV with header curve_id,t,y. Malformed rows raise InputError
// listing the offending line numbers; curves keep first-appearance order.
FunctionalDataset read_long_csv(const std::string& path);

// Applies/validates the time domain in place and returns the map used.
TimeRescale apply_time_domain(FunctionalDataset& data, bool rescale);

struct FitArgs {
  std::string input;
  std::string output = "model.json";
  std::string penalty = "trace";  // trace | hs
  bool psd = true;
  std::optional<double> lambda;   // fixed lambda; otherwise cross-validated
  std::string cv_grid;            // "lo:hi:k", empty = default grid
  int folds = 5;
  std::uint64_t seed = 1;
  bool rescale_time = false;
  std::string mean = "gcv";       // gcv | zero
  int quad_nodes = 128;
};

struct EvalGridArgs {
  std::string model;
  std::string output = "grid.csv";
  int grid = 0;               // dense grid size; 0 means use points_file
  std::string points_file;    // CSV with header s,t
  bool corr = false;
};

struct EigenArgs {
  std::string model;
  std::string out_prefix = "eigen";  // writes <prefix>.csv and <prefix>.json
  int k = 0;                         // components to report; 0 = all
  int grid = 101;
  int quad_nodes = 0;                // 0 = value stored in the model
};

struct ScoresArgs {
  std::string model;
  std::string input;
  std::string output = "scores.csv";
  int k = 1;
  int quad_nodes = 0;
};

struct SimulateArgs {
  std::string config_file;  // optional JSON config; flags below otherwise
  std::string out_prefix = "report";
  SimConfig config;
};

void cmd_fit(const FitArgs& args);
void cmd_eval_grid(const EvalGridArgs& args);
void cmd_eigen(const EigenArgs& args);
void cmd_scores(const ScoresArgs& args);
void cmd_simulate(const SimulateArgs& args);

// Shared helpers (also used by tests).
std::vector<double> parse_lambda_grid(const std::string& text);
void write_text_atomic(const std::string& path, const std::string& content);
std::string report_to_csv(const ExperimentReport& report);
std::string report_to_json(const ExperimentReport& report);
SimConfig sim_config_from_json_file(const std::string& path);

}  // namespace fdacov::cli
