#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace ggmc::cli {

struct RunConfig {
  std::string command;
  std::string data_file;
  std::string groups_file;
  std::string response_column;
  std::string beta_star_file;
  std::string out_prefix = "ggmc";
  double alpha = 0.6;
  double lambda = -1.0;  // < 0 means unset
  int nlambda = 100;
  double lambda_min_ratio = -1.0;  // < 0 means the n-vs-p default
  int folds = 5;
  std::uint64_t seed = 0;
  bool standardize = false;
  bool one_se = false;
  double tol = 1e-6;
  int max_iter = 10000;
  int threads = 1;
  // simulate
  std::string case_name = "C1";
  int replicates = 100;
  std::vector<double> alphas;
  Eigen::Index sim_n = 100;
};

int cmd_fit(const RunConfig& config);
int cmd_path(const RunConfig& config);
int cmd_cv(const RunConfig& config);
int cmd_simulate(const RunConfig& config);
int cmd_diagnose(const RunConfig& config);

}  // namespace ggmc::cli
