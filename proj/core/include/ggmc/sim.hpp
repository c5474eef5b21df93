#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ggmc/cv.hpp"
#include "ggmc/grouped_design.hpp"

namespace ggmc {

/// One synthetic ANOVA regression instance: trichotomized correlated latent
/// variables, dummy-coded main effects and pairwise interactions, response
/// from the fixed 8-coefficient/3-group truth.
struct SimDataset {
  GroupedDesign design;
  Response response;
  Vector beta_star;
  double sigma = 0.0;  // noise sd implied by the requested SNR
  double rho = 0.0;
  double snr = 0.0;
  std::uint64_t seed = 0;
};

struct MetricSet {
  double mse = 0.0;               // ||beta_hat - beta*||^2 / p
  double prediction_error = 0.0;  // ||X(beta_hat - beta*)||^2 / n
  int tp = 0, fp = 0, fn = 0;     // group-level support recovery
  double f1 = 0.0;
};

/// num_latent in {4, 10, 16} gives p in {32, 200, 512}. Latents are centered
/// Gaussians with covariance rho^|i-j|, trichotomized at the standard normal
/// tertiles; sigma is set so the realized SNR ||X beta*|| / (sqrt(n) sigma)
/// equals the request exactly.
SimDataset simulate_anova(int num_latent, double rho, double snr, Index n,
                          std::uint64_t seed);

/// Group selected iff ||beta_hat_j|| > 1e-8.
MetricSet compute_metrics(const Vector& beta_hat, const SimDataset& dataset);

struct CaseOptions {
  int nlambda = 50;
  double lambda_min_ratio = 1e-2;
  int folds = 5;
  Index n = 100;
  int threads = 1;
  PdhgOptions solver;
};

struct CaseCell {
  std::string case_name;
  double snr = 0.0;
  double rho = 0.0;
  Index p = 0;
  double alpha = 0.0;
  int replicates = 0;
  int failures = 0;
  // metric name -> (mean, stderr) in fixed order
  std::vector<std::string> metric_names;
  std::vector<double> means;
  std::vector<double> stderrs;
};

/// Runs one of the three experiment cases. C1 sweeps SNR 1..5 at rho=0 over
/// the alpha list; C2 sweeps rho over {0,...,0.8} at SNR 2, alpha 0.6; C3
/// sweeps the dimension over p in {32,200,512} at SNR 2, alpha 0.6.
/// Replicate r of every cell uses seed ^ r, so cells share datasets where the
/// generator inputs coincide. Each fit selects lambda by k-fold CV and refits
/// on the full data.
std::vector<CaseCell> run_case(const std::string& case_name, int replicates,
                               std::vector<double> alpha_list,
                               std::uint64_t seed,
                               const CaseOptions& opts = {});

struct TheoryDiagnostics {
  Vector v_star;
  std::vector<double> nu;              // per group
  std::optional<double> nu_bar;        // max over the support
  std::optional<double> nu_underline;  // min off the support
  bool a3_ok = true;                   // nu_k > 0 for all k off the support
  std::vector<Index> support;          // groups with nonzero beta*
};

/// v* and the nu_j quantities for a known beta* and an explicit B'B.
/// nu_j = K_j +/- (1/n)||[B'B]_{j,.}(beta* - v*)|| with + on the support.
TheoryDiagnostics theory_diagnostics(const GroupedDesign& design,
                                     const Vector& beta_star,
                                     const Matrix& btb);

/// The B'B choices discussed alongside the diagnostics.
Matrix btb_from_design(const GroupedDesign& design, double alpha, double lambda);
Matrix btb_identity(Index p, double eta, double lambda);

}  // namespace ggmc
