#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "lpci/common.hpp"
#include "lpci/gp.hpp"
#include "lpci/kernels.hpp"
#include "lpci/rls.hpp"
#include "lpci/rng.hpp"

namespace lpci {

/// rank = 0 requests the full sample (r = n).
inline constexpr int kFullRank = 0;

/// Child-generator indices of the per-test master Rng. They are fixed so
/// that, e.g., toggling hyperparameter optimization does not perturb the
/// location draws, and so that the oracle and regression pipelines share
/// locations and null sampling for the same seed.
inline constexpr std::uint64_t kChildLocations = 0;
inline constexpr std::uint64_t kChildBatch = 1;
inline constexpr std::uint64_t kChildSubset = 2;
inline constexpr std::uint64_t kChildGp = 3;
inline constexpr std::uint64_t kChildNull = 4;

struct TestConfig {
  int p = 2;
  int j_count = 5;
  int rank = kFullRank;
  double delta = 1e-8;
  double alpha = 0.05;
  bool optimize_hyperparams = true;
  int mc_samples = 200000;
  std::uint64_t seed = 0;
  int gp_iterations = 10;
  int gp_batch = 200;

  void validate() const;
};

/// J test locations: rows of t1 live in the augmented (x, z) space, rows of
/// t2 in the y space.
struct LocationSet {
  Matrix t1;
  Matrix t2;
};

/// Per-sample witness terms u (n x J), their column means s, and the raw
/// second-moment matrix sigma_hat = u'u / n (uncentered by construction).
struct WitnessSample {
  Matrix u;
  Vector s;
  Matrix sigma_hat;
};

/// Derives s and sigma_hat from a given witness matrix.
WitnessSample make_witness_sample(Matrix u);

/// Conditional-mean evaluator: location index j and conditioning point z.
using CondMeanFn = std::function<double(int, const VectorRef&)>;

struct TestDiagnostics {
  Vector witness_means;             // s, one entry per location
  double sigma_x = 0.0;
  double sigma_y = 0.0;
  double sigma_z = 0.0;
  std::vector<double> selected_sigma;   // per regression, x-targets then y-targets
  std::vector<double> selected_lambda;
  int resolved_rank = 0;
  double ms_hyperopt = 0.0;
  double ms_regression = 0.0;
  double ms_statistic = 0.0;
  double ms_null = 0.0;
};

struct TestResult {
  double statistic = 0.0;   // n^(p/2) * NCI
  double threshold = 0.0;
  double p_value = 1.0;
  bool reject = false;
  TestDiagnostics diagnostics;
};

/// Median-heuristic bandwidths of the three blocks.
KernelSpec median_kernel_spec(const MatrixRef& x, const MatrixRef& y, const MatrixRef& z);

/// Fits a Gaussian (mean + full sample covariance) to each block and draws
/// j_count locations from each; t1 rows are (t_x, t_z) concatenations.
LocationSet sample_locations(const MatrixRef& x, const MatrixRef& y, const MatrixRef& z,
                             int j_count, Rng& rng);

/// The locations run_test would use for this config (child kChildLocations
/// of config.seed).
LocationSet test_locations(const MatrixRef& x, const MatrixRef& y, const MatrixRef& z,
                           const TestConfig& config);

/// u[i][j] = (k_xddot(t1_j, (x_i, z_i)) - cond_mean_xddot(j, z_i))
///         * (k_y(t2_j, y_i)            - cond_mean_y(j, z_i)).
WitnessSample witness_terms(const MatrixRef& x, const MatrixRef& y, const MatrixRef& z,
                            const LocationSet& locations, const KernelSpec& spec,
                            const CondMeanFn& cond_mean_xddot,
                            const CondMeanFn& cond_mean_y);

/// n^(p/2) * sum_j |((sigma_hat + delta I)^(-1/2) s)_j|^p.
double nci_statistic(const WitnessSample& witness, int p, double delta, int n);

/// The 2J fitted conditional-mean regressions (and the hyperparameters
/// selected for them), using children kChildBatch/kChildSubset/kChildGp of
/// config.seed. Each regression fits the centered targets and carries the
/// target mean as an intercept, so the conditional-mean estimate at z is
/// intercept[j] + predict(model[j], z). Hyperparameters are selected on
/// standardized targets, under which the selected noise variance is the
/// ridge of the whole Gram matrix (the fit is the GP posterior mean).
struct FittedCondMeans {
  std::vector<RlsModel> x_models;
  std::vector<RlsModel> y_models;
  Vector x_intercepts;
  Vector y_intercepts;
  std::vector<GpSelection> x_selections;
  std::vector<GpSelection> y_selections;
  int resolved_rank = 0;
  double ms_hyperopt = 0.0;
  double ms_regression = 0.0;

  double cond_mean_x(int j, const VectorRef& z) const;
  double cond_mean_y(int j, const VectorRef& z) const;
};

FittedCondMeans fit_conditional_means(const MatrixRef& x, const MatrixRef& y,
                                      const MatrixRef& z, const LocationSet& locations,
                                      const KernelSpec& spec, const TestConfig& config);

/// Full test: median bandwidths, random locations, RLS conditional means
/// (GP-tuned when configured), normalized statistic, threshold and p-value
/// from the asymptotic null (exact chi-square for p = 2, Monte Carlo
/// otherwise), rejection decision.
TestResult run_test(const MatrixRef& x, const MatrixRef& y, const MatrixRef& z,
                    const TestConfig& config);

/// Same pipeline with caller-supplied conditional means; with the fitted
/// regressions wrapped as callables this reproduces run_test bit for bit.
TestResult run_oracle_test(const MatrixRef& x, const MatrixRef& y, const MatrixRef& z,
                           const TestConfig& config, const CondMeanFn& cond_mean_xddot,
                           const CondMeanFn& cond_mean_y);

}  // namespace lpci
