#include "lpci/ci.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "lpci/numerics.hpp"

namespace lpci {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void check_blocks(const MatrixRef& x, const MatrixRef& y, const MatrixRef& z) {
  if (x.rows() != y.rows() || x.rows() != z.rows()) {
    throw DimensionMismatch("sample blocks have different row counts");
  }
  if (x.cols() < 1 || y.cols() < 1 || z.cols() < 1) {
    throw DimensionMismatch("sample blocks must each have at least one column");
  }
}

Matrix sample_covariance(const MatrixRef& data) {
  const Matrix centered = data.rowwise() - data.colwise().mean();
  return centered.transpose() * centered / static_cast<double>(data.rows() - 1);
}

std::vector<int> draw_without_replacement(int n, int take, Rng& rng) {
  std::vector<int> indices(n);
  std::iota(indices.begin(), indices.end(), 0);
  for (int i = 0; i < take; ++i) {
    const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(indices[i], indices[j]);
  }
  indices.resize(take);
  return indices;
}

Matrix take_rows(const MatrixRef& data, const std::vector<int>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), data.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = data.row(rows[i]);
  }
  return out;
}

int resolve_rank(int rank, int n) {
  if (rank == kFullRank) return n;
  if (rank < 1) throw DomainError("TestConfig: rank must be positive or full");
  return std::min(rank, n);
}

}  // namespace

void TestConfig::validate() const {
  if (p < 1) throw DomainError("TestConfig: p must be >= 1");
  if (j_count < 1) throw DomainError("TestConfig: j_count must be >= 1");
  if (rank < 0) throw DomainError("TestConfig: rank must be positive or full");
  if (!(delta > 0.0)) throw DomainError("TestConfig: delta must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("TestConfig: alpha must lie in (0, 1)");
  if (mc_samples < 1) throw DomainError("TestConfig: mc_samples must be positive");
  if (gp_iterations < 0) throw DomainError("TestConfig: gp_iterations must be >= 0");
  if (gp_batch < 2) throw DomainError("TestConfig: gp_batch must be >= 2");
}

WitnessSample make_witness_sample(Matrix u) {
  WitnessSample w;
  w.s = u.colwise().mean();
  Matrix second = u.transpose() * u / static_cast<double>(u.rows());
  w.sigma_hat = 0.5 * (second + second.transpose());
  w.u = std::move(u);
  return w;
}

KernelSpec median_kernel_spec(const MatrixRef& x, const MatrixRef& y, const MatrixRef& z) {
  return KernelSpec{median_heuristic(x), median_heuristic(y), median_heuristic(z)};
}

LocationSet sample_locations(const MatrixRef& x, const MatrixRef& y, const MatrixRef& z,
                             int j_count, Rng& rng) {
  check_blocks(x, y, z);
  if (j_count < 1) throw DomainError("sample_locations: j_count must be >= 1");
  if (x.rows() < 2) throw InsufficientData("sample_locations: need at least 2 samples");

  const Matrix tx = sample_mvn(x.colwise().mean(), sample_covariance(x), j_count, rng);
  const Matrix ty = sample_mvn(y.colwise().mean(), sample_covariance(y), j_count, rng);
  const Matrix tz = sample_mvn(z.colwise().mean(), sample_covariance(z), j_count, rng);

  LocationSet locations;
  locations.t1.resize(j_count, x.cols() + z.cols());
  locations.t1 << tx, tz;
  locations.t2 = ty;
  return locations;
}

LocationSet test_locations(const MatrixRef& x, const MatrixRef& y, const MatrixRef& z,
                           const TestConfig& config) {
  Rng child = Rng(config.seed).child(kChildLocations);
  return sample_locations(x, y, z, config.j_count, child);
}

WitnessSample witness_terms(const MatrixRef& x, const MatrixRef& y, const MatrixRef& z,
                            const LocationSet& locations, const KernelSpec& spec,
                            const CondMeanFn& cond_mean_xddot,
                            const CondMeanFn& cond_mean_y) {
  check_blocks(x, y, z);
  spec.validate();
  const Eigen::Index n = x.rows();
  const Eigen::Index j_count = locations.t1.rows();
  if (locations.t2.rows() != j_count) {
    throw DimensionMismatch("witness_terms: location blocks have different row counts");
  }

  Matrix u(n, j_count);
  for (Eigen::Index j = 0; j < j_count; ++j) {
    const Vector kx = kernel_vector_xddot(locations.t1.row(j), x, z, spec);
    const Vector ky = kernel_vector(locations.t2.row(j), y, spec.sigma_y);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double mx = cond_mean_xddot(static_cast<int>(j), z.row(i));
      const double my = cond_mean_y(static_cast<int>(j), z.row(i));
      u(i, j) = (kx(i) - mx) * (ky(i) - my);
    }
  }
  if (!u.allFinite()) {
    throw NonFinite("witness_terms: conditional means produced non-finite values");
  }
  return make_witness_sample(std::move(u));
}

double nci_statistic(const WitnessSample& witness, int p, double delta, int n) {
  if (p < 1) throw DomainError("nci_statistic: p must be >= 1");
  if (!(delta > 0.0)) throw DomainError("nci_statistic: delta must be positive");
  const Vector whitened = inv_sqrt_psd(witness.sigma_hat, delta) * witness.s;
  double acc = 0.0;
  for (Eigen::Index j = 0; j < whitened.size(); ++j) {
    acc += std::pow(std::abs(whitened(j)), static_cast<double>(p));
  }
  return std::pow(static_cast<double>(n), 0.5 * p) * acc;
}

double FittedCondMeans::cond_mean_x(int j, const VectorRef& z) const {
  return x_intercepts(j) + predict(x_models[static_cast<std::size_t>(j)], z);
}

double FittedCondMeans::cond_mean_y(int j, const VectorRef& z) const {
  return y_intercepts(j) + predict(y_models[static_cast<std::size_t>(j)], z);
}

FittedCondMeans fit_conditional_means(const MatrixRef& x, const MatrixRef& y,
                                      const MatrixRef& z, const LocationSet& locations,
                                      const KernelSpec& spec, const TestConfig& config) {
  check_blocks(x, y, z);
  spec.validate();
  const int n = static_cast<int>(x.rows());
  const int j_count = static_cast<int>(locations.t1.rows());
  const int rank = resolve_rank(config.rank, n);
  const Rng master(config.seed);

  // Regression subset: the first `rank` rows after a seeded shuffle; the
  // identity when the full sample is used.
  Rng subset_rng = master.child(kChildSubset);
  std::vector<int> subset(n);
  std::iota(subset.begin(), subset.end(), 0);
  if (rank < n) {
    subset = draw_without_replacement(n, rank, subset_rng);
  }
  const Matrix z_sub = take_rows(z, subset);
  const Matrix x_sub = take_rows(x, subset);
  const Matrix y_sub = take_rows(y, subset);
  const Matrix sqdist_sub = pairwise_sqdist(z_sub);

  // One shared batch for all 2J evidence maximizations.
  Rng batch_rng = master.child(kChildBatch);
  const int batch_size = std::min(config.gp_batch, n);
  const std::vector<int> batch = draw_without_replacement(n, batch_size, batch_rng);
  Matrix z_batch, x_batch, y_batch;
  double batch_sigma_init = 0.0;
  double batch_lambda_init = 0.0;
  if (config.optimize_hyperparams) {
    z_batch = take_rows(z, batch);
    x_batch = take_rows(x, batch);
    y_batch = take_rows(y, batch);
    batch_sigma_init = median_heuristic(z_batch);
    batch_lambda_init = default_lambda(batch_size);
  }

  FittedCondMeans fitted;
  fitted.resolved_rank = rank;
  fitted.x_models.reserve(j_count);
  fitted.y_models.reserve(j_count);
  fitted.x_intercepts.resize(j_count);
  fitted.y_intercepts.resize(j_count);
  Rng gp_rng = master.child(kChildGp);

  // Without per-regression hyperparameters all 2J systems share one matrix;
  // factor it once.
  Eigen::LLT<Matrix> shared_llt;
  if (!config.optimize_hyperparams) {
    Matrix system = gram_from_sqdist(sqdist_sub, spec.sigma_z);
    system.diagonal().setOnes();
    system.diagonal().array() += rank * default_lambda(rank);
    shared_llt.compute(system);
    if (shared_llt.info() != Eigen::Success) {
      throw SolveFailure("fit_conditional_means: shared factorization failed");
    }
  }

  for (int m = 0; m < 2; ++m) {
    for (int j = 0; j < j_count; ++j) {
      const auto targets_at = [&](const MatrixRef& xs, const MatrixRef& ys,
                                  const MatrixRef& zs) -> Vector {
        if (m == 0) return kernel_vector_xddot(locations.t1.row(j), xs, zs, spec);
        return kernel_vector(locations.t2.row(j), ys, spec.sigma_y);
      };

      GpSelection selection{spec.sigma_z, default_lambda(rank), 0.0};
      if (config.optimize_hyperparams) {
        const auto t0 = Clock::now();
        Vector batch_targets = targets_at(x_batch, y_batch, z_batch);
        const double mean = batch_targets.mean();
        double sd = std::sqrt((batch_targets.array() - mean).square().mean());
        if (!(sd > 1e-12)) sd = 1.0;
        batch_targets = (batch_targets.array() - mean) / sd;
        Rng reg_rng = gp_rng.child(static_cast<std::uint64_t>(m * j_count + j));
        selection = select_hyperparams(z_batch, batch_targets, batch_sigma_init,
                                       batch_lambda_init, config.gp_iterations, reg_rng);
        fitted.ms_hyperopt += ms_since(t0);
      }

      const auto t1 = Clock::now();
      Vector targets = targets_at(x_sub, y_sub, z_sub);
      const double intercept = targets.mean();
      targets.array() -= intercept;
      RlsModel model;
      if (config.optimize_hyperparams) {
        Matrix gram = gram_from_sqdist(sqdist_sub, selection.sigma_z);
        gram.diagonal().setOnes();
        // The selected noise variance is the ridge of the whole Gram matrix
        // (per-sample regularizer noise / r), making the centered fit the GP
        // posterior mean. The target scale cancels out of the predictor.
        model = fit_given_gram(gram, z_sub, targets, selection.sigma_z,
                               selection.lambda / rank);
      } else {
        model = RlsModel{z_sub, shared_llt.solve(targets), spec.sigma_z,
                         default_lambda(rank)};
      }
      fitted.ms_regression += ms_since(t1);

      if (m == 0) {
        fitted.x_models.push_back(std::move(model));
        fitted.x_intercepts(j) = intercept;
        fitted.x_selections.push_back(selection);
      } else {
        fitted.y_models.push_back(std::move(model));
        fitted.y_intercepts(j) = intercept;
        fitted.y_selections.push_back(selection);
      }
    }
  }
  return fitted;
}

namespace {

struct NullDecision {
  double threshold;
  double p_value;
};

// Threshold and p-value against the null law of ||N(0, Id_J)||_p^p. For
// p = 2 both come from the chi-square CDF/quantile pair; otherwise one
// Monte-Carlo sample serves both so the decision stays coherent.
NullDecision null_decision(double statistic, const TestConfig& config, Rng null_rng,
                           double* ms_null) {
  const auto t0 = Clock::now();
  NullDecision out{};
  if (config.p == 2) {
    out.threshold = chi2_quantile(config.j_count, 1.0 - config.alpha);
    out.p_value = 1.0 - chi2_cdf(config.j_count, statistic);
  } else {
    std::vector<double> sample =
        lp_null_sample(config.p, config.j_count, config.mc_samples, null_rng);
    std::sort(sample.begin(), sample.end());
    out.threshold = empirical_quantile(sample, 1.0 - config.alpha);
    const auto tail = sample.end() - std::lower_bound(sample.begin(), sample.end(), statistic);
    out.p_value = (static_cast<double>(tail) + 1.0) /
                  (static_cast<double>(config.mc_samples) + 1.0);
  }
  if (ms_null != nullptr) *ms_null = ms_since(t0);
  return out;
}

TestResult run_with_cond_means(const MatrixRef& x, const MatrixRef& y, const MatrixRef& z,
                               const TestConfig& config, const LocationSet& locations,
                               const KernelSpec& spec, const CondMeanFn& cond_mean_xddot,
                               const CondMeanFn& cond_mean_y) {
  const int n = static_cast<int>(x.rows());
  TestResult result;

  const auto t0 = Clock::now();
  const WitnessSample witness =
      witness_terms(x, y, z, locations, spec, cond_mean_xddot, cond_mean_y);
  result.statistic = nci_statistic(witness, config.p, config.delta, n);
  result.diagnostics.ms_statistic = ms_since(t0);

  const NullDecision decision =
      null_decision(result.statistic, config, Rng(config.seed).child(kChildNull),
                    &result.diagnostics.ms_null);
  result.threshold = decision.threshold;
  result.p_value = decision.p_value;
  result.reject = result.statistic > result.threshold;

  result.diagnostics.witness_means = witness.s;
  result.diagnostics.sigma_x = spec.sigma_x;
  result.diagnostics.sigma_y = spec.sigma_y;
  result.diagnostics.sigma_z = spec.sigma_z;
  return result;
}

}  // namespace

TestResult run_test(const MatrixRef& x, const MatrixRef& y, const MatrixRef& z,
                    const TestConfig& config) {
  config.validate();
  check_blocks(x, y, z);
  if (x.rows() < 4) throw InsufficientData("run_test: need at least 4 samples");

  const KernelSpec spec = median_kernel_spec(x, y, z);
  const LocationSet locations = test_locations(x, y, z, config);
  const FittedCondMeans fitted = fit_conditional_means(x, y, z, locations, spec, config);

  const CondMeanFn cond_x = [&fitted](int j, const VectorRef& zi) {
    return fitted.cond_mean_x(j, zi);
  };
  const CondMeanFn cond_y = [&fitted](int j, const VectorRef& zi) {
    return fitted.cond_mean_y(j, zi);
  };

  TestResult result = run_with_cond_means(x, y, z, config, locations, spec, cond_x, cond_y);
  result.diagnostics.resolved_rank = fitted.resolved_rank;
  result.diagnostics.ms_hyperopt = fitted.ms_hyperopt;
  result.diagnostics.ms_regression = fitted.ms_regression;
  for (const auto& sel : fitted.x_selections) {
    result.diagnostics.selected_sigma.push_back(sel.sigma_z);
    result.diagnostics.selected_lambda.push_back(sel.lambda);
  }
  for (const auto& sel : fitted.y_selections) {
    result.diagnostics.selected_sigma.push_back(sel.sigma_z);
    result.diagnostics.selected_lambda.push_back(sel.lambda);
  }
  return result;
}

TestResult run_oracle_test(const MatrixRef& x, const MatrixRef& y, const MatrixRef& z,
                           const TestConfig& config, const CondMeanFn& cond_mean_xddot,
                           const CondMeanFn& cond_mean_y) {
  config.validate();
  check_blocks(x, y, z);
  if (x.rows() < 4) throw InsufficientData("run_oracle_test: need at least 4 samples");

  const KernelSpec spec = median_kernel_spec(x, y, z);
  const LocationSet locations = test_locations(x, y, z, config);
  return run_with_cond_means(x, y, z, config, locations, spec, cond_mean_xddot,
                             cond_mean_y);
}

}  // namespace lpci
