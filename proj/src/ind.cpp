#include "lpci/ind.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "lpci/numerics.hpp"

namespace lpci {

double empirical_embedding_joint(const VectorRef& t1, const VectorRef& t2,
                                 const MatrixRef& x, const MatrixRef& y,
                                 const KernelSpec& spec) {
  if (x.rows() != y.rows() || x.rows() < 1) {
    throw DimensionMismatch("empirical_embedding_joint: bad sample blocks");
  }
  const Vector kx = kernel_vector(t1, x, spec.sigma_x);
  const Vector ky = kernel_vector(t2, y, spec.sigma_y);
  return kx.cwiseProduct(ky).mean();
}

double empirical_embedding_product(const VectorRef& t1, const VectorRef& t2,
                                   const MatrixRef& x, const MatrixRef& y,
                                   const KernelSpec& spec) {
  if (x.rows() != y.rows() || x.rows() < 1) {
    throw DimensionMismatch("empirical_embedding_product: bad sample blocks");
  }
  return kernel_vector(t1, x, spec.sigma_x).mean() *
         kernel_vector(t2, y, spec.sigma_y).mean();
}

IndWitness ind_witness(const MatrixRef& x, const MatrixRef& y,
                       const LocationSet& locations, const KernelSpec& spec) {
  if (x.rows() != y.rows() || x.rows() < 1) {
    throw DimensionMismatch("ind_witness: bad sample blocks");
  }
  const Eigen::Index n = x.rows();
  const Eigen::Index j_count = locations.t1.rows();
  if (locations.t2.rows() != j_count) {
    throw DimensionMismatch("ind_witness: location blocks have different row counts");
  }

  // Row j of kx holds k_x(t1_j, x_i) over i; centering each row by its mean
  // turns the rowwise products into the per-sample centered products whose
  // mean is u_hat and whose covariance estimates Sigma.
  Matrix kx(j_count, n);
  Matrix ky(j_count, n);
  for (Eigen::Index j = 0; j < j_count; ++j) {
    kx.row(j) = kernel_vector(locations.t1.row(j), x, spec.sigma_x).transpose();
    ky.row(j) = kernel_vector(locations.t2.row(j), y, spec.sigma_y).transpose();
  }
  kx.colwise() -= kx.rowwise().mean().eval();
  ky.colwise() -= ky.rowwise().mean().eval();

  const Matrix products = kx.cwiseProduct(ky);
  IndWitness witness;
  witness.u_hat = products.rowwise().mean();
  Matrix cov = products * products.transpose() / static_cast<double>(n) -
               witness.u_hat * witness.u_hat.transpose();
  witness.sigma_hat = 0.5 * (cov + cov.transpose());
  return witness;
}

double nui_statistic(const MatrixRef& x, const MatrixRef& y, const LocationSet& locations,
                     const KernelSpec& spec, int p, double lambda_reg, int n) {
  if (p < 1) throw DomainError("nui_statistic: p must be >= 1");
  if (!(lambda_reg > 0.0)) throw DomainError("nui_statistic: lambda_reg must be positive");
  const IndWitness witness = ind_witness(x, y, locations, spec);
  const Vector whitened = inv_sqrt_psd(witness.sigma_hat, lambda_reg) * witness.u_hat;
  double acc = 0.0;
  for (Eigen::Index j = 0; j < whitened.size(); ++j) {
    acc += std::pow(std::abs(whitened(j)), static_cast<double>(p));
  }
  return std::pow(static_cast<double>(n), 0.5 * p) * acc;
}

LocationSet sample_ind_locations(const MatrixRef& x, const MatrixRef& y, int j_count,
                                 Rng& rng) {
  if (x.rows() != y.rows()) {
    throw DimensionMismatch("sample_ind_locations: x and y row counts differ");
  }
  if (j_count < 1) throw DomainError("sample_ind_locations: j_count must be >= 1");
  if (x.rows() < 2) throw InsufficientData("sample_ind_locations: need at least 2 samples");

  const auto fit_and_draw = [&](const MatrixRef& data) {
    const Matrix centered = data.rowwise() - data.colwise().mean();
    const Matrix cov = centered.transpose() * centered / static_cast<double>(data.rows() - 1);
    return sample_mvn(data.colwise().mean(), cov, j_count, rng);
  };
  LocationSet locations;
  locations.t1 = fit_and_draw(x);
  locations.t2 = fit_and_draw(y);
  return locations;
}

TestResult run_ind_test(const MatrixRef& x, const MatrixRef& y, const TestConfig& config) {
  config.validate();
  if (x.rows() != y.rows()) {
    throw DimensionMismatch("run_ind_test: x and y row counts differ");
  }
  if (x.rows() < 4) throw InsufficientData("run_ind_test: need at least 4 samples");
  const int n = static_cast<int>(x.rows());

  KernelSpec spec;
  spec.sigma_x = median_heuristic(x);
  spec.sigma_y = median_heuristic(y);

  const Rng master(config.seed);
  Rng location_rng = master.child(kChildLocations);
  const LocationSet locations = sample_ind_locations(x, y, config.j_count, location_rng);

  TestResult result;
  result.statistic = nui_statistic(x, y, locations, spec, config.p, config.delta, n);

  if (config.p == 2) {
    result.threshold = chi2_quantile(config.j_count, 1.0 - config.alpha);
    result.p_value = 1.0 - chi2_cdf(config.j_count, result.statistic);
  } else {
    Rng null_rng = master.child(kChildNull);
    std::vector<double> sample =
        lp_null_sample(config.p, config.j_count, config.mc_samples, null_rng);
    std::sort(sample.begin(), sample.end());
    result.threshold = empirical_quantile(sample, 1.0 - config.alpha);
    const auto tail =
        sample.end() - std::lower_bound(sample.begin(), sample.end(), result.statistic);
    result.p_value = (static_cast<double>(tail) + 1.0) /
                     (static_cast<double>(config.mc_samples) + 1.0);
  }
  result.reject = result.statistic > result.threshold;

  result.diagnostics.witness_means = ind_witness(x, y, locations, spec).u_hat;
  result.diagnostics.sigma_x = spec.sigma_x;
  result.diagnostics.sigma_y = spec.sigma_y;
  return result;
}

}  // namespace lpci
