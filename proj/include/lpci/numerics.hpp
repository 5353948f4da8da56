#pragma once

#include <functional>
#include <vector>

#include "lpci/common.hpp"
#include "lpci/rng.hpp"

namespace lpci {

/// Inverse square root of a symmetric PSD matrix with a ridge:
/// returns symmetric A with A (m + ridge I) A = I, via symmetric
/// eigendecomposition mapping each eigenvalue l to (l + ridge)^(-1/2).
///
/// Throws DimensionMismatch if m is not square (or visibly asymmetric) and
/// NotPsd if an eigenvalue falls below -1e-8 * spectral_radius - ridge.
Matrix inv_sqrt_psd(const MatrixRef& m, double ridge);

/// Regularized lower incomplete gamma P(a, x), series/continued-fraction.
double regularized_gamma_p(double a, double x);

/// Chi-square CDF with `dof` degrees of freedom.
double chi2_cdf(int dof, double x);

/// Chi-square quantile, solved by bracketed bisection on the CDF.
/// The returned x satisfies P(dof/2, x/2) = prob to within 1e-10.
double chi2_quantile(int dof, double prob);

/// Monte-Carlo sample of ||Z||_p^p with Z ~ N(0, Id_J); one value per draw.
std::vector<double> lp_null_sample(int p, int j_count, int mc_samples, Rng& rng);

/// prob-quantile of a sorted sample (inverted-ECDF convention).
double empirical_quantile(const std::vector<double>& sorted, double prob);

/// Quantile of the null law of ||Z||_p^p, Z ~ N(0, Id_J). Exact chi-square
/// for p = 2 (no sampling); Monte Carlo otherwise (mc_samples >= 10000).
double lp_null_quantile(int p, int j_count, double prob, int mc_samples, Rng& rng);

/// `count` iid draws from N(mean, cov), one per row, generated as
/// mean + L z with L the Cholesky factor of cov + jitter I
/// (jitter = 1e-10 trace(cov)/d). Throws NotPsd if factorization fails.
Matrix sample_mvn(const VectorRef& mean, const MatrixRef& cov, int count, Rng& rng);

/// Two-sided Kolmogorov-Smirnov distance between the empirical CDF of
/// `values` and the Uniform(0,1) CDF, exact over order statistics.
double ks_uniform(std::vector<double> values);

/// Two-sided KS distance between the empirical CDF of `values` and an
/// arbitrary reference CDF.
double ks_distance(std::vector<double> values, const std::function<double(double)>& cdf);

/// Area under the empirical CDF of p-values on [0, 1]; equals 1 - mean of
/// the values clipped to [0, 1].
double aupc(const std::vector<double>& pvalues);

}  // namespace lpci
