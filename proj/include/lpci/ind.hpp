#pragma once

#include "lpci/ci.hpp"
#include "lpci/common.hpp"
#include "lpci/kernels.hpp"
#include "lpci/rng.hpp"

namespace lpci {

/// Embedding differences u_hat(t_j) between the joint distribution and the
/// product of marginals, with the empirical covariance of the per-sample
/// centered kernel products as sigma_hat.
struct IndWitness {
  Vector u_hat;
  Matrix sigma_hat;
};

/// mean_i k((t1, t2), (x_i, y_i)) for the tensor kernel k_x * k_y.
double empirical_embedding_joint(const VectorRef& t1, const VectorRef& t2,
                                 const MatrixRef& x, const MatrixRef& y,
                                 const KernelSpec& spec);

/// Embedding of the product of marginals; factorizes into the two marginal
/// embeddings, so it costs O(n) per location rather than O(n^2).
double empirical_embedding_product(const VectorRef& t1, const VectorRef& t2,
                                   const MatrixRef& x, const MatrixRef& y,
                                   const KernelSpec& spec);

/// u_hat and sigma_hat at all locations; locations.t1 lives in the x space
/// here (no z block).
IndWitness ind_witness(const MatrixRef& x, const MatrixRef& y,
                       const LocationSet& locations, const KernelSpec& spec);

/// n^(p/2) * ||(sigma_hat + lambda I)^(-1/2) u_hat||_p^p.
double nui_statistic(const MatrixRef& x, const MatrixRef& y, const LocationSet& locations,
                     const KernelSpec& spec, int p, double lambda_reg, int n);

/// Locations for the unconditional test: J draws from Gaussians fitted to
/// the x and y blocks.
LocationSet sample_ind_locations(const MatrixRef& x, const MatrixRef& y, int j_count,
                                 Rng& rng);

/// Unconditional independence test sharing the conditional test's kernels,
/// location sampling, and null machinery; config.delta is the whitening
/// ridge and rank/optimization settings are ignored.
TestResult run_ind_test(const MatrixRef& x, const MatrixRef& y, const TestConfig& config);

}  // namespace lpci
