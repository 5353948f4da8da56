#pragma once

#include "lpci/common.hpp"
#include "lpci/kernels.hpp"

namespace lpci {

/// Kernel ridge regression model in dual form: prediction at z is
/// sum_i alpha_i k(z_i, z) over the training subset.
struct RlsModel {
  Matrix train_z;
  Vector alpha;
  double sigma_z = 1.0;
  double lambda = 1.0;
};

/// Theory-default ridge schedule r^(-1/2).
double default_lambda(int r);

/// Solves (K + r lambda I) alpha = targets with K the Gaussian Gram matrix
/// of train_z; the system is SPD for lambda > 0 and solved by Cholesky.
/// Throws SolveFailure for lambda <= 0, non-finite inputs, or a failed
/// factorization.
RlsModel fit(const MatrixRef& train_z, const VectorRef& targets, double sigma_z,
             double lambda);

/// Same as fit() but with the Gram matrix supplied by the caller (it must be
/// gram_matrix(train_z, sigma_z)); used when several regressions share
/// training points.
RlsModel fit_given_gram(const MatrixRef& gram, const MatrixRef& train_z,
                        const VectorRef& targets, double sigma_z, double lambda);

double predict(const RlsModel& model, const VectorRef& z);

/// Predictions at each row of z_points via one cross-kernel product.
Vector predict_many(const RlsModel& model, const MatrixRef& z_points);

}  // namespace lpci
