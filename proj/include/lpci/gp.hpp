#pragma once

#include "lpci/common.hpp"
#include "lpci/rng.hpp"

namespace lpci {

/// Hyperparameters selected by evidence maximization. The GP noise variance
/// doubles as the ridge parameter of the downstream regression.
struct GpSelection {
  double sigma_z = 1.0;
  double lambda = 1.0;
  double final_lml = 0.0;
};

/// Gaussian-process log evidence of y under a unit-amplitude Gaussian kernel
/// on z plus observation noise:
///   -1/2 y' (K + noise I)^-1 y - 1/2 log det(K + noise I) - m/2 log(2 pi).
double log_marginal_likelihood(const MatrixRef& z, const VectorRef& y, double sigma_z,
                               double noise);

/// Evidence with the signal amplitude profiled out: for the model
/// a K + a lambda I the optimal amplitude is a* = y'(K + lambda I)^-1 y / m
/// in closed form, leaving
///   -m/2 (1 + log(2 pi) + log(a*)) - 1/2 log det(K + lambda I).
/// lambda is the noise-to-signal ratio, which is also the ridge of the
/// matching posterior-mean regression. Fixing the amplitude at one instead
/// leaves a degenerate maximum at sigma_z -> 0 that memorizes the targets.
double profile_log_marginal_likelihood(const MatrixRef& z, const VectorRef& y,
                                       double sigma_z, double lambda_ratio);

namespace detail {

struct LmlEval {
  double lml;
  double grad_log_sigma;
  double grad_log_noise;
};

/// Unit-amplitude evidence and gradient in (log sigma, log noise), with the
/// pairwise squared distances of z precomputed. Non-finite results are
/// reported as lml = -infinity rather than thrown.
LmlEval lml_with_grad(const MatrixRef& sqdist, const VectorRef& y, double log_sigma,
                      double log_noise);

double lml_only(const MatrixRef& sqdist, const VectorRef& y, double log_sigma,
                double log_noise);

/// Profiled evidence and gradient in (log sigma, log lambda).
LmlEval profile_lml_with_grad(const MatrixRef& sqdist, const VectorRef& y,
                              double log_sigma, double log_lambda);

double profile_lml_only(const MatrixRef& sqdist, const VectorRef& y, double log_sigma,
                        double log_lambda);

}  // namespace detail

/// Gradient ascent on the profiled evidence in (log sigma_z, log lambda)
/// with backtracking line search (initial step 0.1, up to 8 halvings per
/// step). Returns the best point visited; with iterations = 0 that is the
/// initialization itself. The rng parameter is part of the interface for
/// randomized restarts but the ascent itself is deterministic.
GpSelection select_hyperparams(const MatrixRef& z, const VectorRef& y, double init_sigma,
                               double init_lambda, int iterations, Rng& rng);

}  // namespace lpci
