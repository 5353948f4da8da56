#include "lpci/gp.hpp"

#include <cmath>
#include <limits>

#include "lpci/kernels.hpp"

namespace lpci {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454836;

struct Factorization {
  Eigen::LLT<Matrix> llt;
  Matrix kernel;
  bool ok = false;
};

Factorization factor(const MatrixRef& sqdist, double sigma, double noise) {
  Factorization f;
  if (!(sigma > 0.0) || !(noise > 0.0) || !std::isfinite(sigma) || !std::isfinite(noise)) {
    return f;
  }
  f.kernel = gram_from_sqdist(sqdist, sigma);
  Matrix system = f.kernel;
  system.diagonal().array() += noise;
  f.llt.compute(system);
  f.ok = (f.llt.info() == Eigen::Success);
  return f;
}

double lml_from_factor(const Factorization& f, const VectorRef& y, const Vector& alpha) {
  const double m = static_cast<double>(y.size());
  const double log_det = 2.0 * Matrix(f.llt.matrixL()).diagonal().array().log().sum();
  return -0.5 * y.dot(alpha) - 0.5 * log_det - 0.5 * m * kLog2Pi;
}

}  // namespace

double log_marginal_likelihood(const MatrixRef& z, const VectorRef& y, double sigma_z,
                               double noise) {
  if (z.rows() < 1 || z.rows() != y.size()) {
    throw DimensionMismatch("log_marginal_likelihood: z and y sizes disagree");
  }
  if (!z.allFinite() || !y.allFinite()) {
    throw SolveFailure("log_marginal_likelihood: non-finite inputs");
  }
  const Factorization f = factor(pairwise_sqdist(z), sigma_z, noise);
  if (!f.ok) throw SolveFailure("log_marginal_likelihood: factorization failed");
  const Vector alpha = f.llt.solve(y);
  const double lml = lml_from_factor(f, y, alpha);
  if (!std::isfinite(lml)) {
    throw SolveFailure("log_marginal_likelihood: evidence is not finite");
  }
  return lml;
}

namespace detail {

LmlEval lml_with_grad(const MatrixRef& sqdist, const VectorRef& y, double log_sigma,
                      double log_noise) {
  const double sigma = std::exp(log_sigma);
  const double noise = std::exp(log_noise);
  const Factorization f = factor(sqdist, sigma, noise);
  if (!f.ok) return {kNegInf, 0.0, 0.0};

  const Vector alpha = f.llt.solve(y);
  const double lml = lml_from_factor(f, y, alpha);
  if (!std::isfinite(lml)) return {kNegInf, 0.0, 0.0};

  // d/dtheta LML = 1/2 (alpha' dM alpha - tr(M^-1 dM)); dM/dlog sigma is
  // K .* sqdist / sigma^2 and dM/dlog noise is noise I.
  const Matrix minv = f.llt.solve(Matrix::Identity(y.size(), y.size()));
  const Matrix dk = f.kernel.cwiseProduct(sqdist) / (sigma * sigma);
  const double g_sigma = 0.5 * (alpha.dot(dk * alpha) - minv.cwiseProduct(dk).sum());
  const double g_noise = 0.5 * noise * (alpha.squaredNorm() - minv.trace());
  if (!std::isfinite(g_sigma) || !std::isfinite(g_noise)) return {kNegInf, 0.0, 0.0};
  return {lml, g_sigma, g_noise};
}

double lml_only(const MatrixRef& sqdist, const VectorRef& y, double log_sigma,
                double log_noise) {
  const Factorization f = factor(sqdist, std::exp(log_sigma), std::exp(log_noise));
  if (!f.ok) return kNegInf;
  const Vector alpha = f.llt.solve(y);
  const double lml = lml_from_factor(f, y, alpha);
  return std::isfinite(lml) ? lml : kNegInf;
}

LmlEval profile_lml_with_grad(const MatrixRef& sqdist, const VectorRef& y,
                              double log_sigma, double log_lambda) {
  const double sigma = std::exp(log_sigma);
  const double lambda = std::exp(log_lambda);
  const Factorization f = factor(sqdist, sigma, lambda);
  if (!f.ok) return {kNegInf, 0.0, 0.0};

  const double m = static_cast<double>(y.size());
  const Vector alpha = f.llt.solve(y);
  const double quad = y.dot(alpha);
  if (!(quad > 0.0) || !std::isfinite(quad)) return {kNegInf, 0.0, 0.0};
  const double log_det = 2.0 * Matrix(f.llt.matrixL()).diagonal().array().log().sum();
  const double lml =
      -0.5 * m * (1.0 + kLog2Pi + std::log(quad / m)) - 0.5 * log_det;
  if (!std::isfinite(lml)) return {kNegInf, 0.0, 0.0};

  // d lml / dtheta = (m / 2 quad) alpha' dM alpha - 1/2 tr(M^-1 dM) with
  // dM/dlog sigma = K .* sqdist / sigma^2 and dM/dlog lambda = lambda I.
  const Matrix minv = f.llt.solve(Matrix::Identity(y.size(), y.size()));
  const Matrix dk = f.kernel.cwiseProduct(sqdist) / (sigma * sigma);
  const double g_sigma =
      0.5 * m / quad * alpha.dot(dk * alpha) - 0.5 * minv.cwiseProduct(dk).sum();
  const double g_lambda =
      0.5 * m / quad * lambda * alpha.squaredNorm() - 0.5 * lambda * minv.trace();
  if (!std::isfinite(g_sigma) || !std::isfinite(g_lambda)) return {kNegInf, 0.0, 0.0};
  return {lml, g_sigma, g_lambda};
}

double profile_lml_only(const MatrixRef& sqdist, const VectorRef& y, double log_sigma,
                        double log_lambda) {
  const Factorization f = factor(sqdist, std::exp(log_sigma), std::exp(log_lambda));
  if (!f.ok) return kNegInf;
  const double m = static_cast<double>(y.size());
  const Vector alpha = f.llt.solve(y);
  const double quad = y.dot(alpha);
  if (!(quad > 0.0) || !std::isfinite(quad)) return kNegInf;
  const double log_det = 2.0 * Matrix(f.llt.matrixL()).diagonal().array().log().sum();
  const double lml =
      -0.5 * m * (1.0 + kLog2Pi + std::log(quad / m)) - 0.5 * log_det;
  return std::isfinite(lml) ? lml : kNegInf;
}

}  // namespace detail

double profile_log_marginal_likelihood(const MatrixRef& z, const VectorRef& y,
                                       double sigma_z, double lambda_ratio) {
  if (z.rows() < 1 || z.rows() != y.size()) {
    throw DimensionMismatch("profile_log_marginal_likelihood: z and y sizes disagree");
  }
  if (!z.allFinite() || !y.allFinite()) {
    throw SolveFailure("profile_log_marginal_likelihood: non-finite inputs");
  }
  const double lml = detail::profile_lml_only(pairwise_sqdist(z), y, std::log(sigma_z),
                                              std::log(lambda_ratio));
  if (lml == kNegInf) {
    throw SolveFailure("profile_log_marginal_likelihood: evidence is not finite");
  }
  return lml;
}

GpSelection select_hyperparams(const MatrixRef& z, const VectorRef& y, double init_sigma,
                               double init_lambda, int iterations, Rng& rng) {
  (void)rng;
  if (z.rows() < 2) throw InsufficientData("select_hyperparams: need at least 2 points");
  if (z.rows() != y.size()) {
    throw DimensionMismatch("select_hyperparams: z and y sizes disagree");
  }
  if (!(init_sigma > 0.0) || !(init_lambda > 0.0)) {
    throw DomainError("select_hyperparams: initial values must be positive");
  }

  const Matrix sqdist = pairwise_sqdist(z);
  double log_sigma = std::log(init_sigma);
  double log_noise = std::log(init_lambda);

  double current = detail::profile_lml_only(sqdist, y, log_sigma, log_noise);
  if (current == kNegInf) {
    throw SolveFailure("select_hyperparams: evidence not finite at initialization");
  }

  double best_lml = current;
  double best_log_sigma = log_sigma;
  double best_log_noise = log_noise;

  for (int it = 0; it < iterations; ++it) {
    const detail::LmlEval eval =
        detail::profile_lml_with_grad(sqdist, y, log_sigma, log_noise);
    if (eval.lml == kNegInf) break;

    double step = 0.1;
    bool accepted = false;
    for (int halving = 0; halving <= 8; ++halving) {
      const double cand_sigma = log_sigma + step * eval.grad_log_sigma;
      const double cand_noise = log_noise + step * eval.grad_log_noise;
      const double cand_lml = detail::profile_lml_only(sqdist, y, cand_sigma, cand_noise);
      if (cand_lml >= current) {
        log_sigma = cand_sigma;
        log_noise = cand_noise;
        current = cand_lml;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    if (current > best_lml) {
      best_lml = current;
      best_log_sigma = log_sigma;
      best_log_noise = log_noise;
    }
  }

  return GpSelection{std::exp(best_log_sigma), std::exp(best_log_noise), best_lml};
}

}  // namespace lpci
