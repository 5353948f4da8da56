#include "lpci/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lpci {

Matrix inv_sqrt_psd(const MatrixRef& m, double ridge) {
  if (m.rows() != m.cols()) {
    throw DimensionMismatch("inv_sqrt_psd: matrix is not square");
  }
  if (ridge < 0.0) {
    throw DomainError("inv_sqrt_psd: ridge must be nonnegative");
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw DimensionMismatch("inv_sqrt_psd: matrix is not symmetric");
  }

  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  if (solver.info() != Eigen::Success) {
    throw SolveFailure("inv_sqrt_psd: eigendecomposition failed");
  }
  const Vector& eigs = solver.eigenvalues();
  const double radius = eigs.cwiseAbs().maxCoeff();
  if (eigs.minCoeff() < -1e-8 * radius - ridge) {
    throw NotPsd("inv_sqrt_psd: matrix has a negative eigenvalue beyond tolerance");
  }

  Vector inv_sqrt = (eigs.array() + ridge).cwiseMax(0.0).rsqrt();
  if (!inv_sqrt.allFinite()) {
    throw NotPsd("inv_sqrt_psd: matrix + ridge is singular");
  }
  Matrix a = solver.eigenvectors() * inv_sqrt.asDiagonal() * solver.eigenvectors().transpose();
  return 0.5 * (a + a.transpose());
}

namespace {

// Series expansion of P(a, x), converges fastest for x < a + 1.
double gamma_p_series(double a, double x) {
  const double gln = std::lgamma(a);
  double ap = a;
  double del = 1.0 / a;
  double sum = del;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * std::numeric_limits<double>::epsilon()) {
      break;
    }
  }
  return sum * std::exp(-x + a * std::log(x) - gln);
}

// Lentz continued fraction for Q(a, x) = 1 - P(a, x), for x >= a + 1.
double gamma_q_contfrac(double a, double x) {
  const double gln = std::lgamma(a);
  const double eps = std::numeric_limits<double>::epsilon();
  const double fpmin = std::numeric_limits<double>::min() / eps;
  double b = x + 1.0 - a;
  double c = 1.0 / fpmin;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < fpmin) d = fpmin;
    c = b + an / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) <= eps) break;
  }
  return std::exp(-x + a * std::log(x) - gln) * h;
}

}  // namespace

double regularized_gamma_p(double a, double x) {
  if (a <= 0.0 || x < 0.0 || !std::isfinite(a) || !std::isfinite(x)) {
    throw DomainError("regularized_gamma_p: requires a > 0 and x >= 0");
  }
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_contfrac(a, x);
}

double chi2_cdf(int dof, double x) {
  if (dof < 1) throw DomainError("chi2_cdf: dof must be >= 1");
  if (x <= 0.0) return 0.0;
  return regularized_gamma_p(0.5 * dof, 0.5 * x);
}

double chi2_quantile(int dof, double prob) {
  if (dof < 1) throw DomainError("chi2_quantile: dof must be >= 1");
  if (!(prob > 0.0 && prob < 1.0)) {
    throw DomainError("chi2_quantile: prob must lie in (0, 1)");
  }

  double lo = 0.0;
  double hi = static_cast<double>(dof) + 10.0;
  while (chi2_cdf(dof, hi) < prob) {
    hi *= 2.0;
    if (hi > 1e300) throw DomainError("chi2_quantile: bracket expansion failed");
  }
  for (int iter = 0; iter < 400; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (chi2_cdf(dof, mid) < prob) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-13 * std::max(1.0, hi)) break;
  }
  return 0.5 * (lo + hi);
}

std::vector<double> lp_null_sample(int p, int j_count, int mc_samples, Rng& rng) {
  if (p < 1) throw DomainError("lp_null_sample: p must be >= 1");
  if (j_count < 1) throw DomainError("lp_null_sample: j_count must be >= 1");
  if (mc_samples < 1) throw DomainError("lp_null_sample: mc_samples must be >= 1");

  std::vector<double> out(static_cast<std::size_t>(mc_samples));
  for (auto& value : out) {
    double acc = 0.0;
    for (int j = 0; j < j_count; ++j) {
      const double z = rng.normal();
      if (p == 1) {
        acc += std::abs(z);
      } else if (p == 2) {
        acc += z * z;
      } else {
        acc += std::pow(std::abs(z), static_cast<double>(p));
      }
    }
    value = acc;
  }
  return out;
}

double empirical_quantile(const std::vector<double>& sorted, double prob) {
  if (sorted.empty()) throw EmptyInput("empirical_quantile: empty sample");
  const double pos = prob * static_cast<double>(sorted.size());
  auto idx = static_cast<std::ptrdiff_t>(std::ceil(pos)) - 1;
  idx = std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(sorted.size()) - 1);
  return sorted[static_cast<std::size_t>(idx)];
}

double lp_null_quantile(int p, int j_count, double prob, int mc_samples, Rng& rng) {
  if (!(prob > 0.0 && prob < 1.0)) {
    throw DomainError("lp_null_quantile: prob must lie in (0, 1)");
  }
  if (p == 2) {
    return chi2_quantile(j_count, prob);
  }
  if (mc_samples < 10000) {
    throw DomainError("lp_null_quantile: Monte Carlo path needs mc_samples >= 10000");
  }
  std::vector<double> sample = lp_null_sample(p, j_count, mc_samples, rng);
  std::sort(sample.begin(), sample.end());
  return empirical_quantile(sample, prob);
}

Matrix sample_mvn(const VectorRef& mean, const MatrixRef& cov, int count, Rng& rng) {
  const auto dim = mean.size();
  if (cov.rows() != dim || cov.cols() != dim) {
    throw DimensionMismatch("sample_mvn: mean/cov dimensions disagree");
  }
  if (count < 1) throw DomainError("sample_mvn: count must be >= 1");

  Matrix lower = Matrix::Zero(dim, dim);
  if (!cov.isZero(0.0)) {
    const double jitter = 1e-10 * cov.trace() / static_cast<double>(dim);
    Matrix shifted = cov;
    shifted.diagonal().array() += jitter;
    Eigen::LLT<Matrix> llt(shifted);
    if (llt.info() != Eigen::Success) {
      throw NotPsd("sample_mvn: Cholesky factorization failed after jitter");
    }
    lower = llt.matrixL();
  }

  Matrix draws(count, dim);
  Vector z(dim);
  for (int i = 0; i < count; ++i) {
    for (Eigen::Index k = 0; k < dim; ++k) z(k) = rng.normal();
    draws.row(i) = (mean + lower * z).transpose();
  }
  return draws;
}

double ks_uniform(std::vector<double> values) {
  if (values.empty()) throw EmptyInput("ks_uniform: empty sample");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double rank = static_cast<double>(i);
    const double above = (rank + 1.0) / n - values[i];
    const double below = values[i] - rank / n;
    sup = std::max(sup, std::max(above, below));
  }
  return sup;
}

double ks_distance(std::vector<double> values, const std::function<double(double)>& cdf) {
  if (values.empty()) throw EmptyInput("ks_distance: empty sample");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double f = cdf(values[i]);
    const double rank = static_cast<double>(i);
    sup = std::max(sup, std::max((rank + 1.0) / n - f, f - rank / n));
  }
  return sup;
}

double aupc(const std::vector<double>& pvalues) {
  if (pvalues.empty()) throw EmptyInput("aupc: empty sample");
  double sum = 0.0;
  for (double p : pvalues) sum += std::clamp(p, 0.0, 1.0);
  return 1.0 - sum / static_cast<double>(pvalues.size());
}

}  // namespace lpci
