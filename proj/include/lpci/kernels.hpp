#pragma once

#include <cmath>

#include "lpci/common.hpp"

namespace lpci {

/// Gaussian bandwidths for the three data blocks. The kernel on the
/// augmented block (x, z) is the product k_x(., .; sigma_x) * k_z(., .; sigma_z).
struct KernelSpec {
  double sigma_x = 1.0;
  double sigma_y = 1.0;
  double sigma_z = 1.0;

  void validate() const {
    if (!(sigma_x > 0.0) || !(sigma_y > 0.0) || !(sigma_z > 0.0) ||
        !std::isfinite(sigma_x) || !std::isfinite(sigma_y) || !std::isfinite(sigma_z)) {
      throw DomainError("KernelSpec: bandwidths must be positive and finite");
    }
  }
};

/// exp(-||u - v||^2 / (2 sigma^2)); equals 1 iff u = v.
template <typename DerivedA, typename DerivedB>
double gaussian(const Eigen::MatrixBase<DerivedA>& u,
                const Eigen::MatrixBase<DerivedB>& v, double sigma) {
  if (u.size() != v.size()) {
    throw DimensionMismatch("gaussian: vectors have different sizes");
  }
  const double d2 = (u.derived().template cast<double>() -
                     v.derived().template cast<double>())
                        .squaredNorm();
  return std::exp(-d2 / (2.0 * sigma * sigma));
}

/// Tensor kernel on the augmented block: k_x on the leading dim_x entries
/// times k_z on the rest.
double kernel_xddot(const VectorRef& t1, const VectorRef& sample, Eigen::Index dim_x,
                    const KernelSpec& spec);

/// Matrix of squared Euclidean distances between rows of a and rows of b.
Matrix pairwise_sqdist(const MatrixRef& a, const MatrixRef& b);

/// Symmetric squared-distance matrix with an exactly zero diagonal.
Matrix pairwise_sqdist(const MatrixRef& a);

/// exp(-d/(2 sigma^2)) applied elementwise to a squared-distance matrix.
Matrix gram_from_sqdist(const MatrixRef& sqdist, double sigma);

/// Median of the m(m-1)/2 pairwise Euclidean distances (lower median for
/// even pair counts). Falls back to the mean positive distance when the
/// median is zero, and to 1.0 when all points coincide.
double median_heuristic(const MatrixRef& points);

/// Entry i is gaussian(t, samples.row(i), sigma).
Vector kernel_vector(const VectorRef& t, const MatrixRef& samples, double sigma);

/// Rowwise tensor kernel against the augmented location t1 = (t_x, t_z):
/// entry i is k_x(t_x, x_i) * k_z(t_z, z_i).
Vector kernel_vector_xddot(const VectorRef& t1, const MatrixRef& x, const MatrixRef& z,
                           const KernelSpec& spec);

/// Gaussian Gram matrix: symmetric, PSD up to round-off, unit diagonal.
Matrix gram_matrix(const MatrixRef& samples, double sigma);

}  // namespace lpci
