#include "lpci/kernels.hpp"

#include <algorithm>
#include <vector>

namespace lpci {

double kernel_xddot(const VectorRef& t1, const VectorRef& sample, Eigen::Index dim_x,
                    const KernelSpec& spec) {
  if (t1.size() != sample.size()) {
    throw DimensionMismatch("kernel_xddot: location and sample sizes differ");
  }
  if (dim_x < 1 || dim_x >= t1.size()) {
    throw DimensionMismatch("kernel_xddot: invalid x-block size");
  }
  const Eigen::Index dim_z = t1.size() - dim_x;
  return gaussian(t1.head(dim_x), sample.head(dim_x), spec.sigma_x) *
         gaussian(t1.tail(dim_z), sample.tail(dim_z), spec.sigma_z);
}

Matrix pairwise_sqdist(const MatrixRef& a, const MatrixRef& b) {
  if (a.cols() != b.cols()) {
    throw DimensionMismatch("pairwise_sqdist: column counts differ");
  }
  Matrix d = -2.0 * (a * b.transpose());
  d.colwise() += a.rowwise().squaredNorm();
  d.rowwise() += b.rowwise().squaredNorm().transpose();
  return d.cwiseMax(0.0);
}

Matrix pairwise_sqdist(const MatrixRef& a) {
  Matrix d = pairwise_sqdist(a, a);
  d = 0.5 * (d + d.transpose()).eval();
  d.diagonal().setZero();
  return d;
}

Matrix gram_from_sqdist(const MatrixRef& sqdist, double sigma) {
  return (-sqdist / (2.0 * sigma * sigma)).array().exp();
}

double median_heuristic(const MatrixRef& points) {
  const Eigen::Index m = points.rows();
  if (m < 2) throw EmptyInput("median_heuristic: need at least two points");

  const Matrix d2 = pairwise_sqdist(points);
  std::vector<double> upper;
  upper.reserve(static_cast<std::size_t>(m) * (m - 1) / 2);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) {
      upper.push_back(d2(i, j));
    }
  }

  // Lower median of the squared distances; sqrt is monotone so this is the
  // lower median of the distances as well.
  const auto mid = upper.begin() + static_cast<std::ptrdiff_t>((upper.size() - 1) / 2);
  std::nth_element(upper.begin(), mid, upper.end());
  const double med = std::sqrt(*mid);
  if (med > 0.0) return med;

  double sum = 0.0;
  std::size_t positives = 0;
  for (double v : upper) {
    if (v > 0.0) {
      sum += std::sqrt(v);
      ++positives;
    }
  }
  if (positives > 0) return sum / static_cast<double>(positives);
  return 1.0;
}

Vector kernel_vector(const VectorRef& t, const MatrixRef& samples, double sigma) {
  if (t.size() != samples.cols()) {
    throw DimensionMismatch("kernel_vector: location and sample dimensions differ");
  }
  return ((samples.rowwise() - t.transpose()).rowwise().squaredNorm() *
          (-1.0 / (2.0 * sigma * sigma)))
      .array()
      .exp();
}

Vector kernel_vector_xddot(const VectorRef& t1, const MatrixRef& x, const MatrixRef& z,
                           const KernelSpec& spec) {
  if (x.rows() != z.rows()) {
    throw DimensionMismatch("kernel_vector_xddot: x and z row counts differ");
  }
  if (t1.size() != x.cols() + z.cols()) {
    throw DimensionMismatch("kernel_vector_xddot: location size is not dim_x + dim_z");
  }
  const Vector kx = kernel_vector(t1.head(x.cols()), x, spec.sigma_x);
  const Vector kz = kernel_vector(t1.tail(z.cols()), z, spec.sigma_z);
  return kx.cwiseProduct(kz);
}

Matrix gram_matrix(const MatrixRef& samples, double sigma) {
  if (samples.rows() < 1) throw DimensionMismatch("gram_matrix: empty sample matrix");
  Matrix k = gram_from_sqdist(pairwise_sqdist(samples), sigma);
  k.diagonal().setOnes();
  return k;
}

}  // namespace lpci
