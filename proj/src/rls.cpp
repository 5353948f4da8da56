#include "lpci/rls.hpp"

#include <cmath>

namespace lpci {

double default_lambda(int r) {
  if (r < 1) throw DomainError("default_lambda: r must be >= 1");
  return 1.0 / std::sqrt(static_cast<double>(r));
}

RlsModel fit_given_gram(const MatrixRef& gram, const MatrixRef& train_z,
                        const VectorRef& targets, double sigma_z, double lambda) {
  const Eigen::Index r = train_z.rows();
  if (gram.rows() != r || gram.cols() != r || targets.size() != r) {
    throw DimensionMismatch("fit: gram/targets sizes disagree with train_z");
  }
  if (!(lambda > 0.0) || !std::isfinite(lambda) || !targets.allFinite() ||
      !train_z.allFinite()) {
    throw SolveFailure("fit: lambda must be positive and inputs finite");
  }

  Matrix system = gram;
  system.diagonal().array() += static_cast<double>(r) * lambda;
  Eigen::LLT<Matrix> llt(system);
  if (llt.info() != Eigen::Success) {
    throw SolveFailure("fit: Cholesky factorization failed");
  }
  return RlsModel{train_z, llt.solve(targets), sigma_z, lambda};
}

RlsModel fit(const MatrixRef& train_z, const VectorRef& targets, double sigma_z,
             double lambda) {
  if (train_z.rows() < 1) throw DimensionMismatch("fit: empty training set");
  return fit_given_gram(gram_matrix(train_z, sigma_z), train_z, targets, sigma_z, lambda);
}

double predict(const RlsModel& model, const VectorRef& z) {
  if (z.size() != model.train_z.cols()) {
    throw DimensionMismatch("predict: query dimension differs from training data");
  }
  return model.alpha.dot(kernel_vector(z, model.train_z, model.sigma_z));
}

Vector predict_many(const RlsModel& model, const MatrixRef& z_points) {
  if (z_points.cols() != model.train_z.cols()) {
    throw DimensionMismatch("predict_many: query dimension differs from training data");
  }
  const Matrix cross =
      gram_from_sqdist(pairwise_sqdist(z_points, model.train_z), model.sigma_z);
  return cross * model.alpha;
}

}  // namespace lpci
