#include <doctest.h>

#include <cmath>

#include "lpci/gp.hpp"
#include "lpci/kernels.hpp"
#include "lpci/rls.hpp"
#include "lpci/rng.hpp"

using namespace lpci;

namespace {

Matrix random_matrix(int rows, int cols, Rng& rng) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = rng.normal();
  }
  return m;
}

constexpr double kHalfLog2Pi = 0.9189385332046727;

}  // namespace

TEST_CASE("log marginal likelihood 1x1 closed form") {
  Matrix z(1, 1);
  z << 0.7;
  Vector y(1);

  y << 1.5;
  const double noise = 0.3;
  const double expected =
      -0.5 * 1.5 * 1.5 / (1.0 + noise) - 0.5 * std::log(1.0 + noise) - kHalfLog2Pi;
  CHECK(log_marginal_likelihood(z, y, 2.0, noise) ==
        doctest::Approx(expected).epsilon(1e-12));

  y << 0.0;
  // noise = e - 1 makes log(1 + noise) = 1.
  CHECK(log_marginal_likelihood(z, y, 2.0, std::exp(1.0) - 1.0) ==
        doctest::Approx(-0.5 - kHalfLog2Pi).epsilon(1e-12));
}

TEST_CASE("evidence gradient matches central finite differences") {
  Rng rng(71);
  const double step = 1e-5;
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 5 + static_cast<int>(rng.below(26));
    const Matrix z = random_matrix(m, 2, rng);
    Vector y(m);
    for (int i = 0; i < m; ++i) y(i) = rng.normal();
    const double log_sigma = std::log(0.5 + rng.uniform() * 2.0);
    const double log_noise = std::log(0.05 + rng.uniform());

    const Matrix sqdist = pairwise_sqdist(z);
    const auto eval = detail::lml_with_grad(sqdist, y, log_sigma, log_noise);
    REQUIRE(std::isfinite(eval.lml));

    const double fd_sigma = (detail::lml_only(sqdist, y, log_sigma + step, log_noise) -
                             detail::lml_only(sqdist, y, log_sigma - step, log_noise)) /
                            (2.0 * step);
    const double fd_noise = (detail::lml_only(sqdist, y, log_sigma, log_noise + step) -
                             detail::lml_only(sqdist, y, log_sigma, log_noise - step)) /
                            (2.0 * step);
    const double scale_sigma = std::max(1.0, std::abs(fd_sigma));
    const double scale_noise = std::max(1.0, std::abs(fd_noise));
    CHECK(std::abs(eval.grad_log_sigma - fd_sigma) / scale_sigma < 1e-4);
    CHECK(std::abs(eval.grad_log_noise - fd_noise) / scale_noise < 1e-4);
  }
}

TEST_CASE("profiled evidence gradient matches central finite differences") {
  Rng rng(67);
  const double step = 1e-5;
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 5 + static_cast<int>(rng.below(26));
    const Matrix z = random_matrix(m, 2, rng);
    Vector y(m);
    for (int i = 0; i < m; ++i) y(i) = rng.normal();
    const double log_sigma = std::log(0.5 + rng.uniform() * 2.0);
    const double log_lambda = std::log(0.05 + rng.uniform());

    const Matrix sqdist = pairwise_sqdist(z);
    const auto eval = detail::profile_lml_with_grad(sqdist, y, log_sigma, log_lambda);
    REQUIRE(std::isfinite(eval.lml));

    const double fd_sigma =
        (detail::profile_lml_only(sqdist, y, log_sigma + step, log_lambda) -
         detail::profile_lml_only(sqdist, y, log_sigma - step, log_lambda)) /
        (2.0 * step);
    const double fd_lambda =
        (detail::profile_lml_only(sqdist, y, log_sigma, log_lambda + step) -
         detail::profile_lml_only(sqdist, y, log_sigma, log_lambda - step)) /
        (2.0 * step);
    CHECK(std::abs(eval.grad_log_sigma - fd_sigma) / std::max(1.0, std::abs(fd_sigma)) <
          1e-4);
    CHECK(std::abs(eval.grad_log_noise - fd_lambda) / std::max(1.0, std::abs(fd_lambda)) <
          1e-4);
  }
}

TEST_CASE("select_hyperparams with zero iterations returns the initialization") {
  Rng rng(73);
  const Matrix z = random_matrix(12, 1, rng);
  Vector y(12);
  for (int i = 0; i < 12; ++i) y(i) = rng.normal();
  Rng opt_rng(1);
  const GpSelection sel = select_hyperparams(z, y, 1.3, 0.2, 0, opt_rng);
  CHECK(sel.sigma_z == doctest::Approx(1.3).epsilon(1e-12));
  CHECK(sel.lambda == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(sel.final_lml ==
        doctest::Approx(profile_log_marginal_likelihood(z, y, 1.3, 0.2)).epsilon(1e-12));
}

TEST_CASE("ascent never degrades the evidence") {
  Rng rng(79);
  for (int trial = 0; trial < 5; ++trial) {
    const int m = 40;
    const Matrix z = random_matrix(m, 1, rng);
    Vector y(m);
    for (int i = 0; i < m; ++i) y(i) = std::sin(2.0 * z(i, 0)) + 0.1 * rng.normal();
    const double init_sigma = median_heuristic(z);
    const double init_lambda = 0.5;
    const double initial = profile_log_marginal_likelihood(z, y, init_sigma, init_lambda);
    Rng opt_rng(trial);
    const GpSelection sel = select_hyperparams(z, y, init_sigma, init_lambda, 10, opt_rng);
    CHECK(sel.final_lml >= initial - 1e-9);
    CHECK(sel.final_lml ==
          doctest::Approx(profile_log_marginal_likelihood(z, y, sel.sigma_z, sel.lambda))
              .epsilon(1e-9));
  }
}

TEST_CASE("pure-noise targets drive the selected noise up") {
  int votes = 0;
  for (int seedling = 0; seedling < 20; ++seedling) {
    Rng rng(1000 + seedling);
    const int m = 200;
    const Matrix z = random_matrix(m, 2, rng);
    Vector y(m);
    for (int i = 0; i < m; ++i) y(i) = rng.normal();
    Rng opt_rng(seedling);
    const GpSelection sel = select_hyperparams(z, y, median_heuristic(z),
                                               default_lambda(m), 10, opt_rng);
    if (sel.lambda >= 0.1) ++votes;
  }
  CHECK(votes > 10);
}

TEST_CASE("select_hyperparams is reproducible") {
  Rng rng(83);
  const Matrix z = random_matrix(30, 2, rng);
  Vector y(30);
  for (int i = 0; i < 30; ++i) y(i) = rng.normal();
  Rng r1(5), r2(5);
  const GpSelection a = select_hyperparams(z, y, 1.0, 0.1, 10, r1);
  const GpSelection b = select_hyperparams(z, y, 1.0, 0.1, 10, r2);
  CHECK(a.sigma_z == b.sigma_z);
  CHECK(a.lambda == b.lambda);
  CHECK(a.final_lml == b.final_lml);
}
