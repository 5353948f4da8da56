#include <doctest.h>

#include <cmath>

#include "lpci/rng.hpp"
#include "lpci/synthetic.hpp"

using namespace lpci;

namespace {

double correlation(const Vector& a, const Vector& b) {
  const double ma = a.mean();
  const double mb = b.mean();
  const double cov = ((a.array() - ma) * (b.array() - mb)).sum();
  const double va = (a.array() - ma).square().sum();
  const double vb = (b.array() - mb).square().sum();
  return cov / std::sqrt(va * vb);
}

}  // namespace

TEST_CASE("identical specs give bit-identical datasets") {
  const ScenarioSpec spec{Family::LiH1, 200, 4, Noise::Laplace, 991};
  const Dataset a = generate(spec);
  const Dataset b = generate(spec);
  CHECK((a.x - b.x).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.y - b.y).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.z - b.z).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.f1 == b.f1);
  CHECK(a.f2 == b.f2);

  const ScenarioSpec other{Family::LiH1, 200, 4, Noise::Laplace, 992};
  const Dataset c = generate(other);
  CHECK((a.x - c.x).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("smooth function set is finite on |x| <= 100") {
  for (int idx = 0; idx < kSmoothFnCount; ++idx) {
    for (double v : {-100.0, -1.5, 0.0, 2.0, 100.0}) {
      CHECK(std::isfinite(smooth_fn(idx, v)));
    }
  }
  CHECK(smooth_fn(0, 3.0) == 3.0);
  CHECK(smooth_fn(1, 3.0) == 9.0);
  CHECK(smooth_fn(2, 2.0) == 8.0);
  CHECK(smooth_fn(3, 0.0) == 0.0);
  CHECK(smooth_fn(4, 0.0) == 1.0);
  CHECK_THROWS_AS(smooth_fn(5, 0.0), DomainError);
}

TEST_CASE("noise families have the advertised moments") {
  // Laplace scale 1/sqrt(2) has unit variance; the mixture is centered.
  const int n = 1000000;
  const ScenarioSpec laplace_spec{Family::StroblH0, n, 1, Noise::Laplace, 404};
  const Dataset lap = generate_with_functions(laplace_spec, 0, 0);
  const double lap_var =
      (lap.x.col(0).array() - lap.x.col(0).mean()).square().sum() / (n - 1);
  CHECK(lap_var > 0.97);
  CHECK(lap_var < 1.03);

  const ScenarioSpec mix_spec{Family::StroblH0, n, 1, Noise::Mixture, 405};
  const Dataset mix = generate_with_functions(mix_spec, 0, 0);
  CHECK(std::abs(mix.x.col(0).mean()) < 0.01);
}

TEST_CASE("strobl models with identity functions match analytic correlations") {
  const int n = 100000;
  const ScenarioSpec h0{Family::StroblH0, n, 2, Noise::Gaussian, 17};
  const Dataset d0 = generate_with_functions(h0, 0, 0);
  CHECK(std::abs(correlation(d0.x.col(0), d0.y.col(0))) < 0.02);

  // Cov = 0.8^2, Var = 1 + 0.8^2, so corr = 0.64 / 1.64.
  const ScenarioSpec h1{Family::StroblH1, n, 2, Noise::Gaussian, 18};
  const Dataset d1 = generate_with_functions(h1, 0, 0);
  CHECK(correlation(d1.x.col(0), d1.y.col(0)) ==
        doctest::Approx(0.3902439024390244).epsilon(0.05));
}

TEST_CASE("illustration residuals are uncorrelated under h0") {
  const int n = 100000;
  const ScenarioSpec spec{Family::IllusH0, n, 5, Noise::Gaussian, 29};
  const Dataset data = generate(spec);
  const Vector rx = data.x.col(0) - data.z.col(0);
  const Vector ry = data.y.col(0) - data.z.col(0);
  CHECK(std::abs(correlation(rx, ry)) < 0.02);
  CHECK(data.f1 == -1);
  CHECK(data.f2 == -1);
}

TEST_CASE("oracle conditional mean closed cases") {
  Vector z(3);
  z << 0.4, -1.0, 2.0;

  // t2 at the conditional mean with sigma_y^2 = v = 1 gives 1/sqrt(2).
  CHECK(oracle_cond_mean_y(0.4, z, Family::IllusH0, 1.0) ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));

  CHECK_THROWS_AS(oracle_cond_mean_y(0.0, z, Family::StroblH0, 1.0), DomainError);

  // t_z = z makes the z-factor one, reducing to the y-structure on x.
  KernelSpec spec{1.3, 1.0, 0.8};
  Vector t1(4);
  t1 << 0.7, z(0), z(1), z(2);
  const double reduced = oracle_cond_mean_xddot(t1, z, Family::IllusH1, spec);
  CHECK(reduced == doctest::Approx(oracle_cond_mean_y(0.7, z, Family::IllusH1, 1.3))
                       .epsilon(1e-12));
}

TEST_CASE("oracle conditional means agree with Monte Carlo to 3 decimals") {
  Rng rng(57);
  for (int trial = 0; trial < 4; ++trial) {
    const Family family = (trial % 2 == 0) ? Family::IllusH0 : Family::IllusH1;
    const double v = (family == Family::IllusH0) ? 1.0 : 2.0;
    Vector z(3);
    for (int k = 0; k < 3; ++k) z(k) = rng.normal();
    const double t2 = rng.normal() * 1.5;
    const double sigma_y = 0.8 + rng.uniform();

    const int draws = 2000000;
    double acc = 0.0;
    Rng mc(1000 + trial);
    for (int i = 0; i < draws; ++i) {
      const double y = z(0) + std::sqrt(v) * mc.normal();
      acc += std::exp(-(t2 - y) * (t2 - y) / (2.0 * sigma_y * sigma_y));
    }
    const double mc_estimate = acc / draws;
    CHECK(std::abs(oracle_cond_mean_y(t2, z, family, sigma_y) - mc_estimate) < 1e-3);

    KernelSpec spec{0.9 + rng.uniform(), 1.0, 0.7 + rng.uniform()};
    Vector t1(4);
    t1 << rng.normal(), rng.normal(), rng.normal(), rng.normal();
    double acc_x = 0.0;
    Rng mcx(2000 + trial);
    for (int i = 0; i < draws; ++i) {
      const double x = z(0) + std::sqrt(v) * mcx.normal();
      Vector xz(4);
      xz << x, z(0), z(1), z(2);
      acc_x += kernel_xddot(t1, xz, 1, spec);
    }
    CHECK(std::abs(oracle_cond_mean_xddot(t1, z, family, spec) - acc_x / draws) < 1e-3);
  }
}

TEST_CASE("oracle conditional means stay in (0, 1]") {
  Rng rng(61);
  KernelSpec spec{1.1, 0.9, 1.4};
  for (int trial = 0; trial < 200; ++trial) {
    Vector z(2);
    z << rng.normal() * 3.0, rng.normal() * 3.0;
    const double my = oracle_cond_mean_y(rng.normal() * 3.0, z, Family::IllusH0, 0.9);
    CHECK(my > 0.0);
    CHECK(my <= 1.0);
    Vector t1(3);
    t1 << rng.normal(), rng.normal(), rng.normal();
    const double mx = oracle_cond_mean_xddot(t1, z, Family::IllusH1, spec);
    CHECK(mx > 0.0);
    CHECK(mx <= 1.0);
  }
}

TEST_CASE("illustration covariance construction is well posed") {
  for (int d_z : {1, 5, 20}) {
    const ScenarioSpec spec{Family::IllusH1, 50, d_z, Noise::Gaussian, 73};
    const Dataset data = generate(spec);
    CHECK(data.z.rows() == 50);
    CHECK(data.z.cols() == d_z);
    CHECK(data.z.allFinite());
  }
}

TEST_CASE("family and noise names round trip") {
  for (Family f : {Family::StroblH0, Family::StroblH1, Family::LiH0, Family::LiH1,
                   Family::IllusH0, Family::IllusH1}) {
    CHECK(parse_family(family_name(f)) == f);
  }
  for (Noise e : {Noise::Gaussian, Noise::Laplace, Noise::Mixture}) {
    CHECK(parse_noise(noise_name(e)) == e);
  }
  CHECK_THROWS_AS(parse_family("nope"), DomainError);
  CHECK(is_h0(Family::LiH0));
  CHECK(!is_h0(Family::IllusH1));
  CHECK(is_illustration(Family::IllusH0));
}
