#include "lpci/synthetic.hpp"

#include <cmath>

#include "lpci/numerics.hpp"

namespace lpci {

bool is_h0(Family family) {
  return family == Family::StroblH0 || family == Family::LiH0 ||
         family == Family::IllusH0;
}

bool is_illustration(Family family) {
  return family == Family::IllusH0 || family == Family::IllusH1;
}

std::string family_name(Family family) {
  switch (family) {
    case Family::StroblH0: return "strobl_h0";
    case Family::StroblH1: return "strobl_h1";
    case Family::LiH0: return "li_h0";
    case Family::LiH1: return "li_h1";
    case Family::IllusH0: return "illus_h0";
    case Family::IllusH1: return "illus_h1";
  }
  return "unknown";
}

std::string noise_name(Noise noise) {
  switch (noise) {
    case Noise::Gaussian: return "gaussian";
    case Noise::Laplace: return "laplace";
    case Noise::Mixture: return "mixture";
  }
  return "unknown";
}

Family parse_family(const std::string& name) {
  if (name == "strobl_h0") return Family::StroblH0;
  if (name == "strobl_h1") return Family::StroblH1;
  if (name == "li_h0") return Family::LiH0;
  if (name == "li_h1") return Family::LiH1;
  if (name == "illus_h0") return Family::IllusH0;
  if (name == "illus_h1") return Family::IllusH1;
  throw DomainError("unknown scenario family: " + name);
}

Noise parse_noise(const std::string& name) {
  if (name == "gaussian") return Noise::Gaussian;
  if (name == "laplace") return Noise::Laplace;
  if (name == "mixture") return Noise::Mixture;
  throw DomainError("unknown noise family: " + name);
}

double smooth_fn(int index, double value) {
  switch (index) {
    case 0: return value;
    case 1: return value * value;
    case 2: return value * value * value;
    case 3: return std::tanh(value);
    case 4: return std::exp(-std::abs(value));
    default: throw DomainError("smooth_fn: index out of range");
  }
}

const char* smooth_fn_name(int index) {
  switch (index) {
    case 0: return "identity";
    case 1: return "square";
    case 2: return "cube";
    case 3: return "tanh";
    case 4: return "exp_neg_abs";
    default: return "none";
  }
}

namespace {

// Laplace scale 1/sqrt(2) gives unit variance; the mixture has weights
// (0.7, 0.3), component means (-0.3, +0.7), component std 1, so its mean is
// exactly zero.
double draw_noise(Noise noise, Rng& rng) {
  switch (noise) {
    case Noise::Gaussian:
      return rng.normal();
    case Noise::Laplace: {
      const double u = rng.uniform() - 0.5;
      const double scale = 1.0 / std::sqrt(2.0);
      const double sign = (u < 0.0) ? -1.0 : 1.0;
      return -scale * sign * std::log1p(-2.0 * std::abs(u));
    }
    case Noise::Mixture: {
      const double mean = (rng.uniform() < 0.7) ? -0.3 : 0.7;
      return mean + rng.normal();
    }
  }
  throw DomainError("draw_noise: unknown noise family");
}

Vector draw_noise_vector(Noise noise, int n, Rng& rng) {
  Vector out(n);
  for (int i = 0; i < n; ++i) out(i) = draw_noise(noise, rng);
  return out;
}

Dataset generate_body(const ScenarioSpec& spec, int f1, int f2, Rng& rng) {
  const int n = spec.n;
  const int d_z = spec.d_z;
  Dataset data;
  data.f1 = f1;
  data.f2 = f2;
  data.x.resize(n, 1);
  data.y.resize(n, 1);

  switch (spec.family) {
    case Family::StroblH0:
    case Family::StroblH1: {
      data.z.resize(n, d_z);
      for (int i = 0; i < n; ++i) {
        for (int k = 0; k < d_z; ++k) data.z(i, k) = draw_noise(spec.noise, rng);
      }
      const Vector ex = draw_noise_vector(spec.noise, n, rng);
      const Vector ey = draw_noise_vector(spec.noise, n, rng);
      if (spec.family == Family::StroblH0) {
        for (int i = 0; i < n; ++i) {
          data.x(i, 0) = smooth_fn(f1, ex(i));
          data.y(i, 0) = smooth_fn(f2, ey(i));
        }
      } else {
        const Vector eb = draw_noise_vector(spec.noise, n, rng);
        for (int i = 0; i < n; ++i) {
          data.x(i, 0) = smooth_fn(f1, ex(i) + 0.8 * eb(i));
          data.y(i, 0) = smooth_fn(f2, ey(i) + 0.8 * eb(i));
        }
      }
      break;
    }
    case Family::LiH0:
    case Family::LiH1: {
      data.z.resize(n, d_z);
      for (int i = 0; i < n; ++i) {
        for (int k = 0; k < d_z; ++k) data.z(i, k) = draw_noise(spec.noise, rng);
      }
      const Vector zbar = data.z.rowwise().mean();
      const Vector ex = draw_noise_vector(spec.noise, n, rng);
      const Vector ey = draw_noise_vector(spec.noise, n, rng);
      if (spec.family == Family::LiH0) {
        for (int i = 0; i < n; ++i) {
          data.x(i, 0) = smooth_fn(f1, zbar(i) + ex(i));
          data.y(i, 0) = smooth_fn(f2, zbar(i) + ey(i));
        }
      } else {
        const Vector eb = draw_noise_vector(spec.noise, n, rng);
        for (int i = 0; i < n; ++i) {
          data.x(i, 0) = smooth_fn(f1, zbar(i) + ex(i)) + eb(i);
          data.y(i, 0) = smooth_fn(f2, zbar(i) + ey(i)) + eb(i);
        }
      }
      break;
    }
    case Family::IllusH0:
    case Family::IllusH1: {
      // Z ~ N(0, A A') with A entries iid standard normal; the epsilons are
      // standard normal for these models regardless of spec.noise.
      Matrix a(d_z, d_z);
      for (int i = 0; i < d_z; ++i) {
        for (int k = 0; k < d_z; ++k) a(i, k) = rng.normal();
      }
      const Matrix cov = a * a.transpose();
      data.z = sample_mvn(Vector::Zero(d_z), cov, n, rng);
      Vector ex(n), ey(n);
      for (int i = 0; i < n; ++i) ex(i) = rng.normal();
      for (int i = 0; i < n; ++i) ey(i) = rng.normal();
      if (spec.family == Family::IllusH0) {
        data.x.col(0) = data.z.col(0) + ex;
        data.y.col(0) = data.z.col(0) + ey;
      } else {
        Vector eb(n);
        for (int i = 0; i < n; ++i) eb(i) = rng.normal();
        data.x.col(0) = data.z.col(0) + ex + eb;
        data.y.col(0) = data.z.col(0) + ey + eb;
      }
      data.f1 = -1;
      data.f2 = -1;
      break;
    }
  }
  return data;
}

void validate_spec(const ScenarioSpec& spec) {
  if (spec.n < 1) throw DomainError("generate: n must be >= 1");
  if (spec.d_z < 1) throw DomainError("generate: d_z must be >= 1");
}

}  // namespace

Dataset generate(const ScenarioSpec& spec) {
  validate_spec(spec);
  Rng rng(spec.rng_seed);
  int f1 = -1;
  int f2 = -1;
  if (!is_illustration(spec.family)) {
    f1 = static_cast<int>(rng.below(kSmoothFnCount));
    f2 = static_cast<int>(rng.below(kSmoothFnCount));
  }
  return generate_body(spec, f1, f2, rng);
}

Dataset generate_with_functions(const ScenarioSpec& spec, int f1, int f2) {
  validate_spec(spec);
  if (is_illustration(spec.family)) {
    throw DomainError("generate_with_functions: illustration models take no functions");
  }
  if (f1 < 0 || f1 >= kSmoothFnCount || f2 < 0 || f2 >= kSmoothFnCount) {
    throw DomainError("generate_with_functions: function index out of range");
  }
  Rng rng(spec.rng_seed);
  return generate_body(spec, f1, f2, rng);
}

namespace {

double conditional_noise_variance(Family family) {
  if (family == Family::IllusH0) return 1.0;
  if (family == Family::IllusH1) return 2.0;
  throw DomainError("oracle conditional means exist only for the illustration models");
}

// E[exp(-(t - W)^2 / (2 sigma^2))] for W ~ N(m, v).
double gaussian_convolution(double t, double m, double v, double sigma) {
  const double s2 = sigma * sigma + v;
  return sigma / std::sqrt(s2) * std::exp(-(t - m) * (t - m) / (2.0 * s2));
}

}  // namespace

double oracle_cond_mean_y(double t2, const VectorRef& z, Family family, double sigma_y) {
  const double v = conditional_noise_variance(family);
  return gaussian_convolution(t2, z(0), v, sigma_y);
}

double oracle_cond_mean_xddot(const VectorRef& t1, const VectorRef& z, Family family,
                              const KernelSpec& spec) {
  const double v = conditional_noise_variance(family);
  if (t1.size() != z.size() + 1) {
    throw DimensionMismatch("oracle_cond_mean_xddot: location size is not 1 + d_z");
  }
  const double z_factor = gaussian(t1.tail(z.size()), z, spec.sigma_z);
  return z_factor * gaussian_convolution(t1(0), z(0), v, spec.sigma_x);
}

}  // namespace lpci
