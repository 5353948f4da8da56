#pragma once

#include <cstdint>
#include <string>

#include "lpci/common.hpp"
#include "lpci/kernels.hpp"
#include "lpci/rng.hpp"

namespace lpci {

/// The six benchmark models. The *_h0 variants are conditionally independent
/// by construction; the *_h1 variants share a hidden noise component.
enum class Family {
  StroblH0,
  StroblH1,
  LiH0,
  LiH1,
  IllusH0,
  IllusH1,
};

enum class Noise { Gaussian, Laplace, Mixture };

bool is_h0(Family family);
bool is_illustration(Family family);
std::string family_name(Family family);
std::string noise_name(Noise noise);
Family parse_family(const std::string& name);
Noise parse_noise(const std::string& name);

struct ScenarioSpec {
  Family family = Family::StroblH0;
  int n = 500;
  int d_z = 1;
  Noise noise = Noise::Gaussian;
  std::uint64_t rng_seed = 0;
};

/// Generated triplet plus the smooth-function choices made for the strobl/li
/// families (indices into smooth_fn, -1 for the illustration models).
struct Dataset {
  Matrix x;
  Matrix y;
  Matrix z;
  int f1 = -1;
  int f2 = -1;
};

inline constexpr int kSmoothFnCount = 5;

/// The function set {t, t^2, t^3, tanh(t), exp(-|t|)} indexed 0..4.
double smooth_fn(int index, double value);
const char* smooth_fn_name(int index);

/// Draws a dataset per the scenario. For strobl/li the two smooth functions
/// are chosen uniformly (and independently) once per call; identical specs
/// give bit-identical datasets.
Dataset generate(const ScenarioSpec& spec);

/// Test hook for the strobl/li families with the smooth functions pinned.
Dataset generate_with_functions(const ScenarioSpec& spec, int f1, int f2);

/// Closed-form E[k_y(t2, Y) | Z = z] for the illustration models, where
/// Y | Z = z is N(z_1, v) with v = 1 (h0) or 2 (h1):
///   sigma_y / sqrt(sigma_y^2 + v) * exp(-(t2 - z_1)^2 / (2 (sigma_y^2 + v))).
double oracle_cond_mean_y(double t2, const VectorRef& z, Family family, double sigma_y);

/// Closed-form E[k_xddot(t1, (X, Z)) | Z = z] for the illustration models;
/// the z-factor k_z(t_z, z) is deterministic and the x-factor is the same
/// Gaussian convolution identity applied to X | Z = z ~ N(z_1, v).
double oracle_cond_mean_xddot(const VectorRef& t1, const VectorRef& z, Family family,
                              const KernelSpec& spec);

}  // namespace lpci
