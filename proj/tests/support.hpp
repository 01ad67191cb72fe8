#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "fzeno/evolution.hpp"
#include "fzeno/model.hpp"
#include "fzeno/spectral.hpp"

namespace fzeno::test {

// desk-scale defaults: lambda^2 = 0.01, x_bar = 0.5, Lambda = 1
inline ModelSpec desk(int n, double lambda_sq = 0.01, double x_bar = 0.5) {
  ModelSpec s;
  s.energies.assign(n, x_bar);
  s.lambda_sq = lambda_sq;
  s.scale = 1.0;
  return s;
}

inline ModelSpec split(int n, double delta, double lambda_sq = 0.01, double x_bar = 0.5) {
  ModelSpec s = desk(n, lambda_sq, x_bar);
  s.energies.back() += delta;
  return s;
}

inline Eigen::VectorXcd random_vector(int n, std::mt19937& rng) {
  std::normal_distribution<double> g;
  Eigen::VectorXcd v(n);
  for (int k = 0; k < n; ++k) v[k] = cplx(g(rng), g(rng));
  return v;
}

inline InitialState random_state(int n, std::mt19937& rng) { return build_state(random_vector(n, rng)); }

inline InitialState state_of(std::vector<cplx> v) { return build_state(std::span<const cplx>(v)); }

// everything needed to propagate one model
struct Setup {
  explicit Setup(const ModelSpec& spec, EvolutionOptions o = {})
      : kernel(DispersionTable(Model(spec))), engine(kernel, solve_poles(kernel), o) {}
  ResolventKernel kernel;
  SurvivalEngine engine;
  const DispersionTable& table() const { return kernel.dispersion(); }
  const Model& model() const { return kernel.model(); }
};

inline std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  return v;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace fzeno::test
