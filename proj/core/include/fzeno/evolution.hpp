#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <vector>

#include "fzeno/quadrature.hpp"
#include "fzeno/spectral.hpp"

namespace fzeno {

struct EvolutionOptions {
  // background contour: the ray z = r exp(-i angle), r in [r_min, r_max]
  double contour_angle = pi / 4;
  double r_min = 1e-16;
  double r_max = 1e8;
  double panel_ratio = 2.0;
  // panels are bisected (at most max_panel_splits times) until |K - G| <= panel_split * L1
  double panel_split = 1e-12;
  int max_panel_splits = 6;
  quad::Tolerance background_tolerance{1e-13, 1e-8, 0};
  double sum_rule_tolerance = 1e-6;
  bool include_background = true;
};

struct SurvivalResult {
  std::vector<double> t;  // seconds
  std::vector<cplx> amplitude;
  std::vector<double> p;
  std::vector<cplx> pole_part;
  std::vector<cplx> background_part;
  std::optional<double> p_infinity;
  std::optional<double> f_osc;  // Hz
  double sum_rule_residual = 0.0;
};

// A(t) = alpha^dagger M(Lambda t) alpha with
// M(tau) = -sum_j r_j exp(-i z_j tau) + (1 / 2 pi i) int_ray exp(-i z tau) (G_II - G_I) dz.
class SurvivalEngine {
 public:
  SurvivalEngine(const ResolventKernel& kernel, PoleSet poles, EvolutionOptions options = {});

  const PoleSet& poles() const { return poles_; }
  // poles enclosed between the real axis and the contour ray
  const std::vector<int>& enclosed() const { return enclosed_; }
  double scale() const { return scale_; }
  int size() const { return n_; }

  Eigen::MatrixXcd pole_matrix(double tau) const;
  Eigen::MatrixXcd background_matrix(double tau) const;
  // M(0) - I, zero up to quadrature accuracy when the pole set is complete
  const Eigen::MatrixXcd& sum_rule_residual() const { return residual_; }

  // per-state scalar reduction of the pole and background data
  struct Prepared {
    std::vector<cplx> pole_weights;  // alpha^dagger r_j alpha
    std::vector<cplx> node_weights;  // alpha^dagger B_i alpha
    cplx background_zero;            // background at tau = 0
  };
  Prepared prepare(const InitialState& state) const;

  // numerically stable evaluation anchored at A(0) = 1
  cplx amplitude(const Prepared& s, double tau, cplx* pole_part = nullptr) const;
  double probability(const Prepared& s, double tau) const { return std::norm(amplitude(s, tau)); }
  // 1 - p(tau) evaluated without cancellation
  double loss(const Prepared& s, double tau) const;

  SurvivalResult survival(const InitialState& state, std::span<const double> t_seconds) const;

 private:
  cplx background(const Prepared& s, double tau, bool minus_zero) const;

  int n_;
  double scale_;
  EvolutionOptions options_;
  PoleSet poles_;
  std::vector<int> enclosed_;
  std::vector<cplx> nodes_;                 // z on the ray
  std::vector<double> kw_, gw_;             // Kronrod and Gauss weights (with dr)
  std::vector<Eigen::MatrixXcd> jumps_;     // (G_II - G_I)(z) e^{-i angle} / (2 pi i)
  std::vector<int> panel_of_;
  int panels_ = 0;
  Eigen::MatrixXcd residual_;
};

SurvivalResult survival_amplitude(const ResolventKernel& kernel, const InitialState& state,
                                  const PoleSet& poles, std::span<const double> t_seconds,
                                  const EvolutionOptions& options = {});

// Closed-form pole expressions for a fully degenerate level or a single split level
// with identical form factors (p = 1). The degenerate form carries the exact pole
// normalization; the split form uses leading-order weights (valid for delta << lambda^2),
// so it differs from survival_amplitude at O(lambda^2). The background is taken from the
// contour integral when requested.
SurvivalResult survival_closed_form(const ResolventKernel& kernel, const InitialState& state,
                                    const PoleSet& poles, std::span<const double> t_seconds,
                                    bool include_background, const EvolutionOptions& options = {});

// gamma(t) = -log p(t) / (2 t); NaN at t = 0
std::vector<double> decay_rate_curve(const SurvivalResult& result);

// exp(w) - 1 without cancellation for small |w|
cplx cexpm1(cplx w);

}  // namespace fzeno
