#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fzeno/dispersion.hpp"
#include "fzeno/evolution.hpp"

namespace fzeno {

// F^p_ik = int x^p f_i f_k, p = 0, 1, 2
struct MomentSet {
  Eigen::MatrixXd F0, F1, F2;
};

// throws NonAnalyticFamily naming the first divergent order
MomentSet analytic_moments(const DispersionTable& table);

// Short-time expansion p = 1 - t^2/t_a^2 + t^4/t_b^4.
struct TaylorTimes {
  double inv_ta2 = 0.0;  // 1/(Lambda t_a)^2
  double inv_tb4 = 0.0;  // 1/(Lambda t_b)^4, may be <= 0
  double t_a = 0.0;      // seconds
  double t_b = 0.0;      // seconds, NaN unless inv_tb4 > 0
  cplx R1, R2, R3, R4;
  bool t_b_defined() const { return inv_tb4 > 0.0; }
  // t_b^2 / t_a, NaN when t_b is undefined
  double t_z() const;
};

TaylorTimes taylor_times(const MomentSet& m, std::span<const double> energies, double lambda_sq,
                         double scale, const InitialState& state);
TaylorTimes taylor_times(const DispersionTable& table, const InitialState& state);

// Short-time law 1 - p = (t/t_a)^(1-a) - ... for a form factor tail f^2 ~ C x^a with
// -1 < a < 1, where int f^2 diverges. Identical-shape families only.
struct NonAnalyticShortTime {
  double exponent = 0.0;     // 1 - a
  double coefficient = 0.0;  // K in 1 - p = lambda^2 |v.alpha|^2 K tau^(1-a)
  double g_reg = 0.0;        // finite part of int f^2
  double t_a = 0.0;          // seconds
  double t_z = 0.0;          // seconds, where the leading and the tau^2 terms balance
};

NonAnalyticShortTime non_analytic_short_time(const DispersionTable& table, const InitialState& state);

// 2 for families with finite F^0..F^2, 1 - a when F^0 diverges
double short_time_exponent(const DispersionTable& table);

// Leading Zeno time (1/Lambda) sqrt(12 <F^0> / <F^2>); the non-analytic closed form when
// F^0 diverges. Seconds.
double zeno_time_tz(const DispersionTable& table, const InitialState& state);

struct TzCurve {
  std::vector<double> delta;
  std::vector<double> t_z;  // t_b^2 / t_a with the full t_b, seconds
  double t_z0 = 0.0;        // same at delta = 0
  double argmax = 0.0;
  double max = 0.0;
  double delta_star = 0.0;     // analytic argmax estimate
  double peak_estimate = 0.0;  // analytic peak estimate, seconds
};

// One-split family: levels 0..N-2 at x_bar, level N-1 at x_bar + delta.
TzCurve zeno_time_tz_vs_delta(const ModelSpec& templ, const InitialState& state,
                              std::span<const double> delta_grid);

struct DecayTime {
  double t_d = 0.0;  // 1/(2 Lambda |Im z|), seconds
  int pole = -1;
  cplx weight = 0.0;  // alpha^dagger r alpha
};

// throws NoResonance when no resonance contributes to the state
DecayTime decay_time(const PoleSet& poles, const InitialState& state, double scale);

// gamma(t) = -log p(t) / (2t), from 1 - p to keep precision at short times
double decay_rate(const SurvivalEngine& engine, const SurvivalEngine::Prepared& s, double t_seconds);

struct TauZ {
  double tau_z = 0.0;  // seconds; T when nothing crosses
  bool crossed = false;
  std::vector<double> crossings;
  double gamma_T = 0.0;
};

// smallest root of gamma(tau) = gamma(T): 200-point log grid on [1e-6 t_z, T], 60 bisections
TauZ zeno_time_tau(const SurvivalEngine& engine, const InitialState& state, double T, double t_z);

enum class RegionKind { Zeno, AntiZeno };
std::string to_string(RegionKind k);

struct Region {
  double lo, hi;
  RegionKind kind;
};

std::vector<Region> detect_regions(const SurvivalEngine& engine, const InitialState& state, double T,
                                   double t_z);
double anti_zeno_extent(const std::vector<Region>& regions);

enum class ContinuousLimit { Survives, Exponential, Decays };
std::string to_string(ContinuousLimit c);
// tau -> 0 limit of p(tau)^(T/tau) from the short-time exponent
ContinuousLimit continuous_limit(double exponent);

// p(tau)^M with M = round(T / tau) >= 1
double repeated_measurement(const SurvivalEngine& engine, const InitialState& state, double tau, double T);

struct ExponentFit {
  double exponent, stderr_;
};
// slope of log(1 - p) against log t on a log grid in [t_lo, t_hi]
ExponentFit fit_short_time_exponent(const SurvivalEngine& engine, const InitialState& state, double t_lo,
                                    double t_hi, int points = 24);

// Constants of the short-time decay rate.
struct RateConstants {
  std::optional<double> s;       // Re W(x_bar) / Im W(x_bar), degenerate levels
  std::optional<double> slope;   // d gamma / dt at 0+ in 1/s^2, two-pole reduction
  std::optional<double> C1, C2;  // two-level split, dimensionless
  std::optional<double> C2_plus;  // variant with (1 + h) on the width term
  std::optional<double> gamma3;  // slow width estimate for a small split, 1/s
};

RateConstants rate_constants(const DispersionTable& table, const PoleSet& poles, const InitialState& state);

struct ZenoReport {
  std::optional<TaylorTimes> taylor;
  std::optional<NonAnalyticShortTime> non_analytic;
  double t_a = 0.0, t_b = 0.0;
  double t_z = 0.0;          // t_b^2 / t_a when defined, else the closed form
  double t_z_leading = 0.0;  // zeno_time_tz
  double tau_z = 0.0;
  bool tau_z_crossed = false;
  double tau_z_estimate = 0.0;  // 2 t_a^2 / t_d, or 4 t_a^3 / t_d^2 for exponent 3/2
  double t_d = 0.0;
  double T = 0.0;
  double short_time_exponent = 2.0;
  ContinuousLimit limit = ContinuousLimit::Survives;
  std::vector<Region> regions;
  RateConstants constants;
};

ZenoReport zeno_report(const SurvivalEngine& engine, const DispersionTable& table, const InitialState& state,
                       double T);

}  // namespace fzeno
