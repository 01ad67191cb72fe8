#pragma once

#include <string>
#include <vector>

#include "fzeno/config.hpp"

namespace fzeno {

// Hydrogen-like parameters used by the figure presets.
inline constexpr double hydrogen_scale = 8.498e18;    // Lambda, 1/s
inline constexpr double hydrogen_omega = 1.55e16;     // omega_1, 1/s
inline constexpr double hydrogen_lambda_sq = 6.43e-9;

// Desk-scale parameters: Lambda = 1, so times are in units of 1/Lambda.
inline constexpr double desk_lambda_sq = 0.01;
inline constexpr double desk_x_bar = 0.5;

std::vector<std::string> preset_names();
// throws ConfigError for an unknown name
ScenarioConfig make_preset(const std::string& name);

// alpha = sqrt(c/N) (1, ..., 1) + sqrt(1 - c) (1, -1, 0, ...) / sqrt(2) with c = abar_sq / N,
// so that |sum_k alpha_k|^2 = abar_sq
std::vector<cplx> state_with_bright_weight(int n, double abar_sq);

}  // namespace fzeno
