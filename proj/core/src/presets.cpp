#include "fzeno/presets.hpp"

#include <cmath>

#include "fzeno/errors.hpp"

namespace fzeno {

std::vector<std::string> preset_names() {
  return {"fig1",      "fig2",      "fig3",      "fig4",      "table1",       "desk-fig1",
          "desk-fig2", "desk-fig3", "desk-fig4", "desk-table1", "desk-survival"};
}

std::vector<cplx> state_with_bright_weight(int n, double abar_sq) {
  if (n < 1 || abar_sq < 0.0 || abar_sq > n)
    throw Error(ErrorCode::ConfigError, "state_with_bright_weight", "need 0 <= abar_sq <= N");
  const double c = abar_sq / n;
  std::vector<cplx> a(n, std::sqrt(c / n));
  if (n > 1) {
    const double d = std::sqrt((1.0 - c) / 2.0);
    a[0] += d;
    a[1] -= d;
  }
  return a;
}

namespace {

ScenarioConfig base(bool desk, int n) {
  ScenarioConfig c;
  c.lambda_sq = desk ? desk_lambda_sq : hydrogen_lambda_sq;
  c.scale = desk ? 1.0 : hydrogen_scale;
  c.energies.assign(n, desk ? desk_x_bar : hydrogen_omega / hydrogen_scale);
  c.form_factor.kind = "hydrogen";
  c.run.oracle.enabled = desk;
  return c;
}

// Delta values of the hydrogen presets carried over at fixed Delta / lambda^2
double desk_delta(double d) { return d * desk_lambda_sq / hydrogen_lambda_sq; }

}  // namespace

ScenarioConfig make_preset(const std::string& name) {
  const bool desk = name.rfind("desk-", 0) == 0;
  const std::string fig = desk ? name.substr(5) : name;
  ScenarioConfig c;
  if (fig == "fig1") {
    c = base(desk, 3);
    c.run.kind = RunKind::Fig1;
    c.run.abar_sq = {0.2, 1.0, 3.0};
    c.run.reference_one_level = true;
    c.run.time_grid = {"hybrid", 2000, 0.0, 20.0, "t_d"};
  } else if (fig == "fig2") {
    c = base(desk, 2);
    c.run.kind = RunKind::Fig2;
    c.run.states = {{1.0, -0.6}, {1.0, 1.0}, {1.0, 0.1}, {1.0, 0.0}};
    c.run.states_tau = {{1.0, 0.95}, {1.0, 0.55}, {1.0, 0.0}, {1.0, -0.6}};
    c.run.T = {5.0, "inv_im_z2"};
    c.run.delta_grid = desk ? GridSpec{"log", 41, 1e-6, 0.3, "lambda"} : GridSpec{"log", 41, 1e-12, 1e-2, "lambda"};
  } else if (fig == "fig3") {
    c = base(desk, 3);
    c.run.kind = RunKind::Fig3;
    c.run.levels = {3, 4, 10, 20};
    c.run.abar_sq = {0.9};
    c.run.T = {3.0, "inv_im_z2"};
    c.run.tau_grid = {"log", 120, 1e-6, 1.0, "T"};
  } else if (fig == "fig4") {
    c = base(desk, 2);
    c.run.kind = RunKind::Fig4;
    c.run.deltas = {1e-12, 1e-9, 1e-8};
    if (desk)
      for (auto& d : c.run.deltas) d = desk_delta(d);
    c.state = {1.0, -0.7239};  // |alpha_hat|^2 = 0.05 after normalization
    c.run.T = {2.0, "inv_im_z2"};
    c.run.tau_grid = {"log", 120, 1e-6, 1.0, "T"};
  } else if (fig == "table1") {
    c = base(desk, 1);
    c.run.kind = RunKind::Table1;
    c.run.T = {10.0, "t_d"};
  } else if (desk && fig == "survival") {
    c = base(true, 3);
    c.run.kind = RunKind::Survival;
    c.state = {2.0, 1.0, 1.0};
    c.run.time_grid = {"hybrid", 600, 0.0, 20.0, "t_d"};
  } else {
    throw Error(ErrorCode::ConfigError, "make_preset", "unknown preset \"" + name + "\"");
  }
  c.name = name;
  c.output.directory = name;
  return c;
}

}  // namespace fzeno
