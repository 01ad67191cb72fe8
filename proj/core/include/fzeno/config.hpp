#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fzeno/model.hpp"

namespace fzeno {

// Grid over an interval. Units: "seconds", "lambda" (dimensionless Lambda t), "t_d",
// or "inv_im_z2" (multiples of 1 / (Lambda |Im(z2 - x_bar)|)). Delta grids are dimensionless.
struct GridSpec {
  std::string kind = "hybrid";  // linear | log | hybrid
  int points = 2000;
  double min = 0.0;
  double max = 20.0;
  std::string unit = "t_d";
};

struct Quantity {
  double value = 0.0;
  std::string unit = "t_d";
};

struct OracleConfig {
  bool enabled = false;
  int m_bins = 2000;
};

enum class RunKind { Survival, Poles, Zeno, PZeno, SweepDelta, Table1, Fig1, Fig2, Fig3, Fig4 };
std::string to_string(RunKind k);

struct RunConfig {
  RunKind kind = RunKind::Survival;
  GridSpec time_grid;
  Quantity T{10.0, "t_d"};
  GridSpec tau_grid{"log", 120, 1e-6, 1.0, "T"};
  GridSpec delta_grid{"log", 41, 1e-12, 1e-2, "lambda"};
  OracleConfig oracle;
  // figure variants
  std::vector<double> abar_sq;
  std::vector<int> levels;
  std::vector<double> deltas;
  std::vector<std::vector<cplx>> states;
  std::vector<std::vector<cplx>> states_tau;
  bool reference_one_level = false;
};

struct OutputConfig {
  std::string directory = "out";
  std::vector<std::string> formats{"csv", "json"};
  bool has(const std::string& f) const;
};

struct FormFactorConfig {
  std::string kind = "hydrogen";  // hydrogen | sqrt
  double ratio = 1.0;
  double epsilon = 0.0;
  std::vector<std::vector<double>> perturbations;
};

struct ScenarioConfig {
  std::string name = "scenario";
  std::vector<double> energies;
  double lambda_sq = 0.0;
  double scale = 1.0;
  FormFactorConfig form_factor;
  std::vector<cplx> state;
  RunConfig run;
  OutputConfig output;

  ModelSpec model_spec() const;
};

// Strict parsing: unknown keys and wrong types raise ConfigError naming the JSON path.
ScenarioConfig parse_config(const std::string& json_text);
ScenarioConfig load_config(const std::string& path);
std::string dump_config(const ScenarioConfig& c);

// Structural and model validation; returns the list of problems.
std::vector<std::string> validate_config(const ScenarioConfig& c);

}  // namespace fzeno
