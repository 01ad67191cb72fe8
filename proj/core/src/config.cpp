#include "fzeno/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "fzeno/errors.hpp"
#include "json.hpp"

namespace fzeno {

using nlohmann::json;

namespace {

const std::vector<std::pair<RunKind, std::string>> kind_names = {
    {RunKind::Survival, "survival"}, {RunKind::Poles, "poles"},           {RunKind::Zeno, "zeno"},
    {RunKind::PZeno, "pzeno"},       {RunKind::SweepDelta, "sweep_delta"}, {RunKind::Table1, "table1"},
    {RunKind::Fig1, "fig1"},         {RunKind::Fig2, "fig2"},             {RunKind::Fig3, "fig3"},
    {RunKind::Fig4, "fig4"},
};

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::ConfigError, "parse_config", path + ": " + what);
}

// Object reader over a fixed key set; unknown keys are reported before anything else
class Reader {
 public:
  Reader(const json& j, std::string path, std::initializer_list<const char*> keys) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; }))
        fail(at(it.key().c_str()), "unknown key \"" + it.key() + "\"");
  }

  bool has(const char* key) const { return j_.contains(key); }
  std::string at(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& get(const char* key) const { return j_.at(key); }

  double number(const char* key, std::optional<double> fallback = std::nullopt) {
    if (!has(key)) return fallback ? *fallback : (fail(at(key), "missing"), 0.0);
    const json& v = get(key);
    if (!v.is_number()) fail(at(key), "expected a number");
    return v.get<double>();
  }
  int integer(const char* key, int fallback) {
    if (!has(key)) return fallback;
    const json& v = get(key);
    if (!v.is_number_integer()) fail(at(key), "expected an integer");
    return v.get<int>();
  }
  bool boolean(const char* key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = get(key);
    if (!v.is_boolean()) fail(at(key), "expected true or false");
    return v.get<bool>();
  }
  std::string string(const char* key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = get(key);
    if (!v.is_string()) fail(at(key), "expected a string");
    return v.get<std::string>();
  }
  std::vector<double> numbers(const char* key) {
    std::vector<double> out;
    if (!has(key)) return out;
    const json& v = get(key);
    if (!v.is_array()) fail(at(key), "expected an array of numbers");
    for (const auto& e : v) {
      if (!e.is_number()) fail(at(key), "expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

 private:
  const json& j_;
  std::string path_;
};

std::vector<cplx> read_state(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of [re, im] pairs");
  std::vector<cplx> out;
  for (const auto& e : v) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
      fail(path, "expected an array of [re, im] pairs");
    out.emplace_back(e[0].get<double>(), e[1].get<double>());
  }
  return out;
}

std::vector<std::vector<cplx>> read_states(Reader& r, const char* key) {
  std::vector<std::vector<cplx>> out;
  if (!r.has(key)) return out;
  const json& v = r.get(key);
  if (!v.is_array()) fail(r.at(key), "expected an array of states");
  for (const auto& s : v) out.push_back(read_state(s, r.at(key)));
  return out;
}

GridSpec read_grid(Reader& parent, const char* key, GridSpec g) {
  if (!parent.has(key)) return g;
  Reader r(parent.get(key), parent.at(key), {"kind", "points", "min", "max", "unit"});
  g.kind = r.string("kind", g.kind);
  g.points = r.integer("points", g.points);
  g.min = r.number("min", g.min);
  g.max = r.number("max", g.max);
  g.unit = r.string("unit", g.unit);
  return g;
}

Quantity read_quantity(Reader& parent, const char* key, Quantity q) {
  if (!parent.has(key)) return q;
  Reader r(parent.get(key), parent.at(key), {"value", "unit"});
  q.value = r.number("value");
  q.unit = r.string("unit", q.unit);
  return q;
}

json state_json(const std::vector<cplx>& s) {
  json a = json::array();
  for (const auto& c : s) a.push_back({c.real(), c.imag()});
  return a;
}

json grid_json(const GridSpec& g) {
  return {{"kind", g.kind}, {"points", g.points}, {"min", g.min}, {"max", g.max}, {"unit", g.unit}};
}

}  // namespace

std::string to_string(RunKind k) {
  for (const auto& [kind, name] : kind_names)
    if (kind == k) return name;
  return "?";
}

bool OutputConfig::has(const std::string& f) const {
  return std::find(formats.begin(), formats.end(), f) != formats.end();
}

ModelSpec ScenarioConfig::model_spec() const {
  ModelSpec s;
  s.energies = energies;
  s.lambda_sq = lambda_sq;
  s.scale = scale;
  if (form_factor.kind == "hydrogen")
    s.form_factors.base = FormFactor::canonical_hydrogen();
  else if (form_factor.kind == "sqrt")
    s.form_factors.base = FormFactor::canonical_sqrt();
  else
    throw Error(ErrorCode::ConfigError, "model_spec", "model.form_factor.kind must be hydrogen or sqrt");
  s.form_factors.ratio = form_factor.ratio;
  s.form_factors.epsilon = form_factor.epsilon;
  for (const auto& c : form_factor.perturbations) s.form_factors.perturbations.emplace_back(c);
  return s;
}

ScenarioConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    fail("<root>", std::string("invalid JSON: ") + e.what());
  }
  ScenarioConfig c;
  Reader r(root, "", {"name", "model", "state", "run", "output"});
  c.name = r.string("name", c.name);

  if (!r.has("model")) fail("model", "missing");
  {
    Reader m(r.get("model"), "model", {"energies", "lambda_sq", "scale", "form_factor"});
    c.energies = m.numbers("energies");
    c.lambda_sq = m.number("lambda_sq");
    c.scale = m.number("scale", 1.0);
    if (m.has("form_factor")) {
      Reader f(m.get("form_factor"), "model.form_factor", {"kind", "ratio", "epsilon", "perturbations"});
      c.form_factor.kind = f.string("kind", "hydrogen");
      c.form_factor.ratio = f.number("ratio", 1.0);
      c.form_factor.epsilon = f.number("epsilon", 0.0);
      if (f.has("perturbations")) {
        const json& p = f.get("perturbations");
        if (!p.is_array()) fail("model.form_factor.perturbations", "expected an array of coefficient arrays");
        for (const auto& q : p) {
          if (!q.is_array()) fail("model.form_factor.perturbations", "expected an array of coefficient arrays");
          std::vector<double> coeffs;
          for (const auto& x : q) {
            if (!x.is_number()) fail("model.form_factor.perturbations", "coefficients must be numbers");
            coeffs.push_back(x.get<double>());
          }
          c.form_factor.perturbations.push_back(coeffs);
        }
      }
    }
  }

  if (r.has("state")) c.state = read_state(r.get("state"), "state");

  if (r.has("run")) {
    Reader u(r.get("run"), "run",
             {"kind", "time_grid", "T", "tau_grid", "delta_grid", "oracle", "abar_sq", "levels", "deltas", "states",
              "states_tau", "reference_one_level"});
    const std::string kind = u.string("kind", "survival");
    auto it = std::find_if(kind_names.begin(), kind_names.end(), [&](const auto& p) { return p.second == kind; });
    if (it == kind_names.end()) fail("run.kind", "unknown run kind \"" + kind + "\"");
    c.run.kind = it->first;
    c.run.time_grid = read_grid(u, "time_grid", c.run.time_grid);
    c.run.T = read_quantity(u, "T", c.run.T);
    c.run.tau_grid = read_grid(u, "tau_grid", c.run.tau_grid);
    c.run.delta_grid = read_grid(u, "delta_grid", c.run.delta_grid);
    if (u.has("oracle")) {
      Reader o(u.get("oracle"), "run.oracle", {"enabled", "m_bins"});
      c.run.oracle.enabled = o.boolean("enabled", false);
      c.run.oracle.m_bins = o.integer("m_bins", 2000);
    }
    c.run.abar_sq = u.numbers("abar_sq");
    for (double v : u.numbers("levels")) c.run.levels.push_back(static_cast<int>(v));
    c.run.deltas = u.numbers("deltas");
    c.run.states = read_states(u, "states");
    c.run.states_tau = read_states(u, "states_tau");
    c.run.reference_one_level = u.boolean("reference_one_level", false);
  }

  if (r.has("output")) {
    Reader o(r.get("output"), "output", {"directory", "formats"});
    c.output.directory = o.string("directory", c.output.directory);
    if (o.has("formats")) {
      const json& f = o.get("formats");
      if (!f.is_array()) fail("output.formats", "expected an array of strings");
      c.output.formats.clear();
      for (const auto& s : f) {
        if (!s.is_string()) fail("output.formats", "expected an array of strings");
        c.output.formats.push_back(s.get<std::string>());
      }
    }
  }
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "load_config", "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const ScenarioConfig& c) {
  json ff = {{"kind", c.form_factor.kind}, {"ratio", c.form_factor.ratio}, {"epsilon", c.form_factor.epsilon},
             {"perturbations", c.form_factor.perturbations}};
  json run = {{"kind", to_string(c.run.kind)},
              {"time_grid", grid_json(c.run.time_grid)},
              {"T", {{"value", c.run.T.value}, {"unit", c.run.T.unit}}},
              {"tau_grid", grid_json(c.run.tau_grid)},
              {"delta_grid", grid_json(c.run.delta_grid)},
              {"oracle", {{"enabled", c.run.oracle.enabled}, {"m_bins", c.run.oracle.m_bins}}},
              {"abar_sq", c.run.abar_sq},
              {"levels", c.run.levels},
              {"deltas", c.run.deltas},
              {"reference_one_level", c.run.reference_one_level}};
  json states = json::array(), states_tau = json::array();
  for (const auto& s : c.run.states) states.push_back(state_json(s));
  for (const auto& s : c.run.states_tau) states_tau.push_back(state_json(s));
  run["states"] = states;
  run["states_tau"] = states_tau;
  json j = {{"name", c.name},
            {"model",
             {{"energies", c.energies}, {"lambda_sq", c.lambda_sq}, {"scale", c.scale}, {"form_factor", ff}}},
            {"state", state_json(c.state)},
            {"run", run},
            {"output", {{"directory", c.output.directory}, {"formats", c.output.formats}}}};
  return j.dump(2) + "\n";
}

std::vector<std::string> validate_config(const ScenarioConfig& c) {
  std::vector<std::string> problems;
  const std::set<std::string> units = {"seconds", "lambda", "t_d", "inv_im_z2", "T"};
  const std::set<std::string> grids = {"linear", "log", "hybrid"};
  auto check_grid = [&](const GridSpec& g, const std::string& name) {
    if (!grids.count(g.kind)) problems.push_back(name + ".kind must be linear, log or hybrid");
    if (g.points < 2) problems.push_back(name + ".points must be at least 2");
    if (!(g.max > g.min)) problems.push_back(name + ".max must exceed min");
    if (g.kind == "log" && !(g.min > 0.0))
      problems.push_back(name + ".min must be positive on a log grid");
    if (!units.count(g.unit)) problems.push_back(name + ".unit \"" + g.unit + "\" is not recognized");
  };
  check_grid(c.run.time_grid, "run.time_grid");
  check_grid(c.run.tau_grid, "run.tau_grid");
  check_grid(c.run.delta_grid, "run.delta_grid");
  if (!units.count(c.run.T.unit) || c.run.T.unit == "T") problems.push_back("run.T.unit is not recognized");
  if (!(c.run.T.value > 0.0)) problems.push_back("run.T.value must be positive");
  if (c.run.oracle.m_bins < 100) problems.push_back("run.oracle.m_bins must be at least 100");
  for (const auto& f : c.output.formats)
    if (f != "csv" && f != "json") problems.push_back("output.formats entry \"" + f + "\" is not csv or json");
  if (c.form_factor.kind != "hydrogen" && c.form_factor.kind != "sqrt")
    problems.push_back("model.form_factor.kind must be hydrogen or sqrt");

  const RunKind k = c.run.kind;
  const bool needs_state = k == RunKind::Survival || k == RunKind::Poles || k == RunKind::Zeno ||
                           k == RunKind::PZeno || k == RunKind::SweepDelta || k == RunKind::Fig4;
  if (needs_state && c.state.size() != c.energies.size())
    problems.push_back("state must list one [re, im] pair per level");
  if (k == RunKind::Fig1 || k == RunKind::Fig3)
    for (double a : c.run.abar_sq)
      if (!(a >= 0.0)) problems.push_back("run.abar_sq entries must be nonnegative");
  if (k == RunKind::Fig3)
    for (int n : c.run.levels)
      if (n < 1) problems.push_back("run.levels entries must be positive");

  if (problems.empty() && k != RunKind::Table1) {
    const auto report = validate_model(c.model_spec());
    for (const auto& v : report.violations) problems.push_back("model: " + v);
  }
  return problems;
}

}  // namespace fzeno
