#include "fzeno/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

#include "fzeno/errors.hpp"
#include "fzeno/evolution.hpp"
#include "fzeno/oracle.hpp"
#include "fzeno/presets.hpp"
#include "fzeno/spectral.hpp"
#include "fzeno/zeno.hpp"
#include "json.hpp"

namespace fzeno {

using nlohmann::json;
namespace fs = std::filesystem;

int thread_count() {
  if (const char* env = std::getenv("FZENO_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(int n, const std::function<void(int)>& body) {
  const int workers = std::min(n, thread_count());
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex m;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(m);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<double> make_grid(const GridSpec& g, double unit) {
  std::vector<double> v;
  const int n = g.points;
  auto linear = [&](int m, double a, double b) {
    for (int i = 0; i < m; ++i) v.push_back(a + (b - a) * i / (m - 1));
  };
  auto geometric = [&](int m, double a, double b) {
    for (int i = 0; i < m; ++i) v.push_back(a * std::pow(b / a, static_cast<double>(i) / (m - 1)));
  };
  if (g.kind == "linear") {
    linear(n, g.min, g.max);
  } else if (g.kind == "log") {
    geometric(n, g.min, g.max);
  } else {
    linear(n / 2, g.min, g.max);
    geometric(n - n / 2, std::max(g.min, 1e-6 * g.max), g.max);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  for (auto& x : v) x *= unit;
  return v;
}

namespace {

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string label_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

json cjson(cplx z) { return json::array({z.real(), z.imag()}); }

// finite values as numbers, the rest as null
json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

// Everything derived from one model; the kernel and engine are immovable in practice.
struct Analysis {
  std::unique_ptr<ResolventKernel> kernel;
  std::unique_ptr<SurvivalEngine> engine;
  double scale;

  explicit Analysis(const ModelSpec& spec) : scale(spec.scale) {
    kernel = std::make_unique<ResolventKernel>(DispersionTable{Model(spec)});
    engine = std::make_unique<SurvivalEngine>(*kernel, solve_poles(*kernel));
  }
  const Model& model() const { return kernel->model(); }
  const DispersionTable& table() const { return kernel->dispersion(); }
  const PoleSet& poles() const { return engine->poles(); }

  // |Im z| of the fastest resonance, dimensionless
  double fastest_width() const {
    double w = 0.0;
    for (const auto& p : poles().poles)
      if (p.kind == PoleKind::Resonance) w = std::max(w, std::abs(p.offset.imag()));
    if (!(w > 0.0)) throw Error(ErrorCode::NoResonance, "run_scenario", "model has no resonance to set time units");
    return w;
  }
  // seconds per unit
  double unit(const std::string& u, double T = 0.0) const {
    if (u == "seconds") return 1.0;
    if (u == "lambda") return 1.0 / scale;
    if (u == "t_d") return 1.0 / (2.0 * scale * fastest_width());
    if (u == "inv_im_z2") return 1.0 / (scale * fastest_width());
    if (u == "T") return T;
    throw Error(ErrorCode::ConfigError, "run_scenario", "unknown unit \"" + u + "\"");
  }
};

InitialState state_of(const std::vector<cplx>& v) {
  return build_state(Eigen::Map<const Eigen::VectorXcd>(v.data(), static_cast<Eigen::Index>(v.size())));
}

json poles_json(const PoleSet& ps, double scale) {
  json a = json::array();
  for (const auto& p : ps.poles) {
    a.push_back({{"z", cjson(p.z())},
                 {"offset", cjson(p.offset)},
                 {"kind", to_string(p.kind)},
                 {"provenance", to_string(p.provenance)},
                 {"seed", p.seed},
                 {"multiplicity", p.multiplicity},
                 {"residue_norm", p.residue.size() ? p.residue.norm() : 0.0},
                 {"width_per_second", 2.0 * scale * std::abs(p.offset.imag())}});
  }
  return a;
}

json regions_json(const std::vector<Region>& rs) {
  json a = json::array();
  for (const auto& r : rs) a.push_back({{"from", r.lo}, {"to", r.hi}, {"kind", to_string(r.kind)}});
  return a;
}

json zeno_json(const ZenoReport& z) {
  json j = {{"t_a", num(z.t_a)},
            {"t_b", num(z.t_b)},
            {"t_z", num(z.t_z)},
            {"t_z_leading", num(z.t_z_leading)},
            {"tau_z", num(z.tau_z)},
            {"tau_z_crossed", z.tau_z_crossed},
            {"tau_z_estimate", num(z.tau_z_estimate)},
            {"t_d", num(z.t_d)},
            {"T", z.T},
            {"short_time_exponent", z.short_time_exponent},
            {"continuous_measurement_limit", to_string(z.limit)},
            {"regions", regions_json(z.regions)},
            {"anti_zeno_extent", anti_zeno_extent(z.regions)}};
  if (z.taylor)
    j["R"] = json::array({cjson(z.taylor->R1), cjson(z.taylor->R2), cjson(z.taylor->R3), cjson(z.taylor->R4)});
  const auto& c = z.constants;
  json k = json::object();
  if (c.s) k["s"] = *c.s;
  if (c.slope) k["gamma_slope"] = *c.slope;
  if (c.C1) k["C1"] = *c.C1;
  if (c.C2) k["C2"] = *c.C2;
  if (c.C2_plus) k["C2_plus"] = *c.C2_plus;
  if (c.gamma3) k["gamma3"] = *c.gamma3;
  j["constants"] = k;
  return j;
}

class Csv {
 public:
  Csv(const fs::path& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw Error(ErrorCode::IoError, "emit_plotdata", "cannot write " + path.string());
    row(header);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

class Output {
 public:
  Output(const ScenarioConfig& c, const std::string& dir) : config_(c), dir_(dir) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(ErrorCode::IoError, "run_scenario", "cannot create " + dir_.string());
  }
  bool csv() const { return config_.output.has("csv"); }
  Csv open(const std::string& name, const std::vector<std::string>& header) {
    files_.push_back((dir_ / name).string());
    return Csv(dir_ / name, header);
  }
  void write_text(const std::string& name, const std::string& text) {
    std::ofstream out(dir_ / name);
    if (!out) throw Error(ErrorCode::IoError, "run_scenario", "cannot write " + (dir_ / name).string());
    out << text;
    files_.push_back((dir_ / name).string());
  }
  void finish(json report) {
    write_text("config.resolved.json", dump_config(config_));
    if (config_.output.has("json")) write_text("report.json", report.dump(2) + "\n");
  }
  RunSummary summary() const { return {dir_.string(), files_}; }

 private:
  const ScenarioConfig& config_;
  fs::path dir_;
  std::vector<std::string> files_;
};

// main path vs binned oracle on [0, window]
json oracle_check(const Analysis& a, const InitialState& s, double window, const OracleConfig& oc) {
  std::vector<double> t;
  for (int i = 0; i <= 300; ++i) t.push_back(window * i / 300.0);
  const auto main = a.engine->survival(s, t);
  OracleOptions o;
  o.bins = oc.m_bins;
  const auto orc = oracle_survival_converged(a.model(), s, t, o);
  double d = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) d = std::max(d, std::abs(main.p[i] - orc.p[i]));
  return {{"window_seconds", window}, {"max_abs_diff", d}, {"tolerance", 1e-3}, {"pass", d <= 1e-3}};
}

json model_json(const ScenarioConfig& c) {
  return {{"levels", c.energies.size()}, {"lambda_sq", c.lambda_sq}, {"scale", c.scale},
          {"form_factor", c.form_factor.kind}};
}

double T_seconds(const ScenarioConfig& c, const Analysis& a) { return c.run.T.value * a.unit(c.run.T.unit); }

json zeno_or_error(const Analysis& a, const InitialState& s, double T) {
  try {
    return zeno_json(zeno_report(*a.engine, a.table(), s, T));
  } catch (const Error& e) {
    return {{"error", e.what()}, {"operation", e.operation()}};
  }
}

// ---- run kinds ----

json run_survival(const ScenarioConfig& c, Output& out) {
  const Analysis a(c.model_spec());
  const InitialState s = state_of(c.state);
  const auto t = make_grid(c.run.time_grid, a.unit(c.run.time_grid.unit));
  const auto r = a.engine->survival(s, t);
  const auto gamma = decay_rate_curve(r);
  if (out.csv()) {
    Csv f = out.open("survival.csv", {"t_seconds", "p", "gamma", "pole_part_abs", "background_abs"});
    for (std::size_t i = 0; i < t.size(); ++i)
      f.row({fmt(t[i]), fmt(r.p[i]), fmt(gamma[i]), fmt(std::abs(r.pole_part[i])),
             fmt(std::abs(r.background_part[i]))});
  }
  json rep = {{"kind", "survival"},
              {"model", model_json(c)},
              {"poles", poles_json(a.poles(), a.scale)},
              {"sum_rule_residual", r.sum_rule_residual},
              {"p_infinity", r.p_infinity ? json(*r.p_infinity) : json(nullptr)},
              {"f_osc_hz", r.f_osc ? json(*r.f_osc) : json(nullptr)},
              {"zeno", zeno_or_error(a, s, T_seconds(c, a))}};
  if (c.run.oracle.enabled) {
    double td = a.unit("t_d");
    try {
      td = decay_time(a.poles(), s, a.scale).t_d;
    } catch (const Error&) {
    }
    rep["oracle"] = oracle_check(a, s, 3.0 * td, c.run.oracle);
  }
  return rep;
}

json run_poles(const ScenarioConfig& c, Output& out) {
  const Analysis a(c.model_spec());
  if (out.csv()) {
    Csv f = out.open("poles.csv", {"re_z", "im_z", "kind", "multiplicity", "residue_norm"});
    for (const auto& p : a.poles().poles)
      f.row({fmt(p.z().real()), fmt(p.z().imag()), to_string(p.kind), std::to_string(p.multiplicity),
             fmt(p.residue.size() ? p.residue.norm() : 0.0)});
  }
  return {{"kind", "poles"},
          {"model", model_json(c)},
          {"poles", poles_json(a.poles(), a.scale)},
          {"sum_rule_residual", a.engine->sum_rule_residual().norm()}};
}

json run_zeno(const ScenarioConfig& c, Output&) {
  const Analysis a(c.model_spec());
  const InitialState s = state_of(c.state);
  return {{"kind", "zeno"},
          {"model", model_json(c)},
          {"poles", poles_json(a.poles(), a.scale)},
          {"zeno", zeno_json(zeno_report(*a.engine, a.table(), s, T_seconds(c, a)))}};
}

struct PCurve {
  std::string label;
  double T = 0.0;
  std::vector<double> tau, M, pm;
  json info;
};

PCurve pzeno_curve(const ScenarioConfig& c, const ModelSpec& spec, const InitialState& s, const std::string& label) {
  const Analysis a(spec);
  PCurve pc;
  pc.label = label;
  pc.T = T_seconds(c, a);
  pc.tau = make_grid(c.run.tau_grid, a.unit(c.run.tau_grid.unit, pc.T));
  for (double tau : pc.tau) {
    pc.M.push_back(std::max(1.0, std::round(pc.T / tau)));
    pc.pm.push_back(repeated_measurement(*a.engine, s, tau, pc.T));
  }
  double t_z = 0.0;
  try {
    t_z = zeno_time_tz(a.table(), s);
  } catch (const Error&) {
    t_z = pc.T * 1e-3;
  }
  const auto regions = detect_regions(*a.engine, s, pc.T, t_z);
  pc.info = {{"label", label},
             {"T_seconds", pc.T},
             {"regions", regions_json(regions)},
             {"anti_zeno_extent", anti_zeno_extent(regions)},
             {"poles", poles_json(a.poles(), a.scale)}};
  if (c.run.oracle.enabled) {
    try {
      pc.info["oracle"] = oracle_check(a, s, std::min(3.0 * decay_time(a.poles(), s, a.scale).t_d, pc.T), c.run.oracle);
    } catch (const Error& e) {
      pc.info["oracle"] = {{"skipped", e.what()}};
    }
  }
  return pc;
}

json write_pcurves(std::vector<PCurve>& curves, Output& out) {
  json info = json::array();
  if (out.csv()) {
    Csv all = out.open("pzeno.csv", {"curve", "tau_seconds", "M", "p_M"});
    for (const auto& pc : curves)
      for (std::size_t i = 0; i < pc.tau.size(); ++i)
        all.row({pc.label, fmt(pc.tau[i]), fmt(pc.M[i]), fmt(pc.pm[i])});
    for (const auto& pc : curves) {
      Csv f = out.open("pzeno_" + pc.label + ".csv", {"tau_seconds", "M", "p_M"});
      for (std::size_t i = 0; i < pc.tau.size(); ++i) f.row({fmt(pc.tau[i]), fmt(pc.M[i]), fmt(pc.pm[i])});
    }
  }
  for (const auto& pc : curves) info.push_back(pc.info);
  return info;
}

json run_pzeno(const ScenarioConfig& c, Output& out) {
  std::vector<PCurve> curves{pzeno_curve(c, c.model_spec(), state_of(c.state), c.name)};
  return {{"kind", "pzeno"}, {"model", model_json(c)}, {"curves", write_pcurves(curves, out)}};
}

json run_fig3(const ScenarioConfig& c, Output& out) {
  const std::vector<int> levels = c.run.levels.empty() ? std::vector<int>{3, 4, 10, 20} : c.run.levels;
  const std::vector<double> abar = c.run.abar_sq.empty() ? std::vector<double>{0.9} : c.run.abar_sq;
  std::vector<std::pair<int, double>> jobs;
  for (int n : levels)
    for (double a : abar) jobs.push_back({n, a});
  std::vector<PCurve> curves(jobs.size());
  parallel_for(static_cast<int>(jobs.size()), [&](int i) {
    auto [n, a] = jobs[i];
    ModelSpec spec = c.model_spec();
    spec.energies.assign(n, c.energies.front());
    std::string label = "N" + std::to_string(n);
    if (abar.size() > 1) label += "_abar2_" + label_number(a);
    curves[i] = pzeno_curve(c, spec, state_of(state_with_bright_weight(n, a)), label);
    curves[i].info["abar_sq"] = a;
    curves[i].info["levels"] = n;
  });
  return {{"kind", "fig3"}, {"model", model_json(c)}, {"curves", write_pcurves(curves, out)}};
}

json run_fig4(const ScenarioConfig& c, Output& out) {
  const InitialState s = state_of(c.state);
  std::vector<PCurve> curves(c.run.deltas.size());
  parallel_for(static_cast<int>(c.run.deltas.size()), [&](int i) {
    ModelSpec spec = c.model_spec();
    spec.energies.back() = spec.energies.front() + c.run.deltas[i];
    curves[i] = pzeno_curve(c, spec, s, "delta_" + label_number(c.run.deltas[i]));
    curves[i].info["delta"] = c.run.deltas[i];
  });
  return {{"kind", "fig4"},
          {"model", model_json(c)},
          {"abar_sq", s.alpha_hat_sq()},
          {"curves", write_pcurves(curves, out)}};
}

json run_fig1(const ScenarioConfig& c, Output& out) {
  const Analysis a(c.model_spec());
  const int n = static_cast<int>(c.energies.size());
  const double td_unit = a.unit("t_d");
  const auto t = make_grid(c.run.time_grid, a.unit(c.run.time_grid.unit));
  struct Curve {
    std::string label;
    SurvivalResult r;
    json info;
  };
  std::vector<double> abar = c.run.abar_sq.empty() ? std::vector<double>{0.2, 1.0, 3.0} : c.run.abar_sq;
  const int jobs = static_cast<int>(abar.size()) + (c.run.reference_one_level ? 1 : 0);
  std::vector<Curve> curves(jobs);
  parallel_for(jobs, [&](int i) {
    Curve& cv = curves[i];
    if (i < static_cast<int>(abar.size())) {
      const InitialState s = state_of(state_with_bright_weight(n, abar[i]));
      cv.label = "abar2_" + label_number(abar[i]);
      cv.r = a.engine->survival(s, t);
      bool monotone = true;
      for (std::size_t k = 1; k < t.size(); ++k) monotone = monotone && cv.r.p[k] <= cv.r.p[k - 1] + 1e-12;
      cv.info = {{"label", cv.label},
                 {"abar_sq", abar[i]},
                 {"p_final", cv.r.p.back()},
                 {"p_infinity", std::pow(1.0 - abar[i] / n, 2)},
                 {"monotone", monotone},
                 {"f_osc_hz", cv.r.f_osc ? json(*cv.r.f_osc) : json(nullptr)}};
      if (c.run.oracle.enabled) cv.info["oracle"] = oracle_check(a, s, 3.0 * td_unit, c.run.oracle);
    } else {
      ModelSpec one = c.model_spec();
      one.energies = {c.energies.front()};
      const Analysis b(one);
      const InitialState s = state_of({1.0});
      cv.label = "one_level";
      cv.r = b.engine->survival(s, t);
      cv.info = {{"label", cv.label}, {"p_final", cv.r.p.back()}};
      if (c.run.oracle.enabled)
        cv.info["oracle"] = oracle_check(b, s, 3.0 * decay_time(b.poles(), s, b.scale).t_d, c.run.oracle);
    }
  });
  json info = json::array();
  for (auto& cv : curves) {
    if (out.csv()) {
      Csv f = out.open("fig1_" + cv.label + ".csv", {"t_seconds", "p"});
      for (std::size_t k = 0; k < t.size(); ++k) f.row({fmt(t[k]), fmt(cv.r.p[k])});
    }
    info.push_back(cv.info);
  }
  return {{"kind", "fig1"},
          {"model", model_json(c)},
          {"t_d_seconds", td_unit},
          {"poles", poles_json(a.poles(), a.scale)},
          {"curves", info}};
}

struct DeltaCurve {
  std::string label;
  std::vector<double> t_z, tau_z;
  TzCurve tz;
};

std::string state_label(const std::vector<cplx>& v) {
  std::string s = "alpha";
  for (const auto& x : v) s += "_" + label_number(x.real()) + (x.imag() != 0.0 ? "i" + label_number(x.imag()) : "");
  return s;
}

json run_delta_sweep(const ScenarioConfig& c, const std::vector<std::vector<cplx>>& states, Output& out,
                     const std::string& kind) {
  const auto deltas = make_grid(c.run.delta_grid, 1.0);
  ModelSpec base = c.model_spec();
  std::fill(base.energies.begin(), base.energies.end(), base.energies.front());
  const Analysis a0(base);
  const double T = T_seconds(c, a0);

  std::vector<DeltaCurve> curves(states.size());
  std::vector<InitialState> st;
  for (std::size_t i = 0; i < states.size(); ++i) {
    st.push_back(state_of(states[i]));
    curves[i].label = state_label(states[i]);
    curves[i].tz = zeno_time_tz_vs_delta(base, st[i], deltas);
    curves[i].tau_z.assign(deltas.size(), 0.0);
  }
  parallel_for(static_cast<int>(deltas.size()), [&](int k) {
    ModelSpec spec = base;
    spec.energies.back() += deltas[k];
    const Analysis a(spec);
    for (std::size_t i = 0; i < st.size(); ++i) {
      const double tz = curves[i].tz.t_z[k];
      curves[i].tau_z[k] = zeno_time_tau(*a.engine, st[i], T, std::isfinite(tz) ? tz : 1e-6 * T).tau_z;
    }
  });
  json info = json::array();
  if (out.csv()) {
    Csv all = out.open("tz_vs_delta.csv", {"curve", "delta", "t_z", "tau_z"});
    for (const auto& cv : curves)
      for (std::size_t k = 0; k < deltas.size(); ++k)
        all.row({cv.label, fmt(deltas[k]), fmt(cv.tz.t_z[k]), fmt(cv.tau_z[k])});
    for (const auto& cv : curves) {
      Csv f = out.open("tz_vs_delta_" + cv.label + ".csv", {"delta", "t_z", "tau_z"});
      for (std::size_t k = 0; k < deltas.size(); ++k) f.row({fmt(deltas[k]), fmt(cv.tz.t_z[k]), fmt(cv.tau_z[k])});
    }
  }
  for (const auto& cv : curves)
    info.push_back({{"label", cv.label},
                    {"t_z0", num(cv.tz.t_z0)},
                    {"argmax_delta", cv.tz.argmax},
                    {"max_t_z", cv.tz.max},
                    {"delta_star_estimate", cv.tz.delta_star},
                    {"peak_estimate", cv.tz.peak_estimate}});
  json rep = {{"kind", kind}, {"model", model_json(c)}, {"T_seconds", T}, {"curves", info}};
  if (c.run.oracle.enabled) {
    json checks = json::array();
    for (const auto& s : st) {
      try {
        checks.push_back(oracle_check(a0, s, 3.0 * decay_time(a0.poles(), s, a0.scale).t_d, c.run.oracle));
      } catch (const Error& e) {
        checks.push_back({{"skipped", e.what()}});
      }
    }
    rep["oracle_at_delta_0"] = checks;
  }
  return rep;
}

json run_fig2(const ScenarioConfig& c, Output& out) {
  std::vector<std::vector<cplx>> states = c.run.states;
  for (const auto& s : c.run.states_tau)
    if (std::find(states.begin(), states.end(), s) == states.end()) states.push_back(s);
  return run_delta_sweep(c, states, out, "fig2");
}

json run_table1(const ScenarioConfig& c, Output& out) {
  const double L = c.scale, x1 = c.energies.front(), w = x1 * L, l2 = c.lambda_sq, lam = std::sqrt(l2);
  struct Row {
    std::string family, quantity;
    double computed, closed_form;
  };
  std::vector<Row> rows;
  json fams = json::array();
  for (const std::string fam : {"sqrt", "hydrogen"}) {
    ScenarioConfig cc = c;
    cc.form_factor = {fam, 1.0, 0.0, {}};
    cc.energies = {x1};
    const Analysis a(cc.model_spec());
    const InitialState s = state_of({1.0});
    const double td = decay_time(a.poles(), s, L).t_d;
    const double T = c.run.T.value * (c.run.T.unit == "t_d" ? td : a.unit(c.run.T.unit));
    const ZenoReport z = zeno_report(*a.engine, a.table(), s, T);
    double ta, tdc, tz, tauz;
    if (fam == "sqrt") {
      ta = std::pow(3.0 / (4.0 * std::sqrt(2.0 * pi)), 2.0 / 3.0) / (std::pow(lam, 4.0 / 3.0) * L);
      tdc = 1.0 / (pi * l2 * std::sqrt(L * w));
      tz = 32.0 / (9.0 * pi * L);
      tauz = 9.0 * pi / 8.0 * w / (L * L);
    } else {
      ta = std::sqrt(6.0) / (lam * L);
      tdc = 1.0 / (2.0 * pi * l2 * w);
      tz = 2.0 * std::sqrt(6.0) / L;
      tauz = 24.0 * pi * w / (L * L);
    }
    rows.push_back({fam, "t_a", z.t_a, ta});
    rows.push_back({fam, "t_d", z.t_d, tdc});
    rows.push_back({fam, "t_Z", z.t_z_leading, tz});
    rows.push_back({fam, "tau_Z", z.tau_z, tauz});
    fams.push_back({{"family", fam},
                    {"computed", {{"t_a", z.t_a}, {"t_d", z.t_d}, {"t_Z", z.t_z_leading}, {"tau_Z", z.tau_z}}},
                    {"closed_form", {{"t_a", ta}, {"t_d", tdc}, {"t_Z", tz}, {"tau_Z", tauz}}},
                    {"t_z_full_expansion", num(z.t_z)},
                    {"tau_z_estimate", z.tau_z_estimate},
                    {"T_seconds", T},
                    {"short_time_exponent", z.short_time_exponent}});
  }
  if (out.csv()) {
    Csv f = out.open("table1.csv", {"family", "quantity", "computed", "closed_form", "ratio"});
    for (const auto& r : rows)
      f.row({r.family, r.quantity, fmt(r.computed), fmt(r.closed_form), fmt(r.computed / r.closed_form)});
  }
  return {{"kind", "table1"}, {"lambda_sq", l2}, {"scale", L}, {"omega", w}, {"families", fams}};
}

}  // namespace

RunSummary run_scenario(const ScenarioConfig& c, const std::string& directory_override) {
  const auto problems = validate_config(c);
  if (!problems.empty()) {
    std::string msg;
    for (const auto& p : problems) msg += (msg.empty() ? "" : "; ") + p;
    throw Error(ErrorCode::ConfigError, "run_scenario", msg);
  }
  Output out(c, directory_override.empty() ? c.output.directory : directory_override);
  json rep;
  switch (c.run.kind) {
    case RunKind::Survival: rep = run_survival(c, out); break;
    case RunKind::Poles: rep = run_poles(c, out); break;
    case RunKind::Zeno: rep = run_zeno(c, out); break;
    case RunKind::PZeno: rep = run_pzeno(c, out); break;
    case RunKind::SweepDelta: rep = run_delta_sweep(c, {c.state}, out, "sweep_delta"); break;
    case RunKind::Table1: rep = run_table1(c, out); break;
    case RunKind::Fig1: rep = run_fig1(c, out); break;
    case RunKind::Fig2: rep = run_fig2(c, out); break;
    case RunKind::Fig3: rep = run_fig3(c, out); break;
    case RunKind::Fig4: rep = run_fig4(c, out); break;
  }
  rep["name"] = c.name;
  out.finish(rep);
  return out.summary();
}

}  // namespace fzeno
