#include "fzeno/zeno.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>

#include "fzeno/errors.hpp"
#include "fzeno/quadrature.hpp"

namespace fzeno {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

cplx form(const InitialState& s, const Eigen::MatrixXd& F) {
  // sum_ik alpha_i conj(alpha_k) F_ik
  return s.alpha.transpose() * F.cast<cplx>() * s.alpha.conjugate();
}

void require_identical(const DispersionTable& table, const char* op) {
  if (!table.model().identical_shape())
    throw Error(ErrorCode::NonAnalyticFamily, op, "non-analytic branch needs identical form factor shapes");
}

}  // namespace

MomentSet analytic_moments(const DispersionTable& table) {
  MomentSet m;
  Eigen::MatrixXd* out[3] = {&m.F0, &m.F1, &m.F2};
  for (int p = 0; p < 3; ++p) {
    const MomentMatrix mm = table.moment_matrix(p);
    if (mm.any_divergent())
      throw Error(ErrorCode::NonAnalyticFamily, "taylor_times",
                  "moment F^" + std::to_string(p) + " diverges for this form factor family");
    *out[p] = mm.value;
  }
  return m;
}

double TaylorTimes::t_z() const { return t_b_defined() ? t_b * t_b / t_a : nan; }

TaylorTimes taylor_times(const MomentSet& m, std::span<const double> energies, double lambda_sq, double scale,
                         const InitialState& state) {
  const int n = state.size();
  if (static_cast<int>(energies.size()) != n || m.F0.rows() != n)
    throw Error(ErrorCode::StructureMismatch, "taylor_times", "state dimension differs from the model");
  Eigen::VectorXd x(n), w(n);
  for (int k = 0; k < n; ++k) {
    x[k] = energies[k];
    w[k] = std::norm(state.alpha[k]);
  }
  auto mom = [&](int p) { return (w.array() * x.array().pow(p)).sum(); };
  const double m1 = mom(1), m2 = mom(2), m3 = mom(3), m4 = mom(4);

  Eigen::MatrixXd xi = x.replicate(1, n), xk = x.transpose().replicate(n, 1);
  TaylorTimes t;
  t.R1 = form(state, m.F0);
  t.R2 = form(state, ((xi + xk).array() * m.F0.array()).matrix() + m.F1);
  t.R3 = form(state, ((xi.array().square() + xi.array() * xk.array() + xk.array().square()) * m.F0.array()).matrix() +
                         ((xi + xk).array() * m.F1.array()).matrix() + m.F2);
  t.R4 = form(state, m.F0 * m.F0);

  const double R1 = t.R1.real(), R2 = t.R2.real(), R3 = t.R3.real(), R4 = t.R4.real();
  t.inv_ta2 = m2 - m1 * m1 + lambda_sq * R1;
  t.inv_tb4 = 0.25 * m2 * m2 + m4 / 12.0 - m1 * m3 / 3.0 +
              lambda_sq * (0.5 * R1 * m2 + R3 / 12.0 - R2 * m1 / 3.0) +
              lambda_sq * lambda_sq * (R4 / 12.0 + 0.25 * R1 * R1);
  t.t_a = t.inv_ta2 > 0.0 ? 1.0 / (scale * std::sqrt(t.inv_ta2)) : std::numeric_limits<double>::infinity();
  t.t_b = t.inv_tb4 > 0.0 ? 1.0 / (scale * std::pow(t.inv_tb4, 0.25)) : nan;
  return t;
}

TaylorTimes taylor_times(const DispersionTable& table, const InitialState& state) {
  const Model& m = table.model();
  return taylor_times(analytic_moments(table), m.spec().energies, m.lambda_sq(), m.scale(), state);
}

double short_time_exponent(const DispersionTable& table) {
  const double a = table.model().base().tail_exponent();
  return a < -1.0 ? 2.0 : 1.0 - a;
}

NonAnalyticShortTime non_analytic_short_time(const DispersionTable& table, const InitialState& state) {
  const char* op = "non_analytic_short_time";
  require_identical(table, op);
  const FormFactor& ff = table.model().base();
  const double a = ff.tail_exponent(), C = ff.tail_coefficient();
  if (!(a > -1.0 && a < 0.0))
    throw Error(ErrorCode::NonAnalyticFamily, op, "tail exponent outside (-1, 0)");

  // 1 - p ~ lambda^2 |v.alpha|^2 int f^2 4 sin^2(x tau / 2) / x^2 dx; the tail C x^a gives
  // 2 C kappa tau^(1-a) and the finite part of int f^2 gives the tau^2 term.
  const double kappa = -boost::math::tgamma(a - 1.0) * std::cos(pi * (a - 1.0) / 2.0);
  NonAnalyticShortTime r;
  r.exponent = 1.0 - a;
  r.coefficient = 2.0 * C * kappa;
  const quad::Tolerance tol{1e-13, 1e-11, 15};
  r.g_reg = quad::integrate_half_line([&](double x) { return cplx(ff.f2(x) - C * std::pow(x, a)); }, 1.0,
                                      tol, op)
                .real();
  const double bright = std::norm(state.alpha.dot(table.model().coupling_vector().cast<cplx>()));
  const double lam2 = table.model().lambda_sq() * bright;
  const double scale = table.model().scale();
  r.t_a = std::pow(r.coefficient * lam2, -1.0 / r.exponent) / scale;
  r.t_z = std::pow(r.coefficient / std::abs(r.g_reg), 1.0 / (1.0 + a)) / scale;
  return r;
}

double zeno_time_tz(const DispersionTable& table, const InitialState& state) {
  const Model& m = table.model();
  MomentSet mom;
  try {
    mom = analytic_moments(table);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NonAnalyticFamily) throw;
    return non_analytic_short_time(table, state).t_z;
  }
  const double f0 = form(state, mom.F0).real(), f2 = form(state, mom.F2).real();
  if (!(f0 > 0.0 && f2 > 0.0))
    throw Error(ErrorCode::NoResonance, "zeno_time_tz", "state does not couple to the continuum");
  return std::sqrt(12.0 * f0 / f2) / m.scale();
}

TzCurve zeno_time_tz_vs_delta(const ModelSpec& templ, const InitialState& state,
                              std::span<const double> delta_grid) {
  const int n = templ.n_levels();
  if (n < 2 || state.size() != n)
    throw Error(ErrorCode::StructureMismatch, "zeno_time_tz_vs_delta", "needs N >= 2 and a matching state");
  const double x_bar = templ.energies.front();
  ModelSpec spec = templ;
  std::fill(spec.energies.begin(), spec.energies.end(), x_bar);
  const DispersionTable table{Model(spec)};
  const MomentSet mom = analytic_moments(table);

  TzCurve c;
  auto tz_at = [&](double d) {
    spec.energies.back() = x_bar + d;
    return taylor_times(mom, spec.energies, spec.lambda_sq, spec.scale, state).t_z();
  };
  c.t_z0 = tz_at(0.0);
  for (double d : delta_grid) {
    const double tz = tz_at(d);
    c.delta.push_back(d);
    c.t_z.push_back(tz);
    if (tz > c.max) {
      c.max = tz;
      c.argmax = d;
    }
  }
  const double aN = std::norm(state.alpha[n - 1]);
  const double spread = aN - aN * aN;
  const double f2 = form(state, mom.F2).real();
  const double lam = std::sqrt(spec.lambda_sq);
  if (spread > 0.0 && f2 > 0.0) {
    c.delta_star = std::sqrt(lam) * std::pow(f2 / spread, 0.25);
    c.peak_estimate = std::pow(36.0 * spread / f2, 0.25) / (spec.scale * std::sqrt(lam));
  }
  return c;
}

DecayTime decay_time(const PoleSet& poles, const InitialState& state, double scale) {
  DecayTime best;
  double best_w = 0.0, best_im = 0.0;
  for (std::size_t j = 0; j < poles.poles.size(); ++j) {
    const Pole& p = poles.poles[j];
    if (p.kind != PoleKind::Resonance || p.residue.size() == 0) continue;
    const cplx w = state.alpha.dot(p.residue * state.alpha);
    const double aw = std::abs(w), im = std::abs(p.offset.imag());
    if (aw < 1e-10) continue;
    const bool tie = best.pole >= 0 && std::abs(aw - best_w) <= 1e-9 * best_w;
    if (best.pole < 0 || (tie ? im < best_im : aw > best_w)) {
      best = {0.0, static_cast<int>(j), w};
      best_w = aw;
      best_im = im;
    }
  }
  if (best.pole < 0) throw Error(ErrorCode::NoResonance, "decay_time", "no resonance contributes to the state");
  best.t_d = 1.0 / (2.0 * scale * best_im);
  return best;
}

double decay_rate(const SurvivalEngine& engine, const SurvivalEngine::Prepared& s, double t) {
  const double loss = engine.loss(s, engine.scale() * t);
  if (!(loss < 1.0))
    throw Error(ErrorCode::NonpositiveProbability, "decay_rate", "p reached 0 within grid precision");
  return -std::log1p(-loss) / (2.0 * t);
}

TauZ zeno_time_tau(const SurvivalEngine& engine, const InitialState& state, double T, double t_z) {
  const auto s = engine.prepare(state);
  TauZ r;
  r.gamma_T = decay_rate(engine, s, T);
  auto g = [&](double tau) { return decay_rate(engine, s, tau) - r.gamma_T; };
  const int grid = 200;
  const double lo = 1e-6 * t_z < T ? 1e-6 * t_z : 1e-9 * T;
  double prev_t = lo, prev_g = g(lo);
  for (int i = 1; i < grid; ++i) {
    const double t = lo * std::pow(T / lo, static_cast<double>(i) / (grid - 1));
    const double gv = i == grid - 1 ? 0.0 : g(t);
    if (i < grid - 1 && (prev_g < 0.0) != (gv < 0.0)) {
      double a = prev_t, b = t, ga = prev_g;
      for (int k = 0; k < 60; ++k) {
        const double m = std::sqrt(a * b);
        const double gm = g(m);
        if ((gm < 0.0) == (ga < 0.0)) {
          a = m;
          ga = gm;
        } else {
          b = m;
        }
      }
      r.crossings.push_back(std::sqrt(a * b));
    }
    prev_t = t;
    prev_g = gv;
  }
  r.crossed = !r.crossings.empty();
  r.tau_z = r.crossed ? r.crossings.front() : T;
  return r;
}

std::string to_string(RegionKind k) { return k == RegionKind::Zeno ? "zeno" : "anti_zeno"; }

namespace {

std::vector<Region> regions_from(const SurvivalEngine& engine, const InitialState& state, const TauZ& tz, double T,
                                 double t_z) {
  const auto s = engine.prepare(state);
  std::vector<double> edges{0.0};
  edges.insert(edges.end(), tz.crossings.begin(), tz.crossings.end());
  edges.push_back(T);
  std::vector<Region> out;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double lo = edges[i], hi = edges[i + 1];
    const double probe = lo > 0.0 ? std::sqrt(lo * hi) : std::min(1e-3 * hi, 1e-6 * t_z);
    const bool anti = decay_rate(engine, s, probe) > tz.gamma_T;
    out.push_back({lo, hi, anti ? RegionKind::AntiZeno : RegionKind::Zeno});
  }
  return out;
}

}  // namespace

std::vector<Region> detect_regions(const SurvivalEngine& engine, const InitialState& state, double T,
                                   double t_z) {
  return regions_from(engine, state, zeno_time_tau(engine, state, T, t_z), T, t_z);
}

double anti_zeno_extent(const std::vector<Region>& regions) {
  double e = 0.0;
  for (const auto& r : regions)
    if (r.kind == RegionKind::AntiZeno) e += r.hi - r.lo;
  return e;
}

std::string to_string(ContinuousLimit c) {
  switch (c) {
    case ContinuousLimit::Survives: return "survives";
    case ContinuousLimit::Exponential: return "exponential";
    case ContinuousLimit::Decays: return "decays";
  }
  return "?";
}

ContinuousLimit continuous_limit(double exponent) {
  if (exponent > 1.0 + 1e-12) return ContinuousLimit::Survives;
  if (exponent > 1.0 - 1e-12) return ContinuousLimit::Exponential;
  return ContinuousLimit::Decays;
}

double repeated_measurement(const SurvivalEngine& engine, const InitialState& state, double tau, double T) {
  if (!(tau > 0.0 && tau <= T * (1.0 + 1e-12)))
    throw Error(ErrorCode::ConfigError, "repeated_measurement", "tau must lie in (0, T]");
  const double M = std::max(1.0, std::round(T / tau));
  const double loss = engine.loss(engine.prepare(state), engine.scale() * tau);
  return std::exp(M * std::log1p(-loss));
}

ExponentFit fit_short_time_exponent(const SurvivalEngine& engine, const InitialState& state, double t_lo,
                                    double t_hi, int points) {
  const auto s = engine.prepare(state);
  Eigen::MatrixXd A(points, 2);
  Eigen::VectorXd y(points);
  for (int i = 0; i < points; ++i) {
    const double t = t_lo * std::pow(t_hi / t_lo, static_cast<double>(i) / (points - 1));
    A(i, 0) = 1.0;
    A(i, 1) = std::log(t);
    y[i] = std::log(engine.loss(s, engine.scale() * t));
  }
  const Eigen::VectorXd c = A.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd res = y - A * c;
  const double sigma2 = res.squaredNorm() / std::max(1, points - 2);
  const Eigen::MatrixXd cov = sigma2 * (A.transpose() * A).inverse();
  return {c[1], std::sqrt(cov(1, 1))};
}

RateConstants rate_constants(const DispersionTable& table, const PoleSet& poles, const InitialState& state) {
  RateConstants rc;
  const Model& m = table.model();
  const double scale = m.scale();

  // pole-sum amplitude A(t) = sum_j c_j exp(-i z_j t), c_j = -alpha^dagger r_j alpha
  cplx A0 = 0.0, A1 = 0.0, A2 = 0.0;
  for (const Pole& p : poles.poles) {
    if (p.residue.size() == 0) continue;
    const cplx c = -state.alpha.dot(p.residue * state.alpha);
    const cplx z = p.offset;  // a common phase drops out of p
    A0 += c;
    A1 += c * (-I * z);
    A2 += -c * z * z;
  }
  if (std::abs(A0) > 0.0) {
    const cplx d1 = A1 / A0, d2 = A2 / A0;
    rc.slope = -0.5 * (d2 - d1 * d1).real() * scale * scale;
  }

  if (m.fully_degenerate() && m.identical_shape()) {
    const cplx w = table.W(m.energy(0), Sheet::I);
    rc.s = w.real() / w.imag();
  }
  const auto split = m.one_split();
  if (split && m.size() == 2 && m.identical_shape()) {
    // the resonance closest to x_bar is z3, the other is z2
    std::vector<const Pole*> res;
    for (const Pole& p : poles.poles)
      if (p.kind == PoleKind::Resonance || p.kind == PoleKind::DegenerateReal) res.push_back(&p);
    if (res.size() >= 2) {
      std::sort(res.begin(), res.end(), [](const Pole* a, const Pole* b) {
        return std::abs(a->offset.imag()) > std::abs(b->offset.imag());
      });
      const cplx z2 = res[0]->z(), z3 = res[1]->z();
      const double h = state.alpha_hat_sq() / 2.0;
      rc.C1 = -h * z2.imag() - (1.0 - h) * z3.imag();
      const double di = (z2 - z3).imag(), dr = (z2 - z3).real();
      rc.C2 = (1.0 - h) * (di * di - dr * dr);
      rc.C2_plus = (1.0 + h) * di * di - (1.0 - h) * dr * dr;
    }
    const double delta = split->delta;
    const cplx w = table.W(split->x_bar, Sheet::I);
    const int n = m.size();
    rc.gamma3 = 2.0 * pi * scale * m.base().f2(split->x_bar) * delta * delta / (m.lambda_sq() * std::norm(w)) *
                (n - 1) / (static_cast<double>(n) * n * n);
  }
  return rc;
}

ZenoReport zeno_report(const SurvivalEngine& engine, const DispersionTable& table, const InitialState& state,
                       double T) {
  ZenoReport r;
  r.T = T;
  r.short_time_exponent = short_time_exponent(table);
  try {
    r.taylor = taylor_times(table, state);
    r.t_a = r.taylor->t_a;
    r.t_b = r.taylor->t_b;
    r.t_z_leading = zeno_time_tz(table, state);
    r.t_z = r.taylor->t_b_defined() ? r.taylor->t_z() : r.t_z_leading;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NonAnalyticFamily) throw;
    r.non_analytic = non_analytic_short_time(table, state);
    r.short_time_exponent = r.non_analytic->exponent;
    r.t_a = r.non_analytic->t_a;
    r.t_b = nan;
    r.t_z = r.t_z_leading = r.non_analytic->t_z;
  }
  r.limit = continuous_limit(r.short_time_exponent);
  r.t_d = decay_time(engine.poles(), state, table.model().scale()).t_d;
  r.tau_z_estimate = std::abs(r.short_time_exponent - 1.5) < 1e-12 ? 4.0 * std::pow(r.t_a, 3) / (r.t_d * r.t_d)
                                                                  : 2.0 * r.t_a * r.t_a / r.t_d;
  const TauZ tz = zeno_time_tau(engine, state, T, r.t_z);
  r.tau_z = tz.tau_z;
  r.tau_z_crossed = tz.crossed;
  r.regions = regions_from(engine, state, tz, T, r.t_z);
  r.constants = rate_constants(table, engine.poles(), state);
  return r;
}

}  // namespace fzeno
