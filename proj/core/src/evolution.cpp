#include "fzeno/evolution.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "fzeno/errors.hpp"

namespace fzeno {

cplx cexpm1(cplx w) {
  const double s = std::sin(w.imag());
  const double h = std::sin(0.5 * w.imag());
  const cplx eib_m1(-2.0 * h * h, s);
  return std::expm1(w.real()) * (1.0 + eib_m1) + eib_m1;
}

namespace {

// -i z tau with z = reference + offset, keeping the small offset phase exact
cplx phase(const Pole& p, double tau) {
  return cplx(p.offset.imag() * tau, -(p.reference * tau + p.offset.real() * tau));
}

cplx quad_form(const InitialState& s, const Eigen::MatrixXcd& m) {
  return s.alpha.adjoint() * m * s.alpha;
}

// G_II - G_I = lambda^2 G_II (Sigma_II - Sigma_I) G_I with Sigma_II - Sigma_I = 2 pi i f^2 c c^T,
// free of the cancellation in the plain difference
Eigen::MatrixXcd jump(const ResolventKernel& kernel, cplx z) {
  const Model& m = kernel.model();
  Eigen::VectorXcd c(m.size());
  for (int k = 0; k < m.size(); ++k) c[k] = m.multipliers()[k](z);
  const cplx s = 2.0 * pi * I * m.lambda_sq() * m.base().f2(z);
  return kernel.resolvent(z, Sheet::II) * (s * c) * (c.transpose() * kernel.resolvent(z, Sheet::I));
}

}  // namespace

SurvivalEngine::SurvivalEngine(const ResolventKernel& kernel, PoleSet poles, EvolutionOptions options)
    : n_(kernel.model().size()), scale_(kernel.model().scale()), options_(options) {
  bool missing = false;
  for (const auto& p : poles.poles) missing = missing || p.residue.size() == 0;
  poles_ = missing ? residues(kernel, std::move(poles)) : std::move(poles);

  const double theta = options_.contour_angle;
  for (int j = 0; j < static_cast<int>(poles_.poles.size()); ++j) {
    const auto& p = poles_.poles[j];
    if (p.kind != PoleKind::Resonance) {
      enclosed_.push_back(j);
      continue;
    }
    const double arg = std::atan2(p.offset.imag(), p.reference + p.offset.real());
    if (std::abs(arg + theta) < 1e-3)
      throw Error(ErrorCode::IncompletePoleSet, "SurvivalEngine", "a resonance lies on the contour ray");
    if (arg > -theta) enclosed_.push_back(j);
  }

  const auto& kr = quad::kronrod21();
  const cplx dir = std::polar(1.0, -theta);
  const cplx factor = dir / (2.0 * pi * I);
  // a panel is split when its embedded Gauss estimate disagrees with Kronrod beyond
  // panel_split of its own L1 mass; the Gauss half is the weak one, so this is conservative
  std::function<void(double, double, int)> add_panel = [&](double a, double b, int depth) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    std::vector<cplx> z(kr.nodes.size());
    std::vector<Eigen::MatrixXcd> j(kr.nodes.size());
    Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(n_, n_), G = K;
    double l1 = 0.0;
    for (size_t i = 0; i < kr.nodes.size(); ++i) {
      z[i] = (mid + half * kr.nodes[i]) * dir;
      j[i] = options_.include_background ? Eigen::MatrixXcd(jump(kernel, z[i]) * factor)
                                         : Eigen::MatrixXcd::Zero(n_, n_);
      K += j[i] * (half * kr.kronrod_weights[i]);
      G += j[i] * (half * kr.gauss_weights[i]);
      l1 += half * kr.kronrod_weights[i] * j[i].norm();
    }
    if (depth < options_.max_panel_splits && (K - G).norm() > options_.panel_split * l1) {
      add_panel(a, mid, depth + 1);
      add_panel(mid, b, depth + 1);
      return;
    }
    for (size_t i = 0; i < kr.nodes.size(); ++i) {
      nodes_.push_back(z[i]);
      kw_.push_back(half * kr.kronrod_weights[i]);
      gw_.push_back(half * kr.gauss_weights[i]);
      panel_of_.push_back(panels_);
      jumps_.push_back(std::move(j[i]));
    }
    ++panels_;
  };
  add_panel(0.0, options_.r_min, 0);
  for (double r = options_.r_min; r < options_.r_max; r *= options_.panel_ratio)
    add_panel(r, r * options_.panel_ratio, 0);

  residual_ = pole_matrix(0.0) + background_matrix(0.0) - Eigen::MatrixXcd::Identity(n_, n_);
  const double dev = residual_.cwiseAbs().maxCoeff();
  if (!(dev <= options_.sum_rule_tolerance)) {
    std::ostringstream os;
    os << "survival amplitude at t = 0 deviates from 1 by " << dev;
    throw Error(ErrorCode::IncompletePoleSet, "SurvivalEngine", os.str());
  }
}

Eigen::MatrixXcd SurvivalEngine::pole_matrix(double tau) const {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n_, n_);
  for (int j : enclosed_) {
    const auto& p = poles_.poles[j];
    m -= p.residue * std::exp(phase(p, tau));
  }
  return m;
}

Eigen::MatrixXcd SurvivalEngine::background_matrix(double tau) const {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n_, n_);
  for (size_t i = 0; i < nodes_.size(); ++i) m += jumps_[i] * (kw_[i] * std::exp(-I * nodes_[i] * tau));
  return m;
}

SurvivalEngine::Prepared SurvivalEngine::prepare(const InitialState& state) const {
  if (state.size() != n_)
    throw Error(ErrorCode::StructureMismatch, "SurvivalEngine::prepare", "state dimension differs from the model");
  Prepared s;
  for (int j : enclosed_) s.pole_weights.push_back(quad_form(state, poles_.poles[j].residue));
  s.background_zero = 0.0;
  for (size_t i = 0; i < nodes_.size(); ++i) {
    s.node_weights.push_back(quad_form(state, jumps_[i]));
    s.background_zero += kw_[i] * s.node_weights.back();
  }
  return s;
}

cplx SurvivalEngine::background(const Prepared& s, double tau, bool minus_zero) const {
  if (!options_.include_background) return 0.0;
  std::vector<cplx> kp(panels_, 0.0), gp(panels_, 0.0);
  for (size_t i = 0; i < nodes_.size(); ++i) {
    const cplx w = -I * nodes_[i] * tau;
    const cplx e = minus_zero ? cexpm1(w) : std::exp(w);
    const cplx v = s.node_weights[i] * e;
    kp[panel_of_[i]] += kw_[i] * v;
    gp[panel_of_[i]] += gw_[i] * v;
  }
  cplx total = 0.0;
  double err = 0.0, l1 = 0.0;
  for (int p = 0; p < panels_; ++p) {
    total += kp[p];
    err += std::abs(kp[p] - gp[p]);
    l1 += std::abs(kp[p]);
  }
  const auto& tol = options_.background_tolerance;
  if (err > std::max(tol.abs, tol.rel * l1)) {
    std::ostringstream os;
    os << "background integral error " << err << " at tau = " << tau;
    throw Error(ErrorCode::QuadratureFailure, "survival_amplitude", os.str());
  }
  return total;
}

cplx SurvivalEngine::amplitude(const Prepared& s, double tau, cplx* pole_part) const {
  cplx delta = background(s, tau, true);
  cplx poles = 0.0;
  for (size_t j = 0; j < enclosed_.size(); ++j) {
    const auto& p = poles_.poles[enclosed_[j]];
    const cplx w = phase(p, tau);
    delta -= s.pole_weights[j] * cexpm1(w);
    if (pole_part) poles -= s.pole_weights[j] * std::exp(w);
  }
  if (pole_part) *pole_part = poles;
  return 1.0 + delta;
}

double SurvivalEngine::loss(const Prepared& s, double tau) const {
  const cplx a = amplitude(s, tau);
  const cplx d = a - 1.0;
  // 1 - |1 + d|^2
  return -(2.0 * d.real() + std::norm(d));
}

SurvivalResult SurvivalEngine::survival(const InitialState& state, std::span<const double> t_seconds) const {
  const auto prep = prepare(state);
  SurvivalResult r;
  r.sum_rule_residual = residual_.cwiseAbs().maxCoeff();
  for (double t : t_seconds) {
    cplx pp;
    const cplx a = amplitude(prep, scale_ * t, &pp);
    const double p = std::norm(a);
    if (p < -1e-12 || !std::isfinite(p))
      throw Error(ErrorCode::NonpositiveProbability, "survival_amplitude", "probability outside [0, 1]");
    r.t.push_back(t);
    r.amplitude.push_back(a);
    r.p.push_back(p);
    r.pole_part.push_back(pp);
    r.background_part.push_back(a - pp);
  }
  // non-decaying part from the real poles
  cplx stay = 0.0;
  int widest = -1;
  double wmax = -1.0;
  for (size_t j = 0; j < enclosed_.size(); ++j) {
    const auto& p = poles_.poles[enclosed_[j]];
    if (p.kind == PoleKind::Resonance) {
      if (std::abs(prep.pole_weights[j]) > wmax) {
        wmax = std::abs(prep.pole_weights[j]);
        widest = enclosed_[j];
      }
    } else {
      stay -= prep.pole_weights[j];
    }
  }
  r.p_infinity = std::norm(stay);
  if (widest >= 0 && poles_.poles.size() > 0) {
    const auto& p = poles_.poles[widest];
    r.f_osc = p.offset.real() * scale_ / (2.0 * pi);
  }
  return r;
}

SurvivalResult survival_amplitude(const ResolventKernel& kernel, const InitialState& state,
                                  const PoleSet& poles, std::span<const double> t_seconds,
                                  const EvolutionOptions& options) {
  return SurvivalEngine(kernel, poles, options).survival(state, t_seconds);
}

SurvivalResult survival_closed_form(const ResolventKernel& kernel, const InitialState& state,
                                    const PoleSet& poles, std::span<const double> t_seconds,
                                    bool include_background, const EvolutionOptions& options) {
  const auto& m = kernel.model();
  const int n = m.size();
  if (!m.identical_shape() || m.spec().form_factors.ratio != 1.0)
    throw Error(ErrorCode::StructureMismatch, "survival_closed_form", "needs identical form factors");
  if (state.size() != n)
    throw Error(ErrorCode::StructureMismatch, "survival_closed_form", "state dimension differs from the model");
  std::vector<const Pole*> res;
  for (const auto& p : poles.poles)
    if (p.kind == PoleKind::Resonance) res.push_back(&p);
  std::sort(res.begin(), res.end(), [](const Pole* a, const Pole* b) { return a->offset.imag() < b->offset.imag(); });

  std::optional<SurvivalEngine> engine;
  std::optional<SurvivalEngine::Prepared> prep;
  if (include_background) {
    auto o = options;
    o.include_background = true;
    engine.emplace(kernel, poles, o);
    prep = engine->prepare(state);
  }
  const double l2 = m.lambda_sq();
  const double a2 = state.alpha_hat_sq();
  SurvivalResult r;
  auto bg = [&](double tau) -> cplx {
    if (!engine) return 0.0;
    cplx pp;
    const cplx a = engine->amplitude(*prep, tau, &pp);
    return a - pp;
  };

  if (m.fully_degenerate()) {
    if (res.empty()) throw Error(ErrorCode::NoResonance, "survival_closed_form", "no decaying pole");
    const Pole& z2 = *res.front();
    const double xbar = m.groups()[0].energy;
    const cplx y2 = (z2.reference - xbar) + z2.offset;
    const cplx wp = kernel.dispersion().W_prime(z2.z(), Sheet::II);
    const cplx norm = 1.0 + l2 * double(n) * wp;
    for (double t : t_seconds) {
      const double tau = m.scale() * t;
      const cplx pole = std::exp(cplx(0.0, -xbar * tau)) *
                        (1.0 - (1.0 - std::exp(-I * y2 * tau) / norm) * (a2 / n));
      const cplx a = pole + bg(tau);
      r.t.push_back(t);
      r.amplitude.push_back(a);
      r.p.push_back(std::norm(a));
      r.pole_part.push_back(pole);
      r.background_part.push_back(a - pole);
    }
    r.p_infinity = std::pow(1.0 - a2 / n, 2);
    r.f_osc = y2.real() * m.scale() / (2.0 * pi);
    return r;
  }

  const auto split = m.one_split();
  if (!split)
    throw Error(ErrorCode::NotDegenerate, "survival_closed_form", "needs a degenerate level or one split level");
  if (res.size() < 2) throw Error(ErrorCode::NoResonance, "survival_closed_form", "split structure needs two resonances");
  const double xbar = split->x_bar;
  const cplx y2 = (res[0]->reference - xbar) + res[0]->offset;
  const cplx y3 = (res[1]->reference - xbar) + res[1]->offset;
  double bulk_sq = 0.0;
  cplx bulk_sum = 0.0;
  for (int k = 0; k < n; ++k)
    if (k != split->split_level) {
      bulk_sq += std::norm(state.alpha[k]);
      bulk_sum += state.alpha[k];
    }
  const double sum_sq = std::norm(bulk_sum) / (n - 1);
  const double as = std::norm(state.alpha[split->split_level]);
  for (double t : t_seconds) {
    const double tau = m.scale() * t;
    const cplx pole = std::exp(cplx(0.0, -xbar * tau)) *
                      (bulk_sq - sum_sq + std::exp(-I * y2 * tau) * (a2 / n) +
                       std::exp(-I * y3 * tau) * (sum_sq + as - a2 / n));
    const cplx a = pole + bg(tau);
    r.t.push_back(t);
    r.amplitude.push_back(a);
    r.p.push_back(std::norm(a));
    r.pole_part.push_back(pole);
    r.background_part.push_back(a - pole);
  }
  r.p_infinity = std::pow(bulk_sq - sum_sq, 2);
  return r;
}

std::vector<double> decay_rate_curve(const SurvivalResult& result) {
  std::vector<double> g;
  for (size_t i = 0; i < result.t.size(); ++i) {
    const double t = result.t[i];
    g.push_back(t > 0.0 ? -std::log(result.p[i]) / (2.0 * t) : std::numeric_limits<double>::quiet_NaN());
  }
  return g;
}

}  // namespace fzeno
