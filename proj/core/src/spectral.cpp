#include "fzeno/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "fzeno/errors.hpp"

namespace fzeno {

std::string to_string(PoleKind kind) {
  switch (kind) {
    case PoleKind::Bound: return "bound";
    case PoleKind::Resonance: return "resonance";
    case PoleKind::DegenerateReal: return "degenerate_real";
  }
  return "unknown";
}

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::Numeric: return "numeric";
    case Provenance::ClosedForm: return "closed_form";
    case Provenance::Perturbative: return "perturbative";
  }
  return "unknown";
}

ResolventKernel::ResolventKernel(DispersionTable table) : table_(std::move(table)) {
  const auto& groups = model().groups();
  size_t best = 0;
  for (size_t g = 1; g < groups.size(); ++g)
    if (groups[g].levels.size() > groups[best].levels.size()) best = g;
  reference_ = groups[best].energy;
  const auto& v = model().coupling_vector();
  for (const auto& g : groups) {
    group_offsets_.push_back(g.energy - reference_);
    double w = 0.0;
    for (int k : g.levels) w += v[k] * v[k];
    group_weights_.push_back(w);
  }
}

Eigen::MatrixXcd ResolventKernel::inverse_at(cplx y, Sheet sheet) const {
  const int n = model().size();
  const cplx z = reference_ + y;
  Eigen::MatrixXcd a = -model().lambda_sq() * table_.self_energy(z, sheet);
  for (int k = 0; k < n; ++k) a(k, k) += (model().energy(k) - reference_) - y;
  return a;
}

Eigen::MatrixXcd ResolventKernel::resolvent_at(cplx y, Sheet sheet) const {
  const int n = model().size();
  if (!model().identical_shape()) return inverse_at(y, sheet).partialPivLu().inverse();
  // Sherman-Morrison on diag(d) - lambda^2 W v v^T
  const auto& v = model().coupling_vector();
  const cplx w = table_.W(reference_ + y, sheet);
  Eigen::VectorXcd u(n);
  cplx sum = 0.0;
  for (int k = 0; k < n; ++k) {
    u[k] = v[k] / ((model().energy(k) - reference_) - y);
    sum += v[k] * u[k];
  }
  const cplx s = 1.0 - model().lambda_sq() * w * sum;
  Eigen::MatrixXcd g = (model().lambda_sq() * w / s) * (u * u.transpose());
  for (int k = 0; k < n; ++k) g(k, k) += 1.0 / ((model().energy(k) - reference_) - y);
  return g;
}

cplx ResolventKernel::determinant(cplx z, Sheet sheet) const {
  return inverse(z, sheet).partialPivLu().determinant();
}

cplx ResolventKernel::determinant_rank_one(cplx z, Sheet sheet) const {
  if (!model().identical_shape())
    throw Error(ErrorCode::NotDegenerate, "determinant_rank_one", "form factors are not identical in shape");
  const auto& v = model().coupling_vector();
  const cplx w = table_.W(z, sheet);
  cplx prod = 1.0, sum = 0.0;
  for (int k = 0; k < model().size(); ++k) {
    prod *= model().energy(k) - z;
    sum += v[k] * v[k] / (model().energy(k) - z);
  }
  return (1.0 - model().lambda_sq() * w * sum) * prod;
}

ResolventKernel::Secular ResolventKernel::secular(cplx y, Sheet sheet, bool with_derivative) const {
  return model().identical_shape() ? secular_rank_one(y, sheet, with_derivative)
                                   : secular_general(y, sheet, with_derivative);
}

ResolventKernel::Secular ResolventKernel::secular_rank_one(cplx y, Sheet sheet, bool with_derivative) const {
  const int G = static_cast<int>(group_offsets_.size());
  const double l2 = model().lambda_sq();
  const cplx z = reference_ + y;
  const cplx w = table_.W(z, sheet);
  const cplx wp = with_derivative ? table_.W_prime(z, sheet) : cplx(0.0);
  std::vector<cplx> a(G);
  for (int g = 0; g < G; ++g) a[g] = group_offsets_[g] - y;
  auto prod_except = [&](int e1, int e2) {
    cplx p = 1.0;
    for (int g = 0; g < G; ++g)
      if (g != e1 && g != e2) p *= a[g];
    return p;
  };
  const cplx P = prod_except(-1, -1);
  cplx dP = 0.0, S = 0.0, dS = 0.0;
  double scale_s = 0.0;
  for (int g = 0; g < G; ++g) {
    const cplx pg = prod_except(g, -1);
    dP -= pg;
    S += group_weights_[g] * pg;
    scale_s += group_weights_[g] * std::abs(pg);
    if (with_derivative)
      for (int h = 0; h < G; ++h)
        if (h != g) dS -= group_weights_[g] * prod_except(g, h);
  }
  Secular s;
  s.value = P - l2 * w * S;
  s.derivative = dP - l2 * wp * S - l2 * w * dS;
  s.scale = std::abs(P) + l2 * std::abs(w) * scale_s;
  return s;
}

ResolventKernel::Secular ResolventKernel::secular_general(cplx y, Sheet sheet, bool with_derivative) const {
  const int n = model().size();
  const Eigen::MatrixXcd a = inverse_at(y, sheet);
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
  Secular s;
  s.value = lu.determinant();
  s.scale = 1.0;
  for (int k = 0; k < n; ++k) s.scale *= a.row(k).cwiseAbs().sum();
  if (s.value == 0.0 || !with_derivative) {
    s.derivative = 1.0;
    return s;
  }
  Eigen::MatrixXcd da = -model().lambda_sq() * table_.self_energy_prime(reference_ + y, sheet);
  da.diagonal().array() -= 1.0;
  s.derivative = s.value * lu.solve(da).trace();
  return s;
}

namespace {

struct NewtonOutcome {
  cplx y;
  bool converged;
};

double deflation_factor(cplx y, const std::vector<cplx>& roots) {
  double f = 1.0;
  for (const auto& r : roots) f *= std::abs(y - r);
  return f;
}

NewtonOutcome newton(const ResolventKernel& k, cplx y, const std::vector<cplx>& deflate,
                     const PoleSearchOptions& o, double yscale) {
  auto eval = [&](cplx yy) { return k.secular(yy, Sheet::II); };
  auto merit = [&](cplx yy, const ResolventKernel::Secular& s) {
    return std::abs(s.value) / (s.scale * deflation_factor(yy, deflate));
  };
  auto s = eval(y);
  int polish = -1;
  for (int it = 0; it < o.max_iterations; ++it) {
    if (s.value == 0.0) return {y, true};
    cplx ratio = s.derivative / s.value;
    for (const auto& r : deflate) ratio -= 1.0 / (y - r);
    cplx step = 1.0 / ratio;
    if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) return {y, false};
    const double m0 = merit(y, s);
    cplx yn = y - step;
    auto sn = eval(yn);
    if (polish < 0) {
      for (int h = 0; h < 12 && !(merit(yn, sn) <= m0); ++h) {
        step *= 0.5;
        yn = y - step;
        sn = eval(yn);
      }
    }
    y = yn;
    s = sn;
    if (polish >= 0) {
      if (++polish >= 2) break;
    } else if (std::abs(step) <= o.newton_tolerance * 1e-1 * (std::abs(y) + 1e-6 * yscale)) {
      polish = 0;
    }
  }
  const double resid = std::abs(s.value) / s.scale;
  return {y, polish >= 0 || resid <= 1e-13};
}

bool same_root(cplx a, cplx b, double yscale) {
  return std::abs(a - b) <= 1e-8 * std::max(std::abs(a), std::abs(b)) + 1e-12 * yscale;
}

}  // namespace

cplx bright_root_first_order(const ResolventKernel& kernel) {
  const auto& m = kernel.model();
  const double v2 = m.coupling_vector().squaredNorm();
  return -m.lambda_sq() * v2 * kernel.dispersion().W(kernel.reference(), Sheet::II);
}

namespace {

struct SplitData {
  double vb, v, delta, xbar;
  double offset;  // x_bar - reference
};

SplitData split_data(const ResolventKernel& kernel, const char* op) {
  const auto& m = kernel.model();
  const auto split = m.one_split();
  if (!split || !m.identical_shape())
    throw Error(ErrorCode::StructureMismatch, op, "needs one split level and identical form-factor shapes");
  const auto& v = m.coupling_vector();
  SplitData d{};
  d.v = v.squaredNorm();
  d.vb = d.v - v[split->split_level] * v[split->split_level];
  d.delta = split->delta;
  d.xbar = split->x_bar;
  d.offset = split->x_bar - kernel.reference();
  return d;
}

}  // namespace

SplitSeeds split_roots_quadratic(const ResolventKernel& kernel, int iterations) {
  const auto d = split_data(kernel, "split_roots_quadratic");
  const double l2 = kernel.model().lambda_sq();
  auto solve = [&](cplx w, int branch) {
    const cplx b = d.delta - l2 * w * d.v;
    const cplx disc = std::sqrt(b * b + 4.0 * l2 * w * d.vb * d.delta);
    return 0.5 * (branch == 0 ? b - disc : b + disc);
  };
  cplx r[2];
  for (int branch = 0; branch < 2; ++branch) {
    cplx y = solve(kernel.dispersion().W(d.xbar, Sheet::II), branch);
    for (int it = 0; it < iterations; ++it) {
      const cplx w = kernel.dispersion().W(d.xbar + y, Sheet::II);
      const cplx c0 = solve(w, 0), c1 = solve(w, 1);
      y = std::abs(c0 - y) <= std::abs(c1 - y) ? c0 : c1;
    }
    r[branch] = y;
  }
  // bright root is the one with the larger width
  if (r[0].imag() > r[1].imag()) std::swap(r[0], r[1]);
  return {d.offset + r[0], d.offset + r[1]};
}

SplitSeeds split_roots_large_gap(const ResolventKernel& kernel) {
  const auto d = split_data(kernel, "split_roots_large_gap");
  const double l2 = kernel.model().lambda_sq();
  const auto& disp = kernel.dispersion();
  const cplx y2 = -l2 * d.vb * disp.W(d.xbar, Sheet::II);
  const cplx y3 = d.delta - l2 * (d.v - d.vb) * disp.W(d.xbar + d.delta, Sheet::II);
  return {d.offset + y2, d.offset + y3};
}

SplitSeeds split_roots_small_gap(const ResolventKernel& kernel) {
  const auto d = split_data(kernel, "split_roots_small_gap");
  const double l2 = kernel.model().lambda_sq();
  const cplx w = kernel.dispersion().W(d.xbar, Sheet::II);
  const double a = d.vb / d.v;
  const cplx y2 = -l2 * d.v * w;
  const cplx y3 = a * d.delta + a * (1.0 - a) * d.delta * d.delta / (l2 * d.v * w);
  return {d.offset + y2, d.offset + y3};
}

PoleSet find_poles(const ResolventKernel& kernel, const PoleSearchOptions& o) {
  const auto& m = kernel.model();
  const double ref = kernel.reference();
  const double l2 = m.lambda_sq();
  const cplx w_ref = kernel.dispersion().W(ref, Sheet::II);
  const double vsum = m.coupling_vector().squaredNorm();
  const double width = 10.0 * l2 * vsum * std::abs(w_ref);
  double dmin = 0.0, dmax = 0.0;
  for (int k = 0; k < m.size(); ++k) {
    dmin = std::min(dmin, m.energy(k) - ref);
    dmax = std::max(dmax, m.energy(k) - ref);
  }
  const double yscale = std::max(width, dmax - dmin);

  PoleSet out;
  // exactly real roots of the rank-one structure
  if (m.identical_shape()) {
    for (const auto& g : m.groups()) {
      if (g.levels.size() < 2) continue;
      Pole p;
      p.reference = g.energy;
      p.offset = 0.0;
      p.kind = PoleKind::DegenerateReal;
      p.provenance = Provenance::ClosedForm;
      p.seed = "dark subspace of a degenerate level";
      p.multiplicity = static_cast<int>(g.levels.size()) - 1;
      out.poles.push_back(p);
    }
  }

  // bound states: sign changes of the real secular function on the negative axis, sheet I
  int bound = 0;
  if (o.bound_state_scan) {
    auto f = [&](double z) { return kernel.secular(z - ref, Sheet::I, false).value.real(); };
    const int np = 240;
    double zprev = -1e4, fprev = f(zprev);
    for (int i = 1; i <= np; ++i) {
      const double z = -std::pow(10.0, 4.0 - 18.0 * i / np);
      const double fz = f(z);
      if ((fz < 0.0) != (fprev < 0.0)) {
        double lo = zprev, hi = z, flo = fprev;
        for (int b = 0; b < 200 && hi - lo > 4e-16 * std::abs(lo); ++b) {
          const double mid = 0.5 * (lo + hi);
          const double fm = f(mid);
          if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
          } else {
            hi = mid;
          }
        }
        Pole p;
        p.reference = 0.0;
        p.offset = 0.5 * (lo + hi);
        p.kind = PoleKind::Bound;
        p.provenance = Provenance::Numeric;
        p.seed = "sign change on the negative axis";
        out.poles.push_back(p);
        ++bound;
      }
      zprev = z;
      fprev = fz;
    }
  }

  out.expected_resonances =
      (m.identical_shape() ? static_cast<int>(m.groups().size()) : m.size()) - bound;

  std::vector<std::pair<cplx, std::string>> seeds;
  if (m.identical_shape()) {
    const auto& v = m.coupling_vector();
    for (const auto& g : m.groups()) {
      double vg = 0.0;
      for (int k : g.levels) vg += v[k] * v[k];
      seeds.emplace_back((g.energy - ref) - l2 * vg * kernel.dispersion().W(g.energy, Sheet::II),
                         "isolated-group first order");
    }
    if (m.one_split()) {
      const auto q = split_roots_quadratic(kernel);
      seeds.emplace_back(q.y2, "split-pair quadratic");
      seeds.emplace_back(q.y3, "split-pair quadratic");
      const auto s = split_roots_small_gap(kernel);
      seeds.emplace_back(s.y2, "split-pair small gap");
      seeds.emplace_back(s.y3, "split-pair small gap");
      const auto lg = split_roots_large_gap(kernel);
      seeds.emplace_back(lg.y2, "split-pair large gap");
      seeds.emplace_back(lg.y3, "split-pair large gap");
    }
  } else {
    for (int k = 0; k < m.size(); ++k) {
      const cplx wk = kernel.dispersion().W(m.energy(k), Sheet::II);
      const auto mk = m.multipliers()[k](m.energy(k));
      seeds.emplace_back((m.energy(k) - ref) - l2 * mk * mk * wk, "single-level first order");
    }
    if (m.fully_degenerate() && m.spec().form_factors.epsilon > 0.0 &&
        !m.spec().form_factors.perturbations.empty()) {
      seeds.emplace_back(bright_root_first_order(kernel), "bright-state first order");
      const auto e = perturbative_roots_epsilon(kernel);
      for (const auto& s : e.schur_shifts) seeds.emplace_back(s, "dark-subspace second order");
      seeds.emplace_back(e.trace_shift, "dark-subspace trace");
    }
  }

  std::vector<cplx> roots;
  std::vector<std::string> origin;
  bool stalled = false;
  auto accept = [&](cplx y) {
    if (y.imag() > 1e-12 * (std::abs(y) + yscale)) return false;
    if (std::abs(y) > 1e3 * (yscale + std::abs(ref))) return false;
    return true;
  };
  for (const auto& [y0, name] : seeds) {
    const auto r = newton(kernel, y0, {}, o, yscale);
    if (!r.converged) {
      stalled = true;
      continue;
    }
    if (!accept(r.y)) continue;
    bool dup = false;
    for (const auto& e : roots) dup = dup || same_root(e, r.y, yscale);
    if (!dup) {
      roots.push_back(r.y);
      origin.push_back(name);
    }
  }

  if (static_cast<int>(roots.size()) < out.expected_resonances) {
    // deflated scan over the window below the levels
    const double re0 = dmin - width, re1 = dmax + width;
    const double im0 = -width;
    const int nr = o.scan_re, ni = o.scan_im;
    std::vector<double> val(nr * ni);
    std::vector<cplx> pts(nr * ni);
    for (int i = 0; i < nr; ++i)
      for (int j = 0; j < ni; ++j) {
        const cplx y(re0 + (re1 - re0) * (i + 0.5) / nr, im0 * (j + 0.5) / ni);
        const auto s = kernel.secular(y, Sheet::II, false);
        pts[i * ni + j] = y;
        val[i * ni + j] = std::abs(s.value) / (s.scale * deflation_factor(y, roots));
      }
    for (int i = 0; i < nr && static_cast<int>(roots.size()) < out.expected_resonances; ++i)
      for (int j = 0; j < ni && static_cast<int>(roots.size()) < out.expected_resonances; ++j) {
        const double c = val[i * ni + j];
        bool minimum = true;
        for (int di = -1; di <= 1; ++di)
          for (int dj = -1; dj <= 1; ++dj) {
            const int a = i + di, b = j + dj;
            if ((di || dj) && a >= 0 && a < nr && b >= 0 && b < ni && val[a * ni + b] < c) minimum = false;
          }
        if (!minimum) continue;
        const auto r = newton(kernel, pts[i * ni + j], roots, o, yscale);
        if (!r.converged || !accept(r.y)) continue;
        for (const auto& e : roots)
          if (std::abs(e - r.y) <= 10.0 * o.newton_tolerance * (std::abs(r.y) + yscale)) {
            std::ostringstream os;
            os << "roots closer than the Newton resolution near offset " << r.y;
            throw Error(ErrorCode::MultiplicityAmbiguous, "find_poles", os.str());
          }
        bool dup = false;
        for (const auto& e : roots) dup = dup || same_root(e, r.y, yscale);
        if (!dup) {
          roots.push_back(r.y);
          origin.push_back("grid scan");
        }
      }
  }
  if (stalled && static_cast<int>(roots.size()) < out.expected_resonances)
    throw Error(ErrorCode::NewtonStall, "find_poles", "Newton iteration failed to converge from a seed");

  for (size_t i = 0; i < roots.size(); ++i) {
    Pole p;
    p.reference = ref;
    p.offset = roots[i];
    p.kind = PoleKind::Resonance;
    p.provenance = Provenance::Numeric;
    p.seed = origin[i];
    out.poles.push_back(p);
  }
  return out;
}

Eigen::MatrixXcd residue_contour(const ResolventKernel& kernel, const Pole& pole, double radius,
                                 int points) {
  const Sheet sheet = pole.kind == PoleKind::Bound ? Sheet::I : Sheet::II;
  const cplx yc = (pole.reference - kernel.reference()) + pole.offset;
  const int n = kernel.model().size();
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(n, n);
  for (int j = 0; j < points; ++j) {
    const cplx e = std::polar(1.0, 2.0 * pi * (j + 0.5) / points);
    // dz = i r e dphi, so (1/2 pi i) dz -> r e / points
    acc += kernel.resolvent_at(yc + radius * e, sheet) * (radius * e / double(points));
  }
  return acc;
}

PoleSet residues(const ResolventKernel& kernel, PoleSet set) {
  const auto& m = kernel.model();
  const int n = m.size();
  const double l2 = m.lambda_sq();
  const double ref = kernel.reference();
  auto yof = [&](const Pole& p) { return (p.reference - ref) + p.offset; };
  for (auto& p : set.poles) {
    if (p.kind == PoleKind::DegenerateReal) {
      const auto& v = m.coupling_vector();
      p.residue = Eigen::MatrixXcd::Zero(n, n);
      double vg = 0.0;
      std::vector<int> members;
      for (int k = 0; k < n; ++k)
        if (std::abs(m.energy(k) - p.reference) <= degeneracy_tolerance * std::abs(p.reference)) {
          members.push_back(k);
          vg += v[k] * v[k];
        }
      for (int i : members) {
        p.residue(i, i) -= 1.0;
        for (int k : members) p.residue(i, k) += v[i] * v[k] / vg;
      }
      continue;
    }
    const cplx y = yof(p);
    if (m.identical_shape()) {
      const Sheet sheet = p.kind == PoleKind::Bound ? Sheet::I : Sheet::II;
      const auto& v = m.coupling_vector();
      const cplx z = ref + y;
      const cplx w = kernel.dispersion().W(z, sheet);
      const cplx wp = kernel.dispersion().W_prime(z, sheet);
      Eigen::VectorXcd u(n);
      cplx s1 = 0.0, s2 = 0.0;
      for (int k = 0; k < n; ++k) {
        const cplx dk = (m.energy(k) - ref) - y;
        u[k] = v[k] / dk;
        s1 += v[k] * v[k] / dk;
        s2 += v[k] * v[k] / (dk * dk);
      }
      const cplx ds = -l2 * wp * s1 - l2 * w * s2;
      const double size = l2 * std::abs(w) * u.squaredNorm();
      if (!(std::abs(ds) > 1e-14 * size) || !std::isfinite(std::abs(ds)))
        throw Error(ErrorCode::DegenerateResidue, "residues", "secular derivative vanishes at a simple pole");
      p.residue = (l2 * w / ds) * (u * u.transpose());
    } else {
      double dist = std::abs(ref + y);
      for (const auto& q : set.poles)
        if (&q != &p) dist = std::min(dist, std::abs(yof(q) - y));
      if (!(dist > 0.0))
        throw Error(ErrorCode::DegenerateResidue, "residues", "pole coincides with another singularity");
      const auto s = kernel.secular(y, p.kind == PoleKind::Bound ? Sheet::I : Sheet::II);
      if (std::abs(s.derivative) * dist <= 1e-14 * s.scale)
        throw Error(ErrorCode::DegenerateResidue, "residues", "determinant derivative vanishes at a simple pole");
      p.residue = residue_contour(kernel, p, 0.3 * dist, 64);
    }
  }
  return set;
}

PoleSet solve_poles(const ResolventKernel& kernel, const PoleSearchOptions& options) {
  return residues(kernel, find_poles(kernel, options));
}

EpsilonRoots perturbative_roots_epsilon(const ResolventKernel& kernel) {
  const auto& m = kernel.model();
  const auto& ff = m.spec().form_factors;
  if (ff.epsilon == 0.0 || ff.perturbations.empty())
    throw Error(ErrorCode::EpsilonZero, "perturbative_roots_epsilon", "no form-factor perturbation");
  if (!m.fully_degenerate())
    throw Error(ErrorCode::NotDegenerate, "perturbative_roots_epsilon", "levels must coincide");
  const int n = m.size();
  const double l2 = m.lambda_sq(), eps = ff.epsilon;
  const double xbar = m.groups()[0].energy;
  const auto& disp = kernel.dispersion();
  const Eigen::VectorXd v = m.coupling_vector();
  const Eigen::VectorXd b = v / v.norm();

  const Eigen::MatrixXcd Q = disp.Q(xbar, Sheet::I);
  Eigen::VectorXcd s(n);
  for (int k = 0; k < n; ++k) s[k] = disp.transform(ff.perturbations[k], xbar, Sheet::I);
  const cplx w = disp.W(xbar, Sheet::I);

  EpsilonRoots r;
  r.x_bar = xbar;
  const Eigen::MatrixXcd proj = Eigen::MatrixXcd::Identity(n, n) - (b * b.transpose()).cast<cplx>();
  r.trace_shift = -eps * eps * l2 * (proj * Q).trace();

  Eigen::VectorXd qv(n);
  const double fx = m.base().f(xbar);
  for (int k = 0; k < n; ++k) qv[k] = fx * ff.perturbations[k](xbar);
  const double spread = qv.squaredNorm() - std::pow(b.dot(qv), 2);
  r.trace_im_formula = 2.0 * pi * eps * eps * l2 * spread;
  r.trace_width_vanishes = std::abs(spread) <= 1e-14 * std::max(qv.squaredNorm(), 1e-300);

  // orthonormal basis of the dark subspace
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(b);
  const Eigen::MatrixXd full = qr.householderQ();
  const Eigen::MatrixXcd D = full.rightCols(n - 1).cast<cplx>();
  const Eigen::VectorXcd ds = D.transpose() * s;
  const Eigen::MatrixXcd schur =
      -eps * eps * l2 * (D.transpose() * Q * D - (ds * ds.transpose()) / w);
  if (n > 1) {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(schur);
    for (int k = 0; k < n - 1; ++k) r.schur_shifts.push_back(es.eigenvalues()[k]);
  }
  return r;
}

}  // namespace fzeno
