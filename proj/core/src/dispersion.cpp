#include "fzeno/dispersion.hpp"

#include <cmath>
#include <limits>

#include "fzeno/errors.hpp"

namespace fzeno {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

double split_point(cplx z) { return std::max(4.0, 4.0 * std::abs(z)); }

}  // namespace

DispersionTable::DispersionTable(Model model, quad::Tolerance tol)
    : model_(std::move(model)), tol_(tol) {
  const int n = model_.size();
  const auto& m = model_.multipliers();
  pair_weights_.assign(n, std::vector<Polynomial>(n));
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      pair_weights_[i][k] = m[i] * m[k];
      max_degree_ = std::max(max_degree_, pair_weights_[i][k].degree());
    }
  const double a = model_.base().tail_exponent();
  const auto& ff = model_.base();
  for (int j = 0; j <= max_degree_ + 4; ++j) {
    if (a + j >= -1.0) {
      moments_.push_back(std::nullopt);
      continue;
    }
    auto integrand = [&ff, j](double x) { return ff.f2(x) * std::pow(x, j); };
    moments_.push_back(quad::integrate_half_line(integrand, 4.0, tol_, "base_moment").real());
  }
}

std::optional<double> DispersionTable::base_moment(int j) const {
  if (j < 0) throw Error(ErrorCode::UnsupportedMoment, "base_moment", "negative order");
  if (j < static_cast<int>(moments_.size())) return moments_[j];
  if (model_.base().tail_exponent() + j >= -1.0) return std::nullopt;
  const auto& ff = model_.base();
  auto integrand = [&ff, j](double x) { return ff.f2(x) * std::pow(x, j); };
  return quad::integrate_half_line(integrand, 4.0, tol_, "base_moment").real();
}

std::optional<double> DispersionTable::weighted_moment(const Polynomial& P) const {
  double s = 0.0;
  for (int j = 0; j <= P.degree(); ++j) {
    const double c = P.coefficient(j);
    if (c == 0.0) continue;
    const auto mj = base_moment(j);
    if (!mj) return std::nullopt;
    s += c * *mj;
  }
  return s;
}

MomentMatrix DispersionTable::moment_matrix(int p) const {
  if (p < 0 || p > 4) throw Error(ErrorCode::UnsupportedMoment, "moment_matrix", "order must be in 0..4");
  const int n = model_.size();
  MomentMatrix mm;
  mm.value.resize(n, n);
  mm.divergent.resize(n, n);
  std::vector<double> xp(p + 1, 0.0);
  xp[p] = 1.0;
  const Polynomial shift(xp);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const auto v = weighted_moment(pair_weights_[i][k] * shift);
      mm.divergent(i, k) = !v.has_value();
      mm.value(i, k) = v.value_or(nan);
    }
  return mm;
}

cplx DispersionTable::cauchy(bool derivative, cplx z, Sheet sheet) const {
  const auto& ff = model_.base();
  auto g = [&ff, derivative](double x) { return derivative ? ff.df2(x) : ff.f2(x); };
  const double X = split_point(z);
  const double x0 = z.real();
  const bool on_cut = z.imag() == 0.0 && x0 > 0.0;
  const bool near = x0 > 0.0 && std::abs(z.imag()) < 0.5 * x0;
  const char* op = derivative ? "W_prime" : "W";

  cplx head, tail, c = 0.0, L = 0.0;
  if (on_cut || near) {
    if (on_cut || !ff.has_continuation())
      c = g(x0);
    else
      c = derivative ? ff.df2(z) : ff.f2(z);
    L = on_cut ? cplx(std::log((X - x0) / x0), pi) : std::log(X - z) - std::log(-z);
    auto integrand = [&](double x) -> cplx {
      const cplx d = x - z;
      if (d == 0.0) return 0.0;
      return (g(x) - c) / d;
    };
    head = quad::integrate_origin_graded(integrand, X, std::min(std::abs(z), 1.0), tol_, op);
  } else {
    auto integrand = [&](double x) -> cplx { return g(x) / (x - z); };
    head = quad::integrate_origin_graded(integrand, X, std::min(std::abs(z), 1.0), tol_, op);
  }
  auto tail_integrand = [&](double x) -> cplx { return g(x) / (x - z); };
  tail = quad::integrate_tail(tail_integrand, X, tol_, op);
  cplx v = head + c * L + tail;

  if (sheet == Sheet::II && z.imag() < 0.0) {
    if (!ff.has_continuation())
      throw Error(ErrorCode::ContinuationUnavailable, op, "sheet II needs an analytic continuation of f^2");
    v += 2.0 * pi * I * (derivative ? ff.df2(z) : ff.f2(z));
  }
  if (derivative) {
    const double f0 = ff.f2(0.0);
    if (f0 != 0.0) v -= f0 / z;
  }
  return v;
}

cplx DispersionTable::W(cplx z, Sheet sheet) const { return cauchy(false, z, sheet); }

cplx DispersionTable::W_prime(cplx z, Sheet sheet) const { return cauchy(true, z, sheet); }

void DispersionTable::require_moments(int jmax, const char* operation) const {
  for (int j = 0; j < jmax; ++j)
    if (!base_moment(j))
      throw Error(ErrorCode::MomentDivergent, operation,
                  "polynomial weight too high for the tail of the form factor");
}

std::vector<cplx> DispersionTable::basis(cplx z, cplx w, int jmax) const {
  std::vector<cplx> t(jmax + 1);
  t[0] = w;
  for (int j = 1; j <= jmax; ++j) t[j] = *base_moment(j - 1) + z * t[j - 1];
  return t;
}

std::vector<cplx> DispersionTable::basis_prime(cplx z, cplx w, cplx wp, int jmax) const {
  const auto t = basis(z, w, jmax);
  std::vector<cplx> d(jmax + 1);
  d[0] = wp;
  for (int j = 1; j <= jmax; ++j) d[j] = t[j - 1] + z * d[j - 1];
  return d;
}

cplx DispersionTable::apply(const Polynomial& P, const std::vector<cplx>& t) const {
  cplx s = 0.0;
  for (int j = 0; j <= P.degree(); ++j) s += P.coefficient(j) * t[j];
  return s;
}

cplx DispersionTable::transform(const Polynomial& P, cplx z, Sheet sheet) const {
  const int d = std::max(0, P.degree());
  require_moments(d, "transform");
  return apply(P, basis(z, W(z, sheet), d));
}

cplx DispersionTable::transform_prime(const Polynomial& P, cplx z, Sheet sheet) const {
  const int d = std::max(0, P.degree());
  require_moments(d, "transform_prime");
  return apply(P, basis_prime(z, W(z, sheet), W_prime(z, sheet), d));
}

Eigen::MatrixXcd DispersionTable::self_energy(cplx z, Sheet sheet) const {
  const int n = model_.size();
  const auto t = basis(z, W(z, sheet), max_degree_);
  Eigen::MatrixXcd s(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = i; k < n; ++k) s(i, k) = s(k, i) = apply(pair_weights_[i][k], t);
  return s;
}

Eigen::MatrixXcd DispersionTable::self_energy_prime(cplx z, Sheet sheet) const {
  const int n = model_.size();
  const auto d = basis_prime(z, W(z, sheet), W_prime(z, sheet), max_degree_);
  Eigen::MatrixXcd s(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = i; k < n; ++k) s(i, k) = s(k, i) = apply(pair_weights_[i][k], d);
  return s;
}

Eigen::MatrixXcd DispersionTable::R(cplx z, Sheet sheet) const {
  const int n = model_.size();
  const auto& ff = model_.spec().form_factors;
  if (ff.perturbations.empty()) return Eigen::MatrixXcd::Zero(n, n);
  const auto& v = model_.coupling_vector();
  std::vector<std::vector<Polynomial>> w(n, std::vector<Polynomial>(n));
  int deg = 0;
  for (int i = 0; i < n; ++i)
    for (int k = i; k < n; ++k) {
      const auto& qi = ff.perturbations[i];
      const auto& qk = ff.perturbations[k];
      w[i][k] = qk * v[i] + qi * v[k] + (qi * qk) * ff.epsilon;
      deg = std::max(deg, w[i][k].degree());
    }
  require_moments(deg, "R");
  const auto t = basis(z, W(z, sheet), deg);
  Eigen::MatrixXcd r(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = i; k < n; ++k) r(i, k) = r(k, i) = apply(w[i][k], t);
  return r;
}

Eigen::MatrixXcd DispersionTable::Q(cplx z, Sheet sheet) const {
  const int n = model_.size();
  const auto& ff = model_.spec().form_factors;
  if (ff.perturbations.empty()) return Eigen::MatrixXcd::Zero(n, n);
  int deg = 0;
  for (const auto& q : ff.perturbations) deg = std::max(deg, 2 * q.degree());
  require_moments(deg, "Q");
  const auto t = basis(z, W(z, sheet), deg);
  Eigen::MatrixXcd r(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = i; k < n; ++k)
      r(i, k) = r(k, i) = apply(ff.perturbations[i] * ff.perturbations[k], t);
  return r;
}

}  // namespace fzeno
