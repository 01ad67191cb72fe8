#include "fzeno/oracle.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <vector>

#include "fzeno/errors.hpp"
#include "fzeno/quadrature.hpp"

namespace fzeno {

double default_oracle_cutoff(const FormFactor& ff) {
  const double a = ff.tail_exponent(), c = ff.tail_coefficient();
  if (a >= -1.0 || !(c > 0.0)) return 1e4;
  // C X^(a+1) / |a+1| = 1e-10
  const double x = std::pow(1e-10 * std::abs(a + 1.0) / c, 1.0 / (a + 1.0));
  return std::clamp(x, 4.0, 1e6);
}

BinnedHamiltonian::BinnedHamiltonian(const Model& model, int bins, double cutoff)
    : n_(model.size()), bins_(bins), cutoff_(cutoff), scale_(model.scale()) {
  if (bins_ < 100) throw Error(ErrorCode::InvalidModel, "oracle_survival", "need at least 100 bins");
  const auto rule = quad::gauss_legendre(bins_, 0.0, cutoff_);
  const double lambda = std::sqrt(model.lambda_sq());
  diag_.resize(n_ + bins_);
  coupling_.resize(n_, bins_);
  for (int k = 0; k < n_; ++k) diag_[k] = model.energy(k);
  for (int j = 0; j < bins_; ++j) {
    const double x = rule.nodes[j];
    diag_[n_ + j] = x;
    const double sw = std::sqrt(rule.weights[j]);
    for (int k = 0; k < n_; ++k) coupling_(k, j) = lambda * model.level_form_factor(k, x) * sw;
  }
}

Eigen::VectorXcd BinnedHamiltonian::apply(const Eigen::VectorXcd& v) const {
  Eigen::VectorXcd y = diag_.cast<cplx>().cwiseProduct(v);
  y.head(n_) += coupling_.cast<cplx>() * v.tail(bins_);
  y.tail(bins_) += coupling_.transpose().cast<cplx>() * v.head(n_);
  return y;
}

Eigen::MatrixXd BinnedHamiltonian::dense() const {
  Eigen::MatrixXd h = diag_.asDiagonal();
  h.topRightCorner(n_, bins_) = coupling_;
  h.bottomLeftCorner(bins_, n_) = coupling_.transpose();
  return h;
}

std::pair<double, double> BinnedHamiltonian::bounds() const {
  const Eigen::VectorXd rows = coupling_.cwiseAbs().rowwise().sum();
  const Eigen::VectorXd cols = coupling_.cwiseAbs().colwise().sum().transpose();
  double lo = 1e300, hi = -1e300;
  for (int k = 0; k < n_; ++k) {
    lo = std::min(lo, diag_[k] - rows[k]);
    hi = std::max(hi, diag_[k] + rows[k]);
  }
  for (int j = 0; j < bins_; ++j) {
    lo = std::min(lo, diag_[n_ + j] - cols[j]);
    hi = std::max(hi, diag_[n_ + j] + cols[j]);
  }
  return {lo, hi};
}

std::vector<double> bessel_j_sequence(int kmax, double x) {
  std::vector<double> j(kmax + 1, 0.0);
  if (x == 0.0) {
    j[0] = 1.0;
    return j;
  }
  const double ax = std::abs(x);
  const int start = std::max(kmax, static_cast<int>(ax)) + 40 + static_cast<int>(6.0 * std::cbrt(ax));
  double next = 0.0, cur = 1e-300, norm = 0.0;
  for (int k = start; k > 0; --k) {
    const double prev = 2.0 * k / ax * cur - next;
    next = cur;
    cur = prev;
    if (k - 1 <= kmax) j[k - 1] = cur;
    if ((k - 1) % 2 == 0) norm += (k - 1 == 0 ? 1.0 : 2.0) * cur;
    if (std::abs(cur) > 1e250) {
      next *= 1e-250;
      cur *= 1e-250;
      norm *= 1e-250;
      for (int i = k - 1; i <= kmax; ++i) j[i] *= 1e-250;
    }
  }
  for (auto& v : j) v /= norm;
  if (x < 0.0)
    for (int k = 1; k <= kmax; k += 2) j[k] = -j[k];
  return j;
}

namespace {

SurvivalResult dense_survival(const BinnedHamiltonian& h, const InitialState& state,
                              std::span<const double> t_seconds) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.dense());
  if (es.info() != Eigen::Success)
    throw Error(ErrorCode::DiagonalizationFailure, "oracle_survival", "eigensolver did not converge");
  const int n = h.levels();
  const Eigen::VectorXcd c = es.eigenvectors().topRows(n).transpose().cast<cplx>() * state.alpha;
  SurvivalResult r;
  for (double t : t_seconds) {
    const double tau = h.scale() * t;
    cplx a = 0.0;
    for (Eigen::Index m = 0; m < c.size(); ++m)
      a += std::norm(c[m]) * std::exp(cplx(0.0, -es.eigenvalues()[m] * tau));
    r.t.push_back(t);
    r.amplitude.push_back(a);
  }
  return r;
}

SurvivalResult chebyshev_survival(const BinnedHamiltonian& h, const InitialState& state,
                                  std::span<const double> t_seconds) {
  auto [lo, hi] = h.bounds();
  const double centre = 0.5 * (hi + lo);
  const double half = 0.5 * (hi - lo) * 1.01;
  double tau_max = 0.0;
  for (double t : t_seconds) tau_max = std::max(tau_max, std::abs(h.scale() * t));
  const double xmax = half * tau_max;
  if (!(xmax <= 5e6))
    throw Error(ErrorCode::StructureMismatch, "oracle_survival",
                "time window too long for the Chebyshev expansion (Lambda t * bandwidth > 1e7)");
  const int kmax = static_cast<int>(xmax + 10.0 * std::cbrt(xmax) + 60.0);

  // moments mu_k = <psi| T_k(H') |psi>, H' = (H - centre) / half
  const int n = h.levels();
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(h.dimension());
  psi.head(n) = state.alpha;
  auto step = [&](const Eigen::VectorXcd& v) { return ((h.apply(v) - centre * v) / half).eval(); };
  std::vector<double> mu(kmax + 2, 0.0);
  Eigen::VectorXcd p0 = psi, p1 = step(psi);
  const double mu0 = psi.squaredNorm();
  const double mu1 = psi.dot(p1).real();
  mu[0] = mu0;
  mu[1] = mu1;
  for (int k = 1; 2 * k <= kmax + 1; ++k) {
    // p0 = T_{k-1} psi, p1 = T_k psi
    mu[2 * k] = 2.0 * p1.squaredNorm() - mu0;
    Eigen::VectorXcd p2 = 2.0 * step(p1) - p0;
    if (2 * k + 1 <= kmax + 1) mu[2 * k + 1] = 2.0 * p2.dot(p1).real() - mu1;
    p0 = std::move(p1);
    p1 = std::move(p2);
  }
  SurvivalResult r;
  for (double t : t_seconds) {
    const double tau = h.scale() * t;
    const auto j = bessel_j_sequence(kmax, half * tau);
    cplx s = 0.0;
    cplx ik = 1.0;  // (-i)^k
    for (int k = 0; k <= kmax; ++k) {
      s += (k == 0 ? 1.0 : 2.0) * ik * j[k] * mu[k];
      ik *= -I;
    }
    r.t.push_back(t);
    r.amplitude.push_back(std::exp(cplx(0.0, -centre * tau)) * s);
  }
  return r;
}

}  // namespace

SurvivalResult oracle_survival(const Model& model, const InitialState& state,
                               std::span<const double> t_seconds, const OracleOptions& options) {
  if (state.size() != model.size())
    throw Error(ErrorCode::StructureMismatch, "oracle_survival", "state dimension differs from the model");
  const double cutoff = options.cutoff > 0.0 ? options.cutoff : default_oracle_cutoff(model.base());
  const BinnedHamiltonian h(model, options.bins, cutoff);
  SurvivalResult r = options.method == OracleMethod::Dense ? dense_survival(h, state, t_seconds)
                                                           : chebyshev_survival(h, state, t_seconds);
  for (const auto& a : r.amplitude) {
    r.p.push_back(std::norm(a));
    r.pole_part.push_back(0.0);
    r.background_part.push_back(0.0);
  }
  return r;
}

SurvivalResult oracle_survival_converged(const Model& model, const InitialState& state,
                                         std::span<const double> t_seconds, OracleOptions options,
                                         int max_bins, double change) {
  SurvivalResult prev = oracle_survival(model, state, t_seconds, options);
  while (options.bins * 2 <= max_bins) {
    options.bins *= 2;
    SurvivalResult next = oracle_survival(model, state, t_seconds, options);
    double d = 0.0;
    for (std::size_t i = 0; i < next.p.size(); ++i) d = std::max(d, std::abs(next.p[i] - prev.p[i]));
    prev = std::move(next);
    if (d < change) break;
  }
  return prev;
}

}  // namespace fzeno
