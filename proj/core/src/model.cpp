#include "fzeno/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fzeno/errors.hpp"

namespace fzeno {

namespace {

std::vector<Polynomial> level_multipliers(const ModelSpec& spec) {
  const auto& ff = spec.form_factors;
  std::vector<Polynomial> m;
  double pk = 1.0;
  for (int k = 0; k < spec.n_levels(); ++k) {
    Polynomial c = Polynomial::constant(pk);
    if (ff.epsilon != 0.0 && k < static_cast<int>(ff.perturbations.size()))
      c = c + ff.perturbations[k] * ff.epsilon;
    m.push_back(c);
    pk *= ff.ratio;
  }
  return m;
}

}  // namespace

ValidationReport validate_model(const ModelSpec& spec) {
  ValidationReport r;
  auto bad = [&r](const std::string& s) { r.violations.push_back(s); };
  const int n = spec.n_levels();
  if (n < 1) bad("at least one discrete level is required");
  for (int k = 0; k < n; ++k) {
    const double x = spec.energies[k];
    if (!std::isfinite(x) || x <= 0.0) {
      std::ostringstream os;
      os << "level " << k + 1 << " energy must be positive and finite (got " << x << ")";
      bad(os.str());
    }
  }
  if (!std::isfinite(spec.lambda_sq) || spec.lambda_sq <= 0.0) bad("lambda_sq must be positive");
  if (!std::isfinite(spec.scale) || spec.scale <= 0.0) bad("scale must be positive");
  const auto& ff = spec.form_factors;
  if (!std::isfinite(ff.ratio) || ff.ratio == 0.0) bad("geometric ratio p must be nonzero");
  if (!std::isfinite(ff.epsilon) || ff.epsilon < 0.0) bad("epsilon must be nonnegative");
  if (!ff.perturbations.empty() && static_cast<int>(ff.perturbations.size()) != n)
    bad("perturbation profiles must be given for every level");
  const double a = ff.base.tail_exponent();
  if (!std::isfinite(a)) bad("tail exponent of the form factor must be finite");
  if (!r.ok()) return r;

  const auto m = level_multipliers(spec);
  int max_deg = -1;
  for (int i = 0; i < n; ++i)
    for (int k = i; k < n; ++k) max_deg = std::max(max_deg, (m[i] * m[k]).degree());
  if (a + max_deg >= 0.0)
    bad("self-energy integral diverges: tail exponent plus multiplier degree must be negative");
  for (int p = 0; p < 3; ++p) r.moment_divergent[p] = a + max_deg + p >= -1.0;
  return r;
}

Model::Model(ModelSpec spec) : spec_(std::move(spec)) {
  const auto report = validate_model(spec_);
  if (!report.ok()) {
    std::string msg;
    for (const auto& v : report.violations) msg += (msg.empty() ? "" : "; ") + v;
    throw Error(ErrorCode::InvalidModel, "Model", msg);
  }
  const int n = size();
  multipliers_ = level_multipliers(spec_);
  coupling_.resize(n);
  double pk = 1.0;
  for (int k = 0; k < n; ++k, pk *= spec_.form_factors.ratio) coupling_[k] = pk;
  identical_shape_ = true;
  for (int k = 0; k < n; ++k)
    if (multipliers_[k].degree() > 0 || multipliers_[k].coefficient(0) != coupling_[k])
      identical_shape_ = false;

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [this](int a, int b) { return spec_.energies[a] < spec_.energies[b]; });
  for (int k : order) {
    const double x = spec_.energies[k];
    if (!groups_.empty()) {
      auto& g = groups_.back();
      if (std::abs(x - g.energy) <= degeneracy_tolerance * std::max(std::abs(x), std::abs(g.energy))) {
        g.levels.push_back(k);
        continue;
      }
    }
    groups_.push_back({x, {k}});
  }
}

std::optional<OneSplit> Model::one_split() const {
  const int n = size();
  if (n < 2 || groups_.size() != 2) return std::nullopt;
  if (n == 2) return OneSplit{energy(0), energy(1) - energy(0), 1};
  for (size_t g = 0; g < 2; ++g) {
    if (groups_[g].levels.size() == 1) {
      const auto& bulk = groups_[1 - g];
      const int s = groups_[g].levels[0];
      return OneSplit{bulk.energy, energy(s) - bulk.energy, s};
    }
  }
  return std::nullopt;
}

double Model::level_form_factor(int k, double x) const {
  return base().f(x) * multipliers_[k](x);
}

InitialState build_state(const Eigen::VectorXcd& raw) {
  const double nrm = raw.norm();
  if (!(nrm > 0.0) || !std::isfinite(nrm))
    throw Error(ErrorCode::AllZero, "build_state", "amplitude vector has zero norm");
  InitialState s;
  s.alpha = raw / nrm;
  s.alpha_hat = s.alpha.sum();
  return s;
}

InitialState build_state(std::span<const cplx> raw) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(raw.size()));
  for (size_t i = 0; i < raw.size(); ++i) v[static_cast<Eigen::Index>(i)] = raw[i];
  return build_state(v);
}

}  // namespace fzeno
