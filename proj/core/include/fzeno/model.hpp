#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fzeno/form_factor.hpp"
#include "fzeno/types.hpp"

namespace fzeno {

// Level k couples through f_k(x) = f(x) * (p^(k-1) + epsilon * q_k(x)), with q_k polynomial.
struct FormFactorFamily {
  FormFactor base = FormFactor::canonical_hydrogen();
  double ratio = 1.0;    // p
  double epsilon = 0.0;
  std::vector<Polynomial> perturbations;  // q_k, empty or one per level
};

struct ModelSpec {
  std::vector<double> energies;  // dimensionless x_k = omega_k / Lambda
  double lambda_sq = 0.0;
  double scale = 1.0;            // Lambda in 1/s
  FormFactorFamily form_factors;

  int n_levels() const { return static_cast<int>(energies.size()); }
};

struct DegeneracyGroup {
  double energy;
  std::vector<int> levels;
};

struct ValidationReport {
  std::vector<std::string> violations;
  // F^p for p = 0, 1, 2 diverges for at least one pair of levels
  std::array<bool, 3> moment_divergent{false, false, false};

  bool ok() const { return violations.empty(); }
};

ValidationReport validate_model(const ModelSpec& spec);

inline constexpr double degeneracy_tolerance = 1e-10;

// N-1 levels at x_bar and one level at x_bar + delta
struct OneSplit {
  double x_bar;
  double delta;
  int split_level;
};

// Validated, immutable model with cached derived structure.
class Model {
 public:
  explicit Model(ModelSpec spec);

  const ModelSpec& spec() const { return spec_; }
  int size() const { return spec_.n_levels(); }
  double lambda_sq() const { return spec_.lambda_sq; }
  double scale() const { return spec_.scale; }
  const FormFactor& base() const { return spec_.form_factors.base; }
  double energy(int k) const { return spec_.energies[k]; }

  // c_k(x) with f_k = f * c_k
  const std::vector<Polynomial>& multipliers() const { return multipliers_; }
  // true when every f_k is proportional to f (rank-one coupling)
  bool identical_shape() const { return identical_shape_; }
  // v_k = p^(k-1)
  const Eigen::VectorXd& coupling_vector() const { return coupling_; }

  const std::vector<DegeneracyGroup>& groups() const { return groups_; }
  bool fully_degenerate() const { return groups_.size() == 1; }
  std::optional<OneSplit> one_split() const;

  double level_form_factor(int k, double x) const;

 private:
  ModelSpec spec_;
  std::vector<Polynomial> multipliers_;
  Eigen::VectorXd coupling_;
  bool identical_shape_ = true;
  std::vector<DegeneracyGroup> groups_;
};

struct InitialState {
  Eigen::VectorXcd alpha;
  cplx alpha_hat;  // sum_k alpha_k
  double alpha_hat_sq() const { return std::norm(alpha_hat); }
  int size() const { return static_cast<int>(alpha.size()); }
};

// normalizes; throws AllZero
InitialState build_state(std::span<const cplx> raw);
InitialState build_state(const Eigen::VectorXcd& raw);

}  // namespace fzeno
