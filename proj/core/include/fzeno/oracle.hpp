#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "fzeno/evolution.hpp"
#include "fzeno/model.hpp"

namespace fzeno {

enum class OracleMethod {
  Chebyshev,  // Chebyshev expansion of exp(-iH tau) on the binned Hamiltonian
  Dense,      // full dense diagonalization
};

struct OracleOptions {
  int bins = 2000;
  double cutoff = 0.0;  // 0 selects a cutoff from the tail of the form factor
  OracleMethod method = OracleMethod::Chebyshev;
};

// cutoff at which the neglected tail weight int_X^inf f^2 drops below 1e-10
double default_oracle_cutoff(const FormFactor& ff);

// Hamiltonian with the continuum replaced by Gauss-Legendre bins on [0, cutoff]:
// discrete levels x_k, bin energies x_j, couplings lambda f_k(x_j) sqrt(w_j).
// Uses nothing from the resolvent or pole machinery.
class BinnedHamiltonian {
 public:
  BinnedHamiltonian(const Model& model, int bins, double cutoff);

  int dimension() const { return n_ + bins_; }
  int levels() const { return n_; }
  double cutoff() const { return cutoff_; }
  double scale() const { return scale_; }

  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const;
  Eigen::MatrixXd dense() const;
  // Gershgorin bounds of the spectrum
  std::pair<double, double> bounds() const;

 private:
  int n_, bins_;
  double cutoff_, scale_;
  Eigen::VectorXd diag_;
  Eigen::MatrixXd coupling_;  // n x bins
};

// Survival probability on the binned Hamiltonian.
SurvivalResult oracle_survival(const Model& model, const InitialState& state,
                               std::span<const double> t_seconds, const OracleOptions& options = {});

// doubles the bin count until max |dp| between successive runs drops below `change`
SurvivalResult oracle_survival_converged(const Model& model, const InitialState& state,
                                         std::span<const double> t_seconds, OracleOptions options = {},
                                         int max_bins = 16000, double change = 1e-4);

// J_0(x) ... J_kmax(x) by normalized backward recurrence
std::vector<double> bessel_j_sequence(int kmax, double x);

}  // namespace fzeno
