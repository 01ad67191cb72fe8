#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "fzeno/model.hpp"
#include "fzeno/quadrature.hpp"
#include "fzeno/types.hpp"

namespace fzeno {

struct MomentMatrix {
  Eigen::MatrixXd value;  // NaN where divergent
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> divergent;
  bool any_divergent() const { return divergent.any(); }
};

// Cauchy transforms of the coupling profiles and their continuations.
//
// W(z) = int_0^inf f^2(x) / (x - z) dx. On sheet I a real z > 0 is taken on the upper
// rim. Sheet II is the continuation through the positive real axis:
// W_II(z) = W_I(z) + 2 pi i f^2(z) for Im z < 0; for Im z >= 0 it coincides with sheet I.
class DispersionTable {
 public:
  explicit DispersionTable(Model model, quad::Tolerance tol = {});

  const Model& model() const { return model_; }
  const quad::Tolerance& tolerance() const { return tol_; }

  cplx W(cplx z, Sheet sheet) const;
  cplx W_prime(cplx z, Sheet sheet) const;

  // int_0^inf x^j f^2 dx, nullopt when divergent
  std::optional<double> base_moment(int j) const;

  // int f^2(x) P(x) / (x - z) dx and its z-derivative
  cplx transform(const Polynomial& P, cplx z, Sheet sheet) const;
  cplx transform_prime(const Polynomial& P, cplx z, Sheet sheet) const;

  // F^p_ik = int x^p f_i f_k dx
  MomentMatrix moment_matrix(int p) const;
  // F^p_ik for an arbitrary polynomial weight in place of x^p, used for (F^0)^2-type products
  std::optional<double> weighted_moment(const Polynomial& P) const;

  // Sigma_ik(z) = int f_i f_k / (x - z) dx
  Eigen::MatrixXcd self_energy(cplx z, Sheet sheet) const;
  Eigen::MatrixXcd self_energy_prime(cplx z, Sheet sheet) const;

  // perturbative decomposition Sigma_ik = p^(i+k-2) W + epsilon R_ik, R_ik = ... + epsilon Q_ik
  Eigen::MatrixXcd R(cplx z, Sheet sheet) const;
  Eigen::MatrixXcd Q(cplx z, Sheet sheet) const;

 private:
  cplx cauchy(bool derivative, cplx z, Sheet sheet) const;
  // T_j(z) = int x^j f^2 / (x - z) for j = 0..jmax, from W and the base moments
  std::vector<cplx> basis(cplx z, cplx w, int jmax) const;
  std::vector<cplx> basis_prime(cplx z, cplx w, cplx wp, int jmax) const;
  cplx apply(const Polynomial& P, const std::vector<cplx>& t) const;
  void require_moments(int jmax, const char* operation) const;

  Model model_;
  quad::Tolerance tol_;
  std::vector<std::optional<double>> moments_;
  std::vector<std::vector<Polynomial>> pair_weights_;  // c_i c_k
  int max_degree_ = 0;
};

}  // namespace fzeno
