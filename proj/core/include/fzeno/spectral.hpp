#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "fzeno/dispersion.hpp"
#include "fzeno/types.hpp"

namespace fzeno {

enum class PoleKind { Bound, Resonance, DegenerateReal };
enum class Provenance { Numeric, ClosedForm, Perturbative };

std::string to_string(PoleKind kind);
std::string to_string(Provenance p);

// A pole is stored as reference + offset so that clusters of poles far below the level
// spacing keep full relative precision.
struct Pole {
  double reference = 0.0;
  cplx offset = 0.0;
  PoleKind kind = PoleKind::Resonance;
  Provenance provenance = Provenance::Numeric;
  std::string seed;
  int multiplicity = 1;
  Eigen::MatrixXcd residue;  // residue of G at the pole, empty until computed

  cplx z() const { return reference + offset; }
};

struct PoleSet {
  std::vector<Pole> poles;
  int expected_resonances = 0;
};

// G^{-1}(z) = diag(x_k - z) - lambda^2 Sigma(z), with Sigma_ik = int f_i f_k / (x - z).
class ResolventKernel {
 public:
  struct Secular {
    cplx value;
    cplx derivative;
    double scale;  // magnitude of the largest contributing terms
  };

  explicit ResolventKernel(DispersionTable table);

  const DispersionTable& dispersion() const { return table_; }
  const Model& model() const { return table_.model(); }
  // energy origin used for offsets
  double reference() const { return reference_; }

  // argument is the offset y = z - reference()
  Eigen::MatrixXcd inverse_at(cplx y, Sheet sheet) const;
  Eigen::MatrixXcd resolvent_at(cplx y, Sheet sheet) const;

  Eigen::MatrixXcd inverse(cplx z, Sheet sheet) const { return inverse_at(z - reference_, sheet); }
  Eigen::MatrixXcd resolvent(cplx z, Sheet sheet) const { return resolvent_at(z - reference_, sheet); }
  cplx determinant(cplx z, Sheet sheet) const;
  // det G^{-1} from the rank-one structure; identical shapes only
  cplx determinant_rank_one(cplx z, Sheet sheet) const;

  // Analytic function whose zeros are the non-dark poles. For identical shapes the
  // exactly-real dark roots at degenerate energies are divided out.
  Secular secular(cplx y, Sheet sheet, bool with_derivative = true) const;

 private:
  Secular secular_rank_one(cplx y, Sheet sheet, bool with_derivative) const;
  Secular secular_general(cplx y, Sheet sheet, bool with_derivative) const;

  DispersionTable table_;
  double reference_ = 0.0;
  std::vector<double> group_offsets_;
  std::vector<double> group_weights_;  // sum of v_k^2 over the group
};

struct PoleSearchOptions {
  double newton_tolerance = 1e-12;
  int max_iterations = 100;
  int scan_re = 32;
  int scan_im = 16;
  bool bound_state_scan = true;
};

// Roots of det G^{-1}: resonances on sheet II, bound states on the negative real axis
// (sheet I) and, for identical shapes, the exactly real roots at degenerate energies.
PoleSet find_poles(const ResolventKernel& kernel, const PoleSearchOptions& options = {});

// fills the residue matrix of every pole
PoleSet residues(const ResolventKernel& kernel, PoleSet poles);

PoleSet solve_poles(const ResolventKernel& kernel, const PoleSearchOptions& options = {});

// (1 / 2 pi i) times the contour integral of G around the pole
Eigen::MatrixXcd residue_contour(const ResolventKernel& kernel, const Pole& pole, double radius,
                                 int points = 64);

// Offsets (z - reference) of seed roots from the closed-form approximations.
struct SplitSeeds {
  cplx y2;  // bright, width ~ lambda^2 N
  cplx y3;  // slow
};
// offset of x_bar - lambda^2 V W(x_bar) from reference(), V = sum v_k^2
cplx bright_root_first_order(const ResolventKernel& kernel);
// fixed-point iteration of the split-pair quadratic in W(z)
SplitSeeds split_roots_quadratic(const ResolventKernel& kernel, int iterations = 3);
// asymptotic forms for gap >> lambda^2 and gap << lambda^2
SplitSeeds split_roots_large_gap(const ResolventKernel& kernel);
SplitSeeds split_roots_small_gap(const ResolventKernel& kernel);

// Perturbative roots split from a degenerate level by different form factors.
struct EpsilonRoots {
  double x_bar;
  // shift from the trace formula over the dark subspace, first order in the perturbation
  cplx trace_shift;
  // imaginary part from the closed trace formula, prefactor 2 pi
  double trace_im_formula;
  // true when the trace formula predicts a vanishing width
  bool trace_width_vanishes;
  // eigenvalues of the dark-subspace Schur complement; includes the second-order
  // coupling through the bright state that the trace formula omits
  std::vector<cplx> schur_shifts;
};
EpsilonRoots perturbative_roots_epsilon(const ResolventKernel& kernel);

}  // namespace fzeno
