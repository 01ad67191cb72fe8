#include <algorithm>

#include "doctest.h"
#include "fzeno/errors.hpp"
#include "fzeno/evolution.hpp"
#include "fzeno/spectral.hpp"
#include "support.hpp"

using namespace fzeno;
using namespace fzeno::test;

namespace {

cplx cofactor_det(const Eigen::MatrixXcd& m) {
  if (m.rows() == 1) return m(0, 0);
  cplx d = 0.0;
  for (int j = 0; j < m.cols(); ++j) {
    Eigen::MatrixXcd minor(m.rows() - 1, m.cols() - 1);
    for (int r = 1; r < m.rows(); ++r)
      for (int c = 0, cc = 0; c < m.cols(); ++c)
        if (c != j) minor(r - 1, cc++) = m(r, c);
    d += (j % 2 ? -1.0 : 1.0) * m(0, j) * cofactor_det(minor);
  }
  return d;
}

std::vector<cplx> resonance_offsets(const PoleSet& ps) {
  std::vector<cplx> v;
  for (const auto& p : ps.poles)
    if (p.kind == PoleKind::Resonance) v.push_back(p.offset);
  std::sort(v.begin(), v.end(), [](cplx a, cplx b) { return a.imag() < b.imag(); });
  return v;
}

cplx newton(const ResolventKernel& k, cplx y) {
  for (int it = 0; it < 100; ++it) {
    const auto s = k.secular(y, Sheet::II);
    const cplx step = s.value / s.derivative;
    y -= step;
    if (std::abs(step) < 1e-16 * std::max(1.0, std::abs(y))) break;
  }
  return y;
}

void check_seeds(const ResolventKernel& k, SplitSeeds seeds) {
  std::vector<cplx> polished{newton(k, seeds.y2), newton(k, seeds.y3)};
  std::sort(polished.begin(), polished.end(), [](cplx a, cplx b) { return a.imag() < b.imag(); });
  const auto found = resonance_offsets(find_poles(k));
  REQUIRE(found.size() == 2);
  for (int j = 0; j < 2; ++j) CHECK(std::abs(polished[j] - found[j]) < 1e-9);
}

}  // namespace

TEST_SUITE("spectral") {
  TEST_CASE("rank-one determinant against the matrix and cofactor determinants") {
    ModelSpec s = desk(3, 0.05);
    s.energies = {0.4, 0.5, 0.65};
    s.form_factors.ratio = 0.8;
    const ResolventKernel k{DispersionTable(Model(s))};
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> re(0.05, 1.5), im(-0.5, -0.01), up(-0.5, 0.5);
    for (int i = 0; i < 50; ++i) {
      const cplx z1(re(rng), up(rng)), z2(re(rng), im(rng));
      for (auto [z, sh] : {std::pair{z1, Sheet::I}, std::pair{z2, Sheet::II}}) {
        const cplx a = k.determinant_rank_one(z, sh), b = k.determinant(z, sh);
        const cplx c = cofactor_det(k.inverse(z, sh));
        CHECK(std::abs(a - b) <= 1e-10 * std::abs(b));
        CHECK(std::abs(c - b) <= 1e-10 * std::abs(b));
      }
    }
  }

  TEST_CASE("resolvent inverts the kernel") {
    ModelSpec s = desk(3);
    s.energies = {0.4, 0.5, 0.5};
    s.form_factors.epsilon = 0.2;
    s.form_factors.perturbations = {Polynomial({1.0}), Polynomial({0.0, 1.0}), Polynomial({-1.0, 0.5})};
    const ResolventKernel k{DispersionTable(Model(s))};
    for (cplx z : {cplx(0.3, -0.1), cplx(0.9, 0.2)}) {
      const Eigen::MatrixXcd e = k.inverse(z, Sheet::II) * k.resolvent(z, Sheet::II) - Eigen::MatrixXcd::Identity(3, 3);
      CHECK(e.cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  TEST_CASE("fully degenerate model: one resonance and a real dark pole") {
    for (int n : {1, 2, 3, 6}) {
      const ResolventKernel k{DispersionTable(Model(desk(n)))};
      const auto ps = solve_poles(k);
      int res = 0, dark = 0;
      for (const auto& p : ps.poles) {
        if (p.kind == PoleKind::Resonance) {
          ++res;
          CHECK(p.z().imag() < 0.0);
          CHECK(std::abs(p.z() - 0.5) < 0.1);
        }
        if (p.kind == PoleKind::DegenerateReal) {
          ++dark;
          CHECK(p.z() == cplx(0.5, 0.0));
          CHECK(p.multiplicity == n - 1);
        }
      }
      CHECK(res == 1);
      CHECK(dark == (n > 1 ? 1 : 0));
    }
  }

  TEST_CASE("bright pole against the first-order formula, deviation of order lambda^4") {
    std::vector<double> dev;
    for (double l2 : {1e-2, 1e-3, 1e-4}) {
      const ResolventKernel k{DispersionTable(Model(desk(3, l2)))};
      const auto r = resonance_offsets(find_poles(k));
      REQUIRE(r.size() == 1);
      dev.push_back(std::abs(r[0] - bright_root_first_order(k)));
    }
    const double slope = std::log(dev[0] / dev[2]) / std::log(100.0);
    CHECK(slope == doctest::Approx(2.0).scale(0.0).epsilon(0.05));
  }

  TEST_CASE("residues sum to minus the identity for weak coupling") {
    const double l2 = 1e-4;
    ModelSpec s = desk(3, l2);
    s.energies = {0.4, 0.5, 0.5};
    const ResolventKernel k{DispersionTable(Model(s))};
    const auto ps = solve_poles(k);
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Identity(3, 3);
    for (const auto& p : ps.poles) sum += p.residue;
    CHECK(sum.cwiseAbs().maxCoeff() <= 10.0 * l2);
  }

  TEST_CASE("residues plus background reproduce the identity exactly") {
    for (auto spec : {desk(3), split(2, 0.02), split(4, 1e-4)}) {
      const Setup st(spec);
      const Eigen::MatrixXcd m =
          st.engine.pole_matrix(0.0) + st.engine.background_matrix(0.0) - Eigen::MatrixXcd::Identity(spec.n_levels(), spec.n_levels());
      CHECK(m.cwiseAbs().maxCoeff() < 1e-8);
    }
  }

  TEST_CASE("residue matrices against a contour integral") {
    const ResolventKernel k{DispersionTable(Model(split(3, 0.01)))};
    const auto ps = solve_poles(k);
    for (const auto& p : ps.poles) {
      if (p.kind != PoleKind::Resonance) continue;
      const double radius = 0.25 * std::abs(p.offset.imag());
      const Eigen::MatrixXcd c = residue_contour(k, p, radius, 128);
      CHECK((c - p.residue).cwiseAbs().maxCoeff() < 1e-8 * p.residue.cwiseAbs().maxCoeff());
    }
  }

  TEST_CASE("seeding robustness") {
    SUBCASE("large gap") {
      const ResolventKernel k{DispersionTable(Model(split(2, 0.05, 1e-3)))};
      check_seeds(k, split_roots_large_gap(k));
      check_seeds(k, split_roots_quadratic(k));
    }
    SUBCASE("small gap") {
      const ResolventKernel k{DispersionTable(Model(split(2, 1e-5, 1e-2)))};
      check_seeds(k, split_roots_small_gap(k));
      check_seeds(k, split_roots_quadratic(k));
    }
  }

  TEST_CASE("slow pole of a small split") {
    const double delta = 1e-5, l2 = 1e-2;
    const int n = 2;
    const ResolventKernel k{DispersionTable(Model(split(n, delta, l2)))};
    const auto r = resonance_offsets(find_poles(k));
    REQUIRE(r.size() == 2);
    const double f2 = k.model().base().f2(0.5);
    const cplx w = k.dispersion().W(0.5, Sheet::I);
    const double expected = -pi * f2 * delta * delta * (n - 1) / (l2 * std::norm(w) * n * n * n);
    CHECK(std::abs(r[1].imag() - expected) <= 10.0 * delta * std::abs(expected));
  }

  TEST_CASE("bound state below the continuum for strong coupling") {
    // x_bar < lambda^2 W(0) = lambda^2 * 5 pi / 32
    const ResolventKernel k{DispersionTable(Model(desk(1, 2.0)))};
    const auto ps = solve_poles(k);
    const auto it = std::find_if(ps.poles.begin(), ps.poles.end(), [](const Pole& p) { return p.kind == PoleKind::Bound; });
    REQUIRE(it != ps.poles.end());
    CHECK(it->z().real() < 0.0);
    CHECK(it->z().imag() == 0.0);
    CHECK(std::abs(k.determinant(it->z(), Sheet::I)) < 1e-10);
  }

  TEST_CASE("epsilon-split slow pole") {
    auto slow = [](double eps, std::vector<Polynomial> q) {
      ModelSpec s = desk(2);
      s.form_factors.epsilon = eps;
      s.form_factors.perturbations = std::move(q);
      const ResolventKernel k{DispersionTable(Model(s))};
      const auto r = resonance_offsets(find_poles(k));
      return std::pair{r.back(), perturbative_roots_epsilon(k)};
    };
    // q_1(x_bar) = 1, q_2(x_bar) = 0 with shapes that stay linearly independent
    const std::vector<Polynomial> q{Polynomial({1.0}), Polynomial({-0.5, 1.0})};
    const auto [z1, e1] = slow(1e-3, q);
    const auto [z2, e2] = slow(1e-2, q);
    CHECK(std::log(z2.imag() / z1.imag()) / std::log(10.0) == doctest::Approx(2.0).scale(0.0).epsilon(0.05));
    REQUIRE(e1.schur_shifts.size() == 1);
    CHECK(std::abs(z1 - e1.schur_shifts[0]) < 1e-2 * std::abs(z1));
    CHECK(e1.trace_im_formula == doctest::Approx(pi * 1e-6 * 1e-2 * FormFactor::canonical_hydrogen().f2(0.5)).scale(0.0));
    // equal perturbations keep the shapes proportional: the dark state survives
    const auto [z3, e3] = slow(1e-2, {Polynomial({0.5, 1.0}), Polynomial({0.5, 1.0})});
    CHECK(std::abs(z3.imag()) <= 1e-2 * std::abs(z2.imag()));
    CHECK(e3.trace_width_vanishes);
    CHECK_THROWS_AS(slow(0.0, q), Error);
  }
}
