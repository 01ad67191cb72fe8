#include <boost/math/special_functions/bessel.hpp>

#include "doctest.h"
#include "fzeno/errors.hpp"
#include "fzeno/oracle.hpp"
#include "fzeno/zeno.hpp"
#include "support.hpp"

using namespace fzeno;
using namespace fzeno::test;

TEST_SUITE("oracle") {
  TEST_CASE("Bessel sequence against boost") {
    for (double x : {0.0, 0.1, 5.0, 50.0, 1000.0}) {
      const int kmax = static_cast<int>(x + 10.0 * std::cbrt(x) + 60.0);
      const auto j = bessel_j_sequence(kmax, x);
      for (int k = 0; k <= kmax; k += 7) CHECK(std::abs(j[k] - boost::math::cyl_bessel_j(k, x)) < 1e-12);
    }
    const auto n = bessel_j_sequence(20, -3.0);
    CHECK(n[3] == doctest::Approx(boost::math::cyl_bessel_j(3, -3.0)).scale(0.0).epsilon(1e-12));
  }

  TEST_CASE("default cutoff leaves a 1e-10 tail") {
    // int_X^inf x / (1 + x^2)^4 = 1 / (6 (1 + X^2)^3)
    const double x = default_oracle_cutoff(FormFactor::canonical_hydrogen());
    const double tail = 1.0 / (6.0 * std::pow(1.0 + x * x, 3));
    CHECK(tail <= 1e-10);
    CHECK(tail >= 0.99e-10);
  }

  TEST_CASE("Chebyshev propagation against dense diagonalization") {
    const Model m(split(3, 0.05));
    std::mt19937 rng(1);
    const auto s = random_state(3, rng);
    const auto grid = linspace(0.0, 300.0, 61);
    OracleOptions o;
    o.bins = 400;
    const auto a = oracle_survival(m, s, grid, o);
    o.method = OracleMethod::Dense;
    const auto b = oracle_survival(m, s, grid, o);
    CHECK(max_abs_diff(a.p, b.p) < 1e-10);
    CHECK(a.p[0] == doctest::Approx(1.0).scale(0.0).epsilon(1e-14));
  }

  TEST_CASE("vanishing coupling leaves discrete phases") {
    ModelSpec spec = desk(2, 1e-16);
    spec.energies = {0.3, 0.7};
    const Model m(spec);
    const auto s = state_of({1.0, cplx(0.0, 2.0)});
    const auto grid = linspace(0.0, 40.0, 41);
    const auto r = oracle_survival(m, s, grid);
    for (size_t i = 0; i < grid.size(); ++i) {
      const cplx a = 0.2 * std::exp(-I * 0.3 * grid[i]) + 0.8 * std::exp(-I * 0.7 * grid[i]);
      CHECK(r.p[i] == doctest::Approx(std::norm(a)).scale(0.0).epsilon(1e-12));
    }
  }

  TEST_CASE("binned Hamiltonian structure") {
    const Model m(desk(2));
    CHECK_THROWS_AS(BinnedHamiltonian(m, 50, 30.0), Error);
    const BinnedHamiltonian h(m, 200, 30.0);
    CHECK(h.dimension() == 202);
    const Eigen::MatrixXd d = h.dense();
    CHECK((d - d.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(202);
    v[0] = 1.0;
    CHECK((h.apply(v) - d.col(0).cast<cplx>()).norm() < 1e-14);
    // squared couplings of level 0 integrate lambda^2 f^2 over [0, cutoff]
    const double f0 = d.row(0).tail(200).squaredNorm();
    CHECK(f0 == doctest::Approx(0.01 * (1.0 / 6.0 - 1.0 / (6.0 * std::pow(1.0 + 900.0, 3)))).scale(0.0).epsilon(1e-10));
  }

  TEST_CASE("oracle agrees with the main path at desk scale") {
    for (int n : {1, 2, 3}) {
      const Setup st(desk(n));
      std::mt19937 rng(40 + n);
      const auto s = random_state(n, rng);
      const double td = decay_time(st.engine.poles(), s, 1.0).t_d;
      const auto grid = linspace(0.0, 3.0 * td, 301);
      const auto main = st.engine.survival(s, grid);
      const auto orc = oracle_survival(st.model(), s, grid);
      CHECK(max_abs_diff(main.p, orc.p) <= 1e-3);
      const auto conv = oracle_survival_converged(st.model(), s, grid);
      CHECK(max_abs_diff(main.p, conv.p) <= 1e-3);
    }
  }
}
