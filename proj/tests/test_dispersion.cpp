#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "doctest.h"
#include "fzeno/dispersion.hpp"
#include "fzeno/errors.hpp"
#include "support.hpp"

using namespace fzeno;
using namespace fzeno::test;

namespace {

// closed form for f^2 = sqrt(x) / (1 + x): W = pi (1 - sqrt(-z)) / (1 + z) on sheet I,
// the opposite root on sheet II
cplx sqrt_family_W(cplx z, Sheet sheet) {
  cplx r = std::sqrt(-z);
  if (z.imag() == 0.0 && z.real() > 0.0) r = cplx(0.0, -std::sqrt(z.real()));
  if (sheet == Sheet::II && z.imag() < 0.0) r = -r;
  return pi * (1.0 - r) / (1.0 + z);
}

template <class F>
cplx integrate_half_line(F f) {
  using Q = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double inf = std::numeric_limits<double>::infinity();
  const double re = Q::integrate([&](double x) { return f(x).real(); }, 0.0, inf, 20, 1e-14);
  const double im = Q::integrate([&](double x) { return f(x).imag(); }, 0.0, inf, 20, 1e-14);
  return {re, im};
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

DispersionTable table_for(FormFactor ff, int n = 1) {
  ModelSpec s = desk(n);
  s.form_factors.base = ff;
  return DispersionTable(Model(s));
}

}  // namespace

TEST_SUITE("dispersion") {
  TEST_CASE("sqrt family matches the closed form on both sheets") {
    const auto t = table_for(FormFactor::canonical_sqrt());
    const std::vector<cplx> below{{0.3, -0.2}, {2.0, -1.0}, {0.5, -0.05}, {10.0, -3.0}, {1e-3, -1e-3}, {-0.5, -0.5}};
    for (cplx z : below) {
      CHECK(rel(t.W(z, Sheet::I), sqrt_family_W(z, Sheet::I)) < 1e-10);
      CHECK(rel(t.W(z, Sheet::II), sqrt_family_W(z, Sheet::II)) < 1e-10);
    }
    for (cplx z : {cplx(2.0, 1.0), cplx(-0.5, 0.0), cplx(-30.0, 0.0), cplx(0.5, 0.0), cplx(7.0, 0.0)})
      CHECK(rel(t.W(z, Sheet::I), sqrt_family_W(z, Sheet::I)) < 1e-10);
  }

  TEST_CASE("hydrogen W against high-precision quadrature") {
    const auto t = table_for(FormFactor::canonical_hydrogen());
    struct Ref {
      cplx z;
      Sheet sheet;
      cplx w;
    };
    // 30-digit quadrature of x / (1 + x^2)^4 / (x - z)
    const std::vector<Ref> refs{
        {{0.5, 0.0}, Sheet::I, {-0.095639330775630307, 0.64339817545518965524}},
        {{2.0, 0.0}, Sheet::I, {-0.12814358454767693438, 0.010053096491487338363}},
        {{0.3, -0.2}, Sheet::I, {0.16072620020959642437, -0.39831366725913430817}},
        {{0.3, -0.2}, Sheet::II, {0.40124894520352639631, 1.4017176991779548636}},
        {{-1.0, 0.0}, Sheet::I, {0.11015856290865229463, 0.0}},
        {{2.0, 1.0}, Sheet::I, {-0.074910343096231629724, 0.05934893630420015815}},
        {{0.5, -0.05}, Sheet::I, {-0.063056485722131753127, -0.57487740878547283455}},
        {{0.5, -0.05}, Sheet::II, {-0.14171017391563668647, 0.72217373875959261804}},
    };
    for (const auto& r : refs) CHECK(rel(t.W(r.z, r.sheet), r.w) < 1e-10);
  }

  TEST_CASE("W derivative against central differences") {
    for (auto ff : {FormFactor::canonical_hydrogen(), FormFactor::canonical_sqrt()}) {
      const auto t = table_for(ff);
      for (cplx z : {cplx(0.4, -0.3), cplx(1.5, -0.1), cplx(-0.7, 0.0), cplx(0.8, 0.6)}) {
        for (Sheet sh : {Sheet::I, Sheet::II}) {
          const double h = 1e-5;
          const cplx fd = (t.W(z + h, sh) - t.W(z - h, sh)) / (2.0 * h);
          CHECK(rel(t.W_prime(z, sh), fd) < 1e-7);
        }
      }
    }
  }

  TEST_CASE("Sokhotski-Plemelj on the upper rim") {
    for (auto ff : {FormFactor::canonical_hydrogen(), FormFactor::canonical_sqrt()}) {
      const auto t = table_for(ff);
      for (double x : {1e-3, 0.01, 0.1, 0.5, 1.0, 3.0, 10.0, 100.0})
        CHECK(std::abs(t.W(cplx(x, 0.0), Sheet::I).imag() - pi * ff.f2(x)) <= 1e-9);
    }
  }

  TEST_CASE("sheet matching across the cut") {
    for (auto ff : {FormFactor::canonical_hydrogen(), FormFactor::canonical_sqrt()}) {
      const auto t = table_for(ff);
      for (double x : {0.2, 0.5, 2.0}) {
        auto gap = [&](double eta) { return std::abs(t.W(cplx(x, eta), Sheet::I) - t.W(cplx(x, -eta), Sheet::II)); };
        const double g4 = gap(1e-4), g6 = gap(1e-6);
        CHECK(g6 < g4);
        CHECK(g6 < 1e-5);
      }
    }
  }

  TEST_CASE("Schwarz reflection on sheet I") {
    for (auto ff : {FormFactor::canonical_hydrogen(), FormFactor::canonical_sqrt()}) {
      const auto t = table_for(ff);
      for (cplx z : {cplx(0.4, -0.3), cplx(3.0, 2.0), cplx(-2.0, 0.1), cplx(0.01, -0.02)})
        CHECK(std::abs(t.W(std::conj(z), Sheet::I) - std::conj(t.W(z, Sheet::I))) < 1e-12 * std::abs(t.W(z, Sheet::I)));
    }
  }

  TEST_CASE("base moments") {
    const auto h = table_for(FormFactor::canonical_hydrogen());
    CHECK(*h.base_moment(0) == doctest::Approx(1.0 / 6.0).scale(0.0).epsilon(1e-12));
    CHECK(*h.base_moment(1) == doctest::Approx(pi / 32.0).scale(0.0).epsilon(1e-12));
    CHECK(*h.base_moment(2) == doctest::Approx(1.0 / 12.0).scale(0.0).epsilon(1e-12));
    const auto q = table_for(FormFactor::canonical_sqrt());
    CHECK_FALSE(q.base_moment(0).has_value());
    const auto m = q.moment_matrix(0);
    CHECK(m.any_divergent());
    CHECK(std::isnan(m.value(0, 0)));
  }

  TEST_CASE("moment matrix of a geometric family") {
    ModelSpec s = desk(3);
    s.form_factors.ratio = 0.7;
    const DispersionTable t{Model(s)};
    const auto f0 = t.moment_matrix(0).value;
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k) CHECK(f0(i, k) == doctest::Approx(std::pow(0.7, i + k) / 6.0).scale(0.0).epsilon(1e-12));
  }

  TEST_CASE("polynomial transform and self-energy against direct quadrature") {
    ModelSpec s = desk(2);
    s.form_factors.epsilon = 0.2;
    s.form_factors.perturbations = {Polynomial({0.0, 1.0}), Polynomial({1.0, -0.5, 0.25})};
    const DispersionTable t{Model(s)};
    const auto& ff = t.model().base();
    const Polynomial P({1.0, 2.0, -1.0});
    const cplx z(0.4, -0.3);
    const cplx direct = integrate_half_line([&](double x) { return ff.f2(x) * P(x) / (x - z); });
    CHECK(rel(t.transform(P, z, Sheet::I), direct) < 1e-10);
    CHECK(rel(t.transform(P, z, Sheet::II), direct + 2.0 * pi * I * ff.f2(z) * P(z)) < 1e-10);

    const auto sig = t.self_energy(z, Sheet::I);
    for (int i = 0; i < 2; ++i)
      for (int k = 0; k < 2; ++k) {
        const cplx d = integrate_half_line([&](double x) {
          return t.model().level_form_factor(i, x) * t.model().level_form_factor(k, x) / (x - z);
        });
        CHECK(rel(sig(i, k), d) < 1e-10);
      }
    const cplx zr(-0.2, 0.0);
    const auto f1 = t.moment_matrix(1).value;
    const double d = integrate_half_line([&](double x) {
                       return cplx(x * t.model().level_form_factor(0, x) * t.model().level_form_factor(1, x));
                     }).real();
    CHECK(f1(0, 1) == doctest::Approx(d).scale(0.0).epsilon(1e-10));
    CHECK(std::abs(t.self_energy(zr, Sheet::I)(0, 1).imag()) < 1e-14);
  }

  TEST_CASE("Gram positivity of the moment matrices") {
    ModelSpec s = desk(4);
    s.energies = {0.4, 0.5, 0.5, 0.9};
    s.form_factors.ratio = 0.8;
    s.form_factors.epsilon = 0.3;
    s.form_factors.perturbations = {Polynomial({1.0}), Polynomial({0.0, -1.0}), Polynomial({0.5, 1.0}),
                                    Polynomial({-2.0, 1.0})};
    const DispersionTable t{Model(s)};
    std::mt19937 rng(3);
    for (int p = 0; p <= 2; ++p) {
      const Eigen::MatrixXd F = t.moment_matrix(p).value;
      CHECK((F - F.transpose()).cwiseAbs().maxCoeff() < 1e-14 * F.cwiseAbs().maxCoeff());
      for (int trial = 0; trial < 100; ++trial) {
        const auto st = random_state(4, rng);
        const cplx q = st.alpha.dot(F.cast<cplx>() * st.alpha);
        CHECK(q.real() >= -1e-12);
      }
    }
  }

  TEST_CASE("custom profile without continuation cannot reach sheet II") {
    CustomProfile c;
    c.f2 = [](double x) { return x / std::pow(1.0 + x * x, 4); };
    c.tail_exponent = -7.0;
    c.tail_coefficient = 1.0;
    ModelSpec s = desk(1);
    s.form_factors.base = FormFactor::custom(c);
    const DispersionTable t{Model(s)};
    CHECK(rel(t.W(cplx(0.3, -0.2), Sheet::I), cplx(0.16072620020959642437, -0.39831366725913430817)) < 1e-9);
    CHECK_THROWS_AS(t.W(cplx(0.3, -0.2), Sheet::II), Error);
  }
}

TEST_CASE("moments with a high-degree perturbation diverge instead of overflowing" * doctest::test_suite("dispersion")) {
  ModelSpec s = fzeno::test::desk(2);
  s.form_factors.epsilon = 0.1;
  s.form_factors.perturbations = {fzeno::Polynomial({1.0}), fzeno::Polynomial({0.0, 0.0, 1.0})};
  const fzeno::DispersionTable t{fzeno::Model(s)};
  const auto m = t.moment_matrix(2);
  CHECK(m.divergent(1, 1));
  CHECK_FALSE(m.divergent(0, 0));
}
