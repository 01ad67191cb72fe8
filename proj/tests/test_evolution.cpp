#include <algorithm>

#include "doctest.h"
#include "fzeno/errors.hpp"
#include "fzeno/evolution.hpp"
#include "fzeno/oracle.hpp"
#include "fzeno/zeno.hpp"
#include "support.hpp"

using namespace fzeno;
using namespace fzeno::test;

namespace {

double td_of(const Setup& st, const InitialState& s) { return decay_time(st.engine.poles(), s, 1.0).t_d; }

}  // namespace

TEST_SUITE("evolution") {
  TEST_CASE("amplitude starts at one") {
    const Setup st(split(3, 0.01));
    std::mt19937 rng(2);
    for (int i = 0; i < 5; ++i) {
      const auto s = random_state(3, rng);
      const auto r = st.engine.survival(s, std::vector<double>{0.0});
      CHECK(std::abs(r.amplitude[0] - 1.0) < 1e-15);
    }
  }

  TEST_CASE("symmetric state reduces to one level with coupling lambda sqrt(N)") {
    for (int n : {2, 4, 9}) {
      const Setup many(desk(n, 0.01));
      const Setup one(desk(1, 0.01 * n));
      const auto sym = build_state(Eigen::VectorXcd::Ones(n));
      const auto s1 = build_state(Eigen::VectorXcd::Ones(1));
      const double td = td_of(one, s1);
      const auto grid = linspace(0.0, 20.0 * td, 400);
      const auto a = many.engine.survival(sym, grid);
      const auto b = one.engine.survival(s1, grid);
      double d = 0.0;
      for (size_t i = 0; i < grid.size(); ++i) d = std::max(d, std::abs(a.amplitude[i] - b.amplitude[i]));
      CHECK(d <= 1e-10);
    }
  }

  TEST_CASE("dark state does not decay") {
    const Setup st(desk(3));
    const auto dark = state_of({1.0, -1.0, 0.0});
    const auto bright = build_state(Eigen::VectorXcd::Ones(3));
    const auto grid = linspace(0.0, 10.0 * td_of(st, bright), 300);
    for (bool bg : {false, true}) {
      const auto r = survival_closed_form(st.kernel, dark, st.engine.poles(), grid, bg);
      CHECK(max_abs_diff(r.p, std::vector<double>(grid.size(), 1.0)) <= 1e-9);
    }
    const auto m = st.engine.survival(dark, grid);
    CHECK(max_abs_diff(m.p, std::vector<double>(grid.size(), 1.0)) <= 1e-9);
    CHECK_THROWS_AS(decay_time(st.engine.poles(), dark, 1.0), Error);
  }

  TEST_CASE("long-time asymptote") {
    for (double l2 : {1e-2, 1e-3}) {
      const int n = 3;
      const Setup st(desk(n, l2));
      std::mt19937 rng(29);
      for (int i = 0; i < 5; ++i) {
        const auto s = random_state(n, rng);
        const double t = 20.0 * td_of(st, s);
        const auto r = st.engine.survival(s, std::vector<double>{t});
        const double expect = std::pow(1.0 - s.alpha_hat_sq() / n, 2);
        CHECK(std::abs(r.p[0] - expect) <= 10.0 * l2);
        CHECK(*r.p_infinity == doctest::Approx(expect).scale(0.0).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("closed-form path against the general path") {
    std::mt19937 rng(8);
    SUBCASE("fully degenerate: exact pole weights") {
      const Setup st(desk(3));
      const auto s = random_state(3, rng);
      const auto grid = linspace(0.0, 5.0 * td_of(st, s), 200);
      const auto a = st.engine.survival(s, grid);
      const auto b = survival_closed_form(st.kernel, s, st.engine.poles(), grid, true);
      CHECK(max_abs_diff(a.p, b.p) < 1e-10);
    }
    // the background amplitude is |a|^2 lambda^2 |W'(z2)| at t = 0, so p moves by at most twice that
    auto background_bound = [](const Setup& st, const InitialState& s) {
      cplx wp = 0.0;
      for (const auto& p : st.engine.poles().poles)
        if (p.kind == PoleKind::Resonance) wp = st.table().W_prime(p.z(), Sheet::II);
      return 2.0 * s.alpha_hat_sq() * st.model().lambda_sq() * std::abs(wp);
    };
    SUBCASE("small split: leading-order weights, background sized error") {
      for (auto spec : {split(2, 1e-5), split(3, 1e-4)}) {
        const Setup st(spec);
        const auto s = random_state(spec.n_levels(), rng);
        const auto grid = linspace(0.0, 5.0 * td_of(st, s), 100);
        const auto a = st.engine.survival(s, grid);
        const auto b = survival_closed_form(st.kernel, s, st.engine.poles(), grid, false);
        CHECK(max_abs_diff(a.p, b.p) <= background_bound(st, s));
      }
    }
    SUBCASE("hydrogen parameters, fig1 preset states") {
      ModelSpec h = desk(3, 6.43e-9, 1.55e16 / 8.498e18);
      h.scale = 8.498e18;
      const Setup st(h);
      for (double a2 : {0.2, 1.0, 3.0}) {
        // sqrt(c) (1,1,1)/sqrt(3) + sqrt(1 - c) (1,-1,0)/sqrt(2), c = a2 / 3
        const double c = a2 / 3.0;
        const auto s = state_of({std::sqrt(c / 3.0) + std::sqrt((1.0 - c) / 2.0), std::sqrt(c / 3.0) - std::sqrt((1.0 - c) / 2.0),
                                 std::sqrt(c / 3.0)});
        REQUIRE(s.alpha_hat_sq() == doctest::Approx(a2).scale(0.0));
        const auto grid = linspace(0.0, 5.0 * decay_time(st.engine.poles(), s, h.scale).t_d, 100);
        const auto a = st.engine.survival(s, grid);
        const auto b = survival_closed_form(st.kernel, s, st.engine.poles(), grid, false);
        const double d = max_abs_diff(a.p, b.p);
        CHECK(d <= background_bound(st, s));
        if (a2 < 0.5) CHECK(d <= 5.0 * h.lambda_sq);
        const auto full = survival_closed_form(st.kernel, s, st.engine.poles(), grid, true);
        CHECK(max_abs_diff(a.p, full.p) < 1e-9);
      }
    }
    SUBCASE("bright state decays as a pure exponential") {
      const Setup st(desk(3));
      const auto s = build_state(Eigen::VectorXcd::Ones(3));
      const auto grid = linspace(0.0, 5.0 * td_of(st, s), 50);
      const auto b = survival_closed_form(st.kernel, s, st.engine.poles(), grid, false);
      const double rate = std::log(b.p[1] / b.p[0]) / grid[1];
      for (size_t i = 2; i < grid.size(); ++i) CHECK(std::log(b.p[i] / b.p[0]) == doctest::Approx(rate * grid[i]).scale(0.0).epsilon(1e-10));
      CHECK(-rate == doctest::Approx(1.0 / td_of(st, s)).scale(0.0).epsilon(1e-12));
    }
    SUBCASE("dark state of a split pair decays through the slow pole only") {
      const Setup st(split(2, 1e-4));
      const auto s = state_of({1.0, -1.0});
      const auto grid = linspace(0.0, 1e6, 20);
      const auto b = survival_closed_form(st.kernel, s, st.engine.poles(), grid, false);
      double slow = 0.0;
      for (const auto& p : st.engine.poles().poles)
        if (p.kind == PoleKind::Resonance && (slow == 0.0 || std::abs(p.offset.imag()) < slow)) slow = std::abs(p.offset.imag());
      for (size_t i = 0; i < grid.size(); ++i) CHECK(b.p[i] == doctest::Approx(std::exp(-2.0 * slow * grid[i])).scale(0.0).epsilon(1e-12));
    }
    ModelSpec s = desk(3);
    s.energies = {0.3, 0.5, 0.7};
    const ResolventKernel k{DispersionTable(Model(s))};
    CHECK_THROWS_AS(survival_closed_form(k, state_of({1.0, 1.0, 1.0}), solve_poles(k), std::vector<double>{1.0}, true),
                    Error);
  }

  TEST_CASE("oscillation frequency from the spectrum of p") {
    // x_bar = 2: |Re W| >> Im W, so several beat periods survive the decay
    const int n = 3;
    const Setup st(desk(n, 0.01, 2.0));
    const auto s = state_of({1.0, 0.5, 0.0});
    REQUIRE(s.alpha_hat_sq() > 0.1);
    REQUIRE(s.alpha_hat_sq() < n - 0.1);
    const auto probe = st.engine.survival(s, std::vector<double>{0.0});
    REQUIRE(probe.f_osc.has_value());
    const double f = std::abs(*probe.f_osc);
    const int m = 4096;
    const double window = 12.0 / f;
    std::vector<double> grid(m);
    for (int i = 0; i < m; ++i) grid[i] = window * i / m;
    const auto r = st.engine.survival(s, grid);
    double mean = 0.0;
    for (double p : r.p) mean += p / m;
    int best = 0;
    double peak = -1.0;
    for (int k = 1; k < m / 2; ++k) {
      cplx acc = 0.0;
      for (int i = 0; i < m; ++i) acc += (r.p[i] - mean) * std::polar(1.0, -2.0 * pi * k * i / m);
      if (std::abs(acc) > peak) {
        peak = std::abs(acc);
        best = k;
      }
    }
    const double bin = 1.0 / window;
    CHECK(std::abs(best * bin - f) <= bin);
  }

  TEST_CASE("decay rate of a pure exponential is constant") {
    SurvivalResult r;
    for (int i = 0; i < 50; ++i) {
      r.t.push_back(0.1 * i);
      r.p.push_back(std::exp(-2.0 * 0.7 * 0.1 * i));
    }
    const auto g = decay_rate_curve(r);
    CHECK(std::isnan(g[0]));
    for (size_t i = 1; i < g.size(); ++i) CHECK(g[i] == doctest::Approx(0.7).scale(0.0).epsilon(1e-12));
  }

  TEST_CASE("expm1 for complex arguments") {
    for (cplx w : {cplx(1e-10, 0.0), cplx(0.0, 1e-9), cplx(-3e-8, 2e-8), cplx(0.5, -0.3), cplx(-20.0, 4.0)}) {
      const std::complex<long double> wl(w.real(), w.imag());
      const std::complex<long double> ref =
          std::abs(w) < 1e-3 ? wl + wl * wl / 2.0L + wl * wl * wl / 6.0L : std::exp(wl) - 1.0L;
      const cplx e = cexpm1(w);
      CHECK(std::abs(std::complex<long double>(e.real(), e.imag()) - ref) <= 1e-15L * std::abs(ref));
    }
  }

  TEST_CASE("sum rule guards an incomplete pole set") {
    const ResolventKernel k{DispersionTable(Model(desk(2)))};
    auto ps = solve_poles(k);
    ps.poles.erase(std::remove_if(ps.poles.begin(), ps.poles.end(),
                                  [](const Pole& p) { return p.kind == PoleKind::Resonance; }),
                   ps.poles.end());
    try {
      SurvivalEngine e(k, ps);
      FAIL("no throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::IncompletePoleSet);
    }
  }

  TEST_CASE("sqrt family survival stays in [0, 1] and decays") {
    ModelSpec s = desk(2);
    s.form_factors.base = FormFactor::canonical_sqrt();
    const Setup st(s);
    const auto b = build_state(Eigen::VectorXcd::Ones(2));
    const double td = td_of(st, b);
    const auto r = st.engine.survival(b, linspace(0.0, 10.0 * td, 200));
    for (double p : r.p) {
      CHECK(p >= 0.0);
      CHECK(p <= 1.0 + 1e-12);
    }
    CHECK(r.p.back() < 1e-3);
  }
}
