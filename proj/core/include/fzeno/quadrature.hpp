#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "fzeno/errors.hpp"
#include "fzeno/types.hpp"

namespace fzeno::quad {

// accept when error <= max(abs, rel * L1 norm)
struct Tolerance {
  double abs = 1e-12;
  double rel = 1e-10;
  int max_depth = 15;
};

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// n-point Gauss-Legendre rule on [a, b]
Rule gauss_legendre(int n, double a, double b);

// Embedded 21-point Kronrod / 10-point Gauss pair on [-1, 1].
// gauss_weights[i] is nonzero only at the Gauss abscissae (odd indices).
struct KronrodPair {
  std::vector<double> nodes;
  std::vector<double> kronrod_weights;
  std::vector<double> gauss_weights;
};
const KronrodPair& kronrod21();

namespace detail {
cplx adaptive(const void* ctx, cplx (*call)(const void*, double), double a, double b,
              const Tolerance& tol, const char* operation);
}

// adaptive Gauss-Kronrod on a finite interval, complex integrand
template <class F>
cplx integrate(const F& f, double a, double b, const Tolerance& tol, const char* operation) {
  auto call = [](const void* ctx, double x) -> cplx {
    return cplx((*static_cast<const F*>(ctx))(x));
  };
  return detail::adaptive(&f, call, a, b, tol, operation);
}

// int_0^X f(x) dx through x = u^2, which removes sqrt-type endpoint behaviour
template <class F>
cplx integrate_origin(const F& f, double X, const Tolerance& tol, const char* operation) {
  auto g = [&f](double u) -> cplx { return cplx(f(u * u)) * (2.0 * u); };
  return integrate(g, 0.0, std::sqrt(X), tol, operation);
}

// as integrate_origin, with breakpoints at feature * 16^k so that structure on the
// scale of a small `feature` is resolved
template <class F>
cplx integrate_origin_graded(const F& f, double X, double feature, const Tolerance& tol,
                             const char* operation) {
  auto g = [&f](double u) -> cplx { return cplx(f(u * u)) * (2.0 * u); };
  if (!(feature > 0.0) || feature >= X / 16.0) return integrate(g, 0.0, std::sqrt(X), tol, operation);
  cplx acc = 0.0;
  double a = 0.0;
  for (double b = 4.0 * feature; a < X; b *= 16.0) {
    const double hi = std::min(b, X);
    acc += integrate(g, std::sqrt(a), std::sqrt(hi), tol, operation);
    a = hi;
  }
  return acc;
}

// int_X^inf f(x) dx through x = X / s^2
template <class F>
cplx integrate_tail(const F& f, double X, const Tolerance& tol, const char* operation) {
  auto g = [&f, X](double s) -> cplx {
    if (s <= 0.0) return 0.0;
    const double x = X / (s * s);
    return cplx(f(x)) * (2.0 * x / s);
  };
  return integrate(g, 0.0, 1.0, tol, operation);
}

// int_0^inf split at X
template <class F>
cplx integrate_half_line(const F& f, double X, const Tolerance& tol, const char* operation) {
  return integrate_origin(f, X, tol, operation) + integrate_tail(f, X, tol, operation);
}

}  // namespace fzeno::quad
