#include "fzeno/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <sstream>

namespace fzeno::quad {

namespace bq = boost::math::quadrature;

Rule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw Error(ErrorCode::InvalidModel, "gauss_legendre", "need at least one node");
  Rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const double xm = 0.5 * (b + a), xl = 0.5 * (b - a);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) < 1e-15) break;
    }
    r.nodes[i] = xm - xl * z;
    r.nodes[n - 1 - i] = xm + xl * z;
    r.weights[i] = 2.0 * xl / ((1.0 - z * z) * pp * pp);
    r.weights[n - 1 - i] = r.weights[i];
  }
  return r;
}

const KronrodPair& kronrod21() {
  static const KronrodPair pair = [] {
    KronrodPair p;
    const auto& ka = bq::gauss_kronrod<double, 21>::abscissa();
    const auto& kw = bq::gauss_kronrod<double, 21>::weights();
    const auto& gw = bq::gauss<double, 10>::weights();
    // boost stores the nonnegative half; index 0 is the centre for odd orders
    const int h = static_cast<int>(ka.size());
    for (int i = h - 1; i >= 1; --i) {
      p.nodes.push_back(-ka[i]);
      p.kronrod_weights.push_back(kw[i]);
      p.gauss_weights.push_back(i % 2 == 1 ? gw[(i - 1) / 2] : 0.0);
    }
    for (int i = 0; i < h; ++i) {
      p.nodes.push_back(ka[i]);
      p.kronrod_weights.push_back(kw[i]);
      p.gauss_weights.push_back(i % 2 == 1 ? gw[(i - 1) / 2] : 0.0);
    }
    return p;
  }();
  return pair;
}

namespace detail {

cplx adaptive(const void* ctx, cplx (*call)(const void*, double), double a, double b,
              const Tolerance& tol, const char* operation) {
  auto f = [ctx, call](double x) { return call(ctx, x); };
  double err = 0.0, l1 = 0.0;
  // the absolute floor becomes a relative target once the size of the integrand is known
  bq::gauss_kronrod<double, 61>::integrate(f, a, b, 0, tol.rel, &err, &l1);
  const double rel = l1 > 0.0 ? std::max(tol.rel, tol.abs / l1) : tol.rel;
  const cplx v = bq::gauss_kronrod<double, 61>::integrate(f, a, b, tol.max_depth, rel, &err, &l1);
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag()) || err > std::max(tol.abs, tol.rel * l1)) {
    std::ostringstream os;
    os.precision(3);
    os << "error estimate " << err << " on [" << a << ", " << b << "] exceeds tolerance (L1 " << l1 << ")";
    throw Error(ErrorCode::QuadratureFailure, operation, os.str());
  }
  return v;
}

}  // namespace detail
}  // namespace fzeno::quad
