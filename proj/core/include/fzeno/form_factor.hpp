#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fzeno/types.hpp"

namespace fzeno {

// Dense real polynomial, coefficients in increasing degree.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coefficients);
  static Polynomial constant(double c);

  const std::vector<double>& coefficients() const { return c_; }
  // -1 for the zero polynomial
  int degree() const;
  bool is_zero() const { return degree() < 0; }
  double coefficient(int j) const { return j < static_cast<int>(c_.size()) ? c_[j] : 0.0; }

  double operator()(double x) const;
  cplx operator()(cplx z) const;

  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial operator*(double s) const;

 private:
  std::vector<double> c_;
};

enum class FormFactorKind { CanonicalSqrt, CanonicalHydrogen, Custom };

// User-supplied squared form factor. The tail law f^2 ~ C x^a at infinity is required so
// that moment divergence can be decided without integrating.
struct CustomProfile {
  std::string name = "custom";
  std::function<double(double)> f2;
  std::function<double(double)> f2_derivative;         // optional, finite differences otherwise
  std::function<cplx(cplx)> f2_continued;              // optional
  std::function<cplx(cplx)> f2_continued_derivative;   // optional
  double tail_exponent = 0.0;
  double tail_coefficient = 0.0;
};

// The base shape f(x) >= 0 on [0, inf), handled through f^2 and its continuation.
class FormFactor {
 public:
  static FormFactor canonical_sqrt();
  static FormFactor canonical_hydrogen();
  static FormFactor custom(CustomProfile profile);

  FormFactorKind kind() const { return kind_; }
  std::string name() const;

  double f2(double x) const;
  double f(double x) const;
  double df2(double x) const;

  bool has_continuation() const;
  // throw ContinuationUnavailable for custom profiles without a continuation
  cplx f2(cplx z) const;
  cplx df2(cplx z) const;

  double tail_exponent() const;
  double tail_coefficient() const;
  double f2_at_zero() const { return f2(0.0); }


 private:
  FormFactorKind kind_ = FormFactorKind::CanonicalHydrogen;
  CustomProfile custom_;
};

}  // namespace fzeno
