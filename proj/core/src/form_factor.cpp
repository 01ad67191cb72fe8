#include "fzeno/form_factor.hpp"

#include <cmath>

#include "fzeno/errors.hpp"

namespace fzeno {

Polynomial::Polynomial(std::vector<double> coefficients) : c_(std::move(coefficients)) {
  while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
}

Polynomial Polynomial::constant(double c) { return Polynomial({c}); }

int Polynomial::degree() const { return static_cast<int>(c_.size()) - 1; }

double Polynomial::operator()(double x) const {
  double s = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) s = s * x + *it;
  return s;
}

cplx Polynomial::operator()(cplx z) const {
  cplx s = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) s = s * z + *it;
  return s;
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  std::vector<double> r(std::max(c_.size(), o.c_.size()), 0.0);
  for (size_t i = 0; i < c_.size(); ++i) r[i] += c_[i];
  for (size_t i = 0; i < o.c_.size(); ++i) r[i] += o.c_[i];
  return Polynomial(std::move(r));
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
  if (c_.empty() || o.c_.empty()) return {};
  std::vector<double> r(c_.size() + o.c_.size() - 1, 0.0);
  for (size_t i = 0; i < c_.size(); ++i)
    for (size_t j = 0; j < o.c_.size(); ++j) r[i + j] += c_[i] * o.c_[j];
  return Polynomial(std::move(r));
}

Polynomial Polynomial::operator*(double s) const {
  std::vector<double> r = c_;
  for (auto& v : r) v *= s;
  return Polynomial(std::move(r));
}

FormFactor FormFactor::canonical_sqrt() {
  FormFactor f;
  f.kind_ = FormFactorKind::CanonicalSqrt;
  return f;
}

FormFactor FormFactor::canonical_hydrogen() {
  FormFactor f;
  f.kind_ = FormFactorKind::CanonicalHydrogen;
  return f;
}

FormFactor FormFactor::custom(CustomProfile profile) {
  if (!profile.f2)
    throw Error(ErrorCode::InvalidModel, "FormFactor::custom", "squared profile callback missing");
  FormFactor f;
  f.kind_ = FormFactorKind::Custom;
  f.custom_ = std::move(profile);
  return f;
}

std::string FormFactor::name() const {
  switch (kind_) {
    case FormFactorKind::CanonicalSqrt: return "sqrt";
    case FormFactorKind::CanonicalHydrogen: return "hydrogen";
    case FormFactorKind::Custom: return custom_.name;
  }
  return "unknown";
}

double FormFactor::f2(double x) const {
  switch (kind_) {
    case FormFactorKind::CanonicalSqrt: return std::sqrt(x) / (1.0 + x);
    case FormFactorKind::CanonicalHydrogen: {
      const double d = 1.0 + x * x;
      const double d2 = d * d;
      return x / (d2 * d2);
    }
    case FormFactorKind::Custom: return custom_.f2(x);
  }
  return 0.0;
}

double FormFactor::f(double x) const { return std::sqrt(std::max(0.0, f2(x))); }

double FormFactor::df2(double x) const {
  switch (kind_) {
    case FormFactorKind::CanonicalSqrt: {
      const double d = 1.0 + x;
      return (1.0 - x) / (2.0 * std::sqrt(x) * d * d);
    }
    case FormFactorKind::CanonicalHydrogen: {
      const double d = 1.0 + x * x;
      const double d2 = d * d;
      return (1.0 - 7.0 * x * x) / (d2 * d2 * d);
    }
    case FormFactorKind::Custom: {
      if (custom_.f2_derivative) return custom_.f2_derivative(x);
      const double h = 1e-5 * std::max(1.0, std::abs(x));
      const double lo = std::max(0.0, x - h);
      return (custom_.f2(x + h) - custom_.f2(lo)) / (x + h - lo);
    }
  }
  return 0.0;
}

bool FormFactor::has_continuation() const {
  return kind_ != FormFactorKind::Custom || static_cast<bool>(custom_.f2_continued);
}

cplx FormFactor::f2(cplx z) const {
  switch (kind_) {
    case FormFactorKind::CanonicalSqrt: return std::sqrt(z) / (1.0 + z);
    case FormFactorKind::CanonicalHydrogen: {
      const cplx d = 1.0 + z * z;
      const cplx d2 = d * d;
      return z / (d2 * d2);
    }
    case FormFactorKind::Custom:
      if (!custom_.f2_continued)
        throw Error(ErrorCode::ContinuationUnavailable, "FormFactor::f2", custom_.name);
      return custom_.f2_continued(z);
  }
  return 0.0;
}

cplx FormFactor::df2(cplx z) const {
  switch (kind_) {
    case FormFactorKind::CanonicalSqrt: {
      const cplx d = 1.0 + z;
      return (1.0 - z) / (2.0 * std::sqrt(z) * d * d);
    }
    case FormFactorKind::CanonicalHydrogen: {
      const cplx d = 1.0 + z * z;
      const cplx d2 = d * d;
      return (1.0 - 7.0 * z * z) / (d2 * d2 * d);
    }
    case FormFactorKind::Custom: {
      if (custom_.f2_continued_derivative) return custom_.f2_continued_derivative(z);
      if (!custom_.f2_continued)
        throw Error(ErrorCode::ContinuationUnavailable, "FormFactor::df2", custom_.name);
      const double h = 1e-5 * std::max(1.0, std::abs(z));
      return (custom_.f2_continued(z + h) - custom_.f2_continued(z - h)) / (2.0 * h);
    }
  }
  return 0.0;
}

double FormFactor::tail_exponent() const {
  switch (kind_) {
    case FormFactorKind::CanonicalSqrt: return -0.5;
    case FormFactorKind::CanonicalHydrogen: return -7.0;
    case FormFactorKind::Custom: return custom_.tail_exponent;
  }
  return 0.0;
}

double FormFactor::tail_coefficient() const {
  switch (kind_) {
    case FormFactorKind::CanonicalSqrt:
    case FormFactorKind::CanonicalHydrogen: return 1.0;
    case FormFactorKind::Custom: return custom_.tail_coefficient;
  }
  return 0.0;
}


}  // namespace fzeno
