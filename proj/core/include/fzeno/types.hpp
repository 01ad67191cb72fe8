#pragma once

#include <complex>
#include <numbers>

namespace fzeno {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

// Riemann sheet of the continued dispersion integral.
// Sheet I is the physical sheet (z on the positive real axis means the upper rim).
enum class Sheet { I, II };

}  // namespace fzeno
