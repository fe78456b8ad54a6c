#pragma once

#include <complex>
#include <functional>

#include <Eigen/Dense>

namespace ddctmc {

using cplx = std::complex<double>;

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Univariate and bivariate functions of log-price, used for payoffs and killing rates.
using Fn1 = std::function<cplx(double)>;
using Fn2 = std::function<cplx(double, double)>;

// Absolute tolerance when comparing grid levels (grid values carry rounding from x0 + k*h).
inline constexpr double kLevelTol = 1e-10;

// Residual bound for every linear solve, relative to the matrix and solution scale.
inline constexpr double kResidualTol = 1e-10;

template <typename Scalar>
inline Scalar from_cplx(cplx z)
{
  if constexpr (std::is_same_v<Scalar, double>) {
    return z.real();
  } else {
    return z;
  }
}

} // namespace ddctmc
