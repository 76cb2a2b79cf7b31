#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace cemimo {

using Index = Eigen::Index;

template <typename Real>
using Complex = std::complex<Real>;

template <typename Real>
using CMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Real>
using CVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

template <typename Real>
using RMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Real>
using RVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

/// Library error. `code()` is a stable, machine-readable identifier
/// (e.g. "dimension_mismatch", "unreachable_target").
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

inline void require(bool condition, const char* code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

/// Reduces an angle into [-pi, pi).
template <typename Real>
Real wrap_angle(Real angle) {
  constexpr Real pi = std::numbers::pi_v<Real>;
  constexpr Real two_pi = 2 * std::numbers::pi_v<Real>;
  Real wrapped = angle - two_pi * std::floor((angle + pi) / two_pi);
  // floor() rounding can land exactly on the open end.
  if (wrapped >= pi) wrapped -= two_pi;
  if (wrapped < -pi) wrapped = -pi;
  return wrapped;
}

}  // namespace cemimo
