#pragma once

#include <cstdint>
#include <numbers>
#include <random>
#include <string>

#include "cemimo/random.hpp"
#include "cemimo/types.hpp"

namespace cemimo {

/// Transmit phase angles theta_i[t], antenna-by-time, every entry in [-pi, pi).
/// Before the first column nothing is transmitted.
template <typename Real = double>
class PhaseFrame {
 public:
  PhaseFrame() = default;

  explicit PhaseFrame(RMatrix<Real> angles) : angles_(std::move(angles)) {
    for (Index t = 0; t < angles_.cols(); ++t) {
      for (Index i = 0; i < angles_.rows(); ++i) {
        const Real a = angles_(i, t);
        if (!(a >= -std::numbers::pi_v<Real> && a < std::numbers::pi_v<Real>))
          throw Error("invalid_argument", "phase angle outside [-pi, pi) at (" + std::to_string(i) +
                                              ", " + std::to_string(t) + ")");
      }
    }
  }

  static PhaseFrame zeros(Index n_antennas, Index length) {
    return PhaseFrame(RMatrix<Real>::Zero(n_antennas, length));
  }

  /// i.i.d. uniform on [-pi, pi).
  static PhaseFrame uniform(Index n_antennas, Index length, std::uint64_t seed) {
    Engine gen = make_engine(seed);
    std::uniform_real_distribution<double> dist(-std::numbers::pi, std::numbers::pi);
    RMatrix<Real> angles(n_antennas, length);
    for (Index t = 0; t < length; ++t)
      for (Index i = 0; i < n_antennas; ++i) angles(i, t) = wrap_angle(static_cast<Real>(dist(gen)));
    return PhaseFrame(std::move(angles));
  }

  Index n_antennas() const { return angles_.rows(); }
  Index length() const { return angles_.cols(); }

  Real operator()(Index i, Index t) const { return angles_(i, t); }
  void set(Index i, Index t, Real angle) { angles_(i, t) = wrap_angle(angle); }

  const RMatrix<Real>& angles() const { return angles_; }

  /// Unit phasors e^{j theta_i[t]}.
  CMatrix<Real> phasors() const {
    return angles_.unaryExpr([](Real a) { return std::polar(Real(1), a); });
  }

 private:
  RMatrix<Real> angles_;
};

/// Information symbols u_k[t] (user-by-time) with per-user energies E_k.
/// The desired noise-free received sample is sqrt(E_k) u_k[t].
template <typename Real = double>
class SymbolFrame {
 public:
  SymbolFrame() = default;

  SymbolFrame(CMatrix<Real> symbols, RVector<Real> energies)
      : symbols_(std::move(symbols)), energies_(std::move(energies)) {
    require(energies_.size() == symbols_.rows(), "dimension_mismatch",
            "energy vector length must equal the number of users");
    for (Index k = 0; k < energies_.size(); ++k)
      require(energies_(k) > 0 && std::isfinite(energies_(k)), "invalid_argument",
              "symbol energies must be strictly positive");
  }

  /// i.i.d. CN(0, 1) symbols.
  static SymbolFrame gaussian(RVector<Real> energies, Index length, std::uint64_t seed) {
    Engine gen = make_engine(seed);
    ComplexGaussian<Real> draw(1.0);
    CMatrix<Real> symbols(energies.size(), length);
    for (Index t = 0; t < length; ++t)
      for (Index k = 0; k < symbols.rows(); ++k) symbols(k, t) = draw(gen);
    return SymbolFrame(std::move(symbols), std::move(energies));
  }

  Index n_users() const { return symbols_.rows(); }
  Index length() const { return symbols_.cols(); }

  const CMatrix<Real>& symbols() const { return symbols_; }
  const RVector<Real>& energies() const { return energies_; }

  /// sqrt(E_k) u_k[t].
  CMatrix<Real> desired() const {
    return energies_.cwiseSqrt().template cast<Complex<Real>>().asDiagonal() * symbols_;
  }

 private:
  CMatrix<Real> symbols_;
  RVector<Real> energies_;
};

}  // namespace cemimo
