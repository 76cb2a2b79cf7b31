#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "cemimo/frames.hpp"
#include "cemimo/random.hpp"
#include "cemimo/types.hpp"

namespace cemimo {

/// Average power per channel tap, E[|h[l]|^2]. Entries sum to one.
struct PowerDelayProfile {
  std::vector<double> tap_powers;

  static PowerDelayProfile uniform(Index taps) {
    require(taps >= 1, "invalid_argument", "power delay profile needs at least one tap");
    return {std::vector<double>(static_cast<std::size_t>(taps), 1.0 / static_cast<double>(taps))};
  }

  Index taps() const { return static_cast<Index>(tap_powers.size()); }

  void validate() const {
    require(!tap_powers.empty(), "invalid_argument", "power delay profile is empty");
    for (double p : tap_powers)
      require(std::isfinite(p) && p >= 0, "invalid_argument", "tap powers must be nonnegative");
    const double total = std::accumulate(tap_powers.begin(), tap_powers.end(), 0.0);
    require(std::abs(total - 1.0) <= 1e-12, "invalid_argument",
            "power delay profile must sum to 1 (sums to " + std::to_string(total) + ")");
  }
};

/// Impulse responses h_{k,i}[l] between every antenna i and user k.
/// Stored tap-major: `tap(l)` is the M x N matrix of gains at delay l, so
/// `tap(0)` is the flat-fading channel matrix.
template <typename Real = double>
class ChannelTensor {
 public:
  ChannelTensor() = default;

  explicit ChannelTensor(std::vector<CMatrix<Real>> taps, std::uint64_t seed = 0,
                         PowerDelayProfile pdp = {})
      : taps_(std::move(taps)), seed_(seed), pdp_(std::move(pdp)) {
    require(!taps_.empty(), "invalid_argument", "channel needs at least one tap");
    const Index m = taps_.front().rows();
    const Index n = taps_.front().cols();
    require(m >= 1 && n >= 1, "invalid_argument", "channel needs N >= 1 and M >= 1");
    for (const auto& tap : taps_) {
      require(tap.rows() == m && tap.cols() == n, "dimension_mismatch",
              "all channel taps must share the same M x N shape");
      require(tap.allFinite(), "invalid_argument", "channel gains must be finite");
    }
  }

  Index n_antennas() const { return taps_.front().cols(); }
  Index n_users() const { return taps_.front().rows(); }
  Index n_taps() const { return static_cast<Index>(taps_.size()); }

  const CMatrix<Real>& tap(Index l) const { return taps_[static_cast<std::size_t>(l)]; }
  const std::vector<CMatrix<Real>>& taps() const { return taps_; }

  Complex<Real> operator()(Index k, Index i, Index l) const { return tap(l)(k, i); }

  std::uint64_t seed() const { return seed_; }
  const PowerDelayProfile& pdp() const { return pdp_; }

 private:
  std::vector<CMatrix<Real>> taps_;
  std::uint64_t seed_ = 0;
  PowerDelayProfile pdp_;
};

/// i.i.d. Rayleigh taps, h_{k,i}[l] ~ CN(0, pdp[l]). Draw order is
/// l-major, then antenna, then user.
template <typename Real = double>
ChannelTensor<Real> generate_channel(std::uint64_t seed, Index n_antennas, Index n_users,
                                     const PowerDelayProfile& pdp) {
  require(n_antennas >= 1 && n_users >= 1, "invalid_argument",
          "channel dimensions must satisfy N >= 1 and M >= 1");
  pdp.validate();
  Engine gen = make_engine(seed);
  std::vector<CMatrix<Real>> taps;
  taps.reserve(pdp.tap_powers.size());
  for (double power : pdp.tap_powers) {
    ComplexGaussian<Real> draw(power);
    CMatrix<Real> tap(n_users, n_antennas);
    for (Index i = 0; i < n_antennas; ++i)
      for (Index k = 0; k < n_users; ++k) tap(k, i) = draw(gen);
    taps.push_back(std::move(tap));
  }
  return ChannelTensor<Real>(std::move(taps), seed, pdp);
}

/// Channel number `index` of an experiment: uniform PDP, drawn from the
/// (channel, index) stream of `seed`.
template <typename Real = double>
ChannelTensor<Real> trial_channel(std::uint64_t seed, Index index, Index n_antennas, Index n_users, Index taps) {
  return generate_channel<Real>(derive_seed(seed, Stream::channel, static_cast<std::uint64_t>(index)),
                                n_antennas, n_users, PowerDelayProfile::uniform(taps));
}

/// sum_l tap(l) * x[t - l] for t in [0, T), with x[t] = 0 for t < 0.
/// `transmit` is N x T; the result is M x T.
template <typename Real, typename Derived>
CMatrix<Real> convolve(const ChannelTensor<Real>& channel, const Eigen::MatrixBase<Derived>& transmit) {
  require(transmit.rows() == channel.n_antennas(), "dimension_mismatch",
          "transmit frame has " + std::to_string(transmit.rows()) + " antennas, channel has " +
              std::to_string(channel.n_antennas()));
  const Index length = transmit.cols();
  CMatrix<Real> out = CMatrix<Real>::Zero(channel.n_users(), length);
  for (Index l = 0; l < channel.n_taps() && l < length; ++l)
    out.rightCols(length - l).noalias() += channel.tap(l) * transmit.leftCols(length - l);
  return out;
}

/// Received samples y_k[t], user-by-time.
template <typename Real = double>
struct ReceivedFrame {
  CMatrix<Real> samples;
};

/// Noise-free downlink: y_k[t] = sqrt(P_T/N) sum_i sum_l h_{k,i}[l] e^{j theta_i[t-l]}.
template <typename Real>
ReceivedFrame<Real> noise_free_receive(const ChannelTensor<Real>& channel,
                                       const PhaseFrame<Real>& phases, Real total_power) {
  require(total_power > 0, "invalid_argument", "total transmit power must be positive");
  require(phases.n_antennas() == channel.n_antennas(), "dimension_mismatch",
          "phase frame and channel disagree on the antenna count");
  const Real scale = std::sqrt(total_power / static_cast<Real>(channel.n_antennas()));
  return {scale * convolve(channel, phases.phasors())};
}

/// Adds i.i.d. CN(0, sigma2) noise to every sample.
template <typename Real>
ReceivedFrame<Real> add_awgn(ReceivedFrame<Real> frame, Real sigma2, std::uint64_t seed) {
  require(sigma2 >= 0 && std::isfinite(sigma2), "invalid_argument",
          "noise variance must be nonnegative");
  if (sigma2 == 0) return frame;
  Engine gen = make_engine(seed);
  ComplexGaussian<Real> draw(sigma2);
  for (Index t = 0; t < frame.samples.cols(); ++t)
    for (Index k = 0; k < frame.samples.rows(); ++k) frame.samples(k, t) += draw(gen);
  return frame;
}

}  // namespace cemimo
