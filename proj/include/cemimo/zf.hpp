#pragma once

// Zero-forcing reference under a total average power constraint.
//
// Flat channel H (M x N), unit-energy symbols, total power P_T and equal
// per-user SNR: every user sees SNR = (P_T/sigma^2) / trace((H H^H)^{-1}).
// Frequency-selective channels are handled per subcarrier of an ideal
// cyclic-prefix OFDM grid with equal power on each subcarrier.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "cemimo/channel.hpp"
#include "cemimo/parallel.hpp"
#include "cemimo/random.hpp"
#include "cemimo/search.hpp"
#include "cemimo/types.hpp"

namespace cemimo {

/// trace((H H^H)^{-1}) via the Cholesky factor: ||L^{-1}||_F^2.
template <typename Real>
Real zf_inverse_trace(const CMatrix<Real>& flat) {
  require(flat.rows() <= flat.cols(), "rank_deficient",
          "zero forcing needs M <= N (got M = " + std::to_string(flat.rows()) +
              ", N = " + std::to_string(flat.cols()) + ")");
  const CMatrix<Real> gram = flat * flat.adjoint();
  const Eigen::LLT<CMatrix<Real>> llt(gram);
  const auto diag = llt.matrixLLT().diagonal().real();
  const Real scale = gram.diagonal().real().maxCoeff();
  bool ok = llt.info() == Eigen::Success && scale > 0;
  for (Index i = 0; ok && i < diag.size(); ++i) ok = diag(i) * diag(i) > Real(1e-13) * scale;
  require(ok, "rank_deficient", "channel matrix is rank deficient; zero forcing undefined");
  const CMatrix<Real> inv_l =
      llt.matrixL().solve(CMatrix<Real>::Identity(gram.rows(), gram.cols()));
  return inv_l.squaredNorm();
}

template <typename Real>
Real zf_per_user_rate_flat(const CMatrix<Real>& flat, Real snr) {
  require(snr >= 0 && std::isfinite(snr), "invalid_argument", "P_T/sigma^2 must be nonnegative");
  return std::log2(Real(1) + snr / zf_inverse_trace(flat));
}

/// H(f) = sum_l h[l] e^{-j 2 pi f l / n_subcarriers}, one M x N matrix per f.
template <typename Real>
std::vector<CMatrix<Real>> frequency_response(const ChannelTensor<Real>& channel, Index n_subcarriers) {
  require(n_subcarriers >= channel.n_taps(), "invalid_argument",
          "need at least L subcarriers (got " + std::to_string(n_subcarriers) + ")");
  std::vector<CMatrix<Real>> out;
  out.reserve(static_cast<std::size_t>(n_subcarriers));
  for (Index f = 0; f < n_subcarriers; ++f) {
    CMatrix<Real> hf = channel.tap(0);
    for (Index l = 1; l < channel.n_taps(); ++l) {
      const Real angle = -2 * std::numbers::pi_v<Real> * static_cast<Real>((f * l) % n_subcarriers) /
                         static_cast<Real>(n_subcarriers);
      hf += std::polar(Real(1), angle) * channel.tap(l);
    }
    out.push_back(std::move(hf));
  }
  return out;
}

/// Per-subcarrier trace((H_f H_f^H)^{-1}); the ZF rate at any SNR follows.
template <typename Real>
std::vector<Real> zf_subcarrier_traces(const ChannelTensor<Real>& channel, Index n_subcarriers) {
  std::vector<Real> traces;
  for (const auto& hf : frequency_response(channel, n_subcarriers)) traces.push_back(zf_inverse_trace(hf));
  return traces;
}

template <typename Real>
Real zf_rate_from_traces(std::span<const Real> traces, Real snr) {
  Real sum = 0;
  for (Real tr : traces) sum += std::log2(Real(1) + snr / tr);
  return sum / static_cast<Real>(traces.size());
}

template <typename Real>
Real zf_per_user_rate_selective(const ChannelTensor<Real>& channel, Real snr, Index n_subcarriers) {
  require(snr >= 0 && std::isfinite(snr), "invalid_argument", "P_T/sigma^2 must be nonnegative");
  const auto traces = zf_subcarrier_traces(channel, n_subcarriers);
  return zf_rate_from_traces<Real>(traces, snr);
}

/// Channel-averaged ZF rate as a function of P_T/sigma^2 in dB.
template <typename Real = double>
class ZfErgodicRate {
 public:
  ZfErgodicRate(std::span<const ChannelTensor<Real>> channels, Index n_subcarriers) {
    require(!channels.empty(), "invalid_argument", "need at least one channel");
    for (const auto& ch : channels) traces_.push_back(zf_subcarrier_traces(ch, n_subcarriers));
  }

  Real operator()(Real snr_db) const {
    const Real snr = std::pow(Real(10), snr_db / 10);
    Real sum = 0;
    for (const auto& tr : traces_) sum += zf_rate_from_traces<Real>(tr, snr);
    return sum / static_cast<Real>(traces_.size());
  }

 private:
  std::vector<std::vector<Real>> traces_;
};

/// Minimum P_T/sigma^2 (dB) at which the channel-averaged ZF rate reaches
/// `target_rate`.
template <typename Real>
double zf_min_power(std::span<const ChannelTensor<Real>> channels, double target_rate, Index n_subcarriers) {
  require(target_rate > 0, "invalid_argument", "target rate must be positive");
  const ZfErgodicRate<Real> rate(channels, n_subcarriers);
  const auto f = [&](double db) { return static_cast<double>(rate(static_cast<Real>(db))); };
  const Bracket bracket = expand_bracket(f, target_rate, -10.0, 10.0, 10.0, 60.0);
  // Probes are cheap, so bisect far below the 0.01 bpcu rate tolerance.
  return bisect_min_power(f, target_rate, bracket, 0.0, 1e-6).power_db;
}

/// Same, over `n_channels` uniform-PDP Rayleigh channels drawn from the
/// channel streams of `seed` (the channels the CE rate estimate uses).
template <typename Real = double>
double zf_min_power(Index n_antennas, Index n_users, Index taps, double target_rate, Index n_channels,
                    std::uint64_t seed, Index n_subcarriers = 64, int threads = 1) {
  require(n_channels >= 1, "invalid_argument", "n_channels must be >= 1");
  std::vector<ChannelTensor<Real>> channels(static_cast<std::size_t>(n_channels));
  parallel_for(channels.size(), threads, [&](std::size_t c) {
    channels[c] = trial_channel<Real>(seed, static_cast<Index>(c), n_antennas, n_users, taps);
  });
  return zf_min_power<Real>(std::span<const ChannelTensor<Real>>(channels), target_rate,
                            std::max(n_subcarriers, taps));
}

}  // namespace cemimo
