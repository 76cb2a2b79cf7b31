#pragma once

// Achievable-rate lower bound for CE precoding with Gaussian inputs.
//
// With the precoder's residual (MUI) vector I_k over a frame of length T,
//   R_k = max(0, log2 E_k - log2 det(E[I_k I_k^H | H] + (sigma^2/P_T) I) / T)
// and the expectation over the symbols is replaced by a sample average over
// independently drawn symbol frames.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "cemimo/channel.hpp"
#include "cemimo/frames.hpp"
#include "cemimo/parallel.hpp"
#include "cemimo/precoder.hpp"
#include "cemimo/random.hpp"
#include "cemimo/types.hpp"

namespace cemimo {

/// I_k^u[t], user-by-time.
template <typename Real = double>
struct MuiFrame {
  CMatrix<Real> mui;
};

template <typename Real>
MuiFrame<Real> compute_mui(const ChannelTensor<Real>& channel, const PhaseFrame<Real>& phases,
                           const SymbolFrame<Real>& symbols) {
  return {residual_frame(channel, phases, symbols)};
}

/// Sample autocorrelation (1/n) sum_s I_k I_k^H of one user's MUI.
template <typename Real = double>
struct MuiCovariance {
  CMatrix<Real> matrix;
  Index n_samples = 0;
};

/// Produces the MUI frame for one symbol frame; the seed drives any
/// randomness the model needs (the precoder's initial angles).
template <typename Real>
using MuiModel =
    std::function<CMatrix<Real>(const ChannelTensor<Real>&, const SymbolFrame<Real>&, std::uint64_t)>;

/// The CE precoder's MUI. Tracing is switched off; only the angles matter.
template <typename Real>
MuiModel<Real> precoder_mui_model(PrecoderConfig config) {
  config.trace = TraceLevel::none;
  return [config](const ChannelTensor<Real>& channel, const SymbolFrame<Real>& symbols,
                  std::uint64_t seed) {
    PrecoderConfig local = config;
    local.rng_seed = seed;
    const auto result = precode_frame(channel, symbols, local);
    return compute_mui(channel, result.phases, symbols).mui;
  };
}

/// Draws `n_samples` Gaussian symbol frames, runs the model on each and
/// averages I_k I_k^H per user. Symbol frame s uses the streams
/// (symbols, stream_index, s) and (init, stream_index, s) of `seed`.
template <typename Real>
std::vector<MuiCovariance<Real>> estimate_mui_covariance(const ChannelTensor<Real>& channel,
                                                         const RVector<Real>& energies, Index length,
                                                         const MuiModel<Real>& model, Index n_samples,
                                                         std::uint64_t seed, std::uint64_t stream_index = 0) {
  require(n_samples >= 1, "invalid_argument", "n_samples must be >= 1");
  require(energies.size() == channel.n_users(), "dimension_mismatch",
          "energy vector length must equal the number of users");
  const Index users = channel.n_users();
  // Column s of stacked[k] is user k's MUI for symbol frame s.
  std::vector<CMatrix<Real>> stacked(static_cast<std::size_t>(users), CMatrix<Real>(length, n_samples));
  for (Index s = 0; s < n_samples; ++s) {
    const auto symbols = SymbolFrame<Real>::gaussian(
        energies, length, derive_seed(seed, Stream::symbols, stream_index, static_cast<std::uint64_t>(s)));
    const CMatrix<Real> mui =
        model(channel, symbols, derive_seed(seed, Stream::init, stream_index, static_cast<std::uint64_t>(s)));
    require(mui.rows() == users && mui.cols() == length, "dimension_mismatch",
            "MUI model returned a frame of the wrong shape");
    for (Index k = 0; k < users; ++k) stacked[static_cast<std::size_t>(k)].col(s) = mui.row(k).transpose();
  }

  std::vector<MuiCovariance<Real>> out;
  out.reserve(stacked.size());
  const Real inv_n = Real(1) / static_cast<Real>(n_samples);
  for (const auto& a : stacked) {
    CMatrix<Real> cov = CMatrix<Real>::Zero(length, length);
    cov.template selfadjointView<Eigen::Lower>().rankUpdate(a, inv_n);
    // Mirror the lower triangle so the stored matrix is exactly Hermitian.
    CMatrix<Real> full = cov.template selfadjointView<Eigen::Lower>();
    out.push_back({std::move(full), n_samples});
  }
  return out;
}

/// Natural log-determinant of a Hermitian positive-definite matrix from the
/// diagonal of its Cholesky factor.
template <typename Real>
Real log_det_hpd(const CMatrix<Real>& matrix) {
  const Eigen::LLT<CMatrix<Real>> llt(matrix);
  require(llt.info() == Eigen::Success, "factorization_failed",
          "Cholesky factorization failed: matrix is not positive definite");
  const auto diag = llt.matrixLLT().diagonal().real();
  Real sum = 0;
  for (Index i = 0; i < diag.size(); ++i) {
    require(diag(i) > 0, "factorization_failed", "Cholesky factor has a nonpositive pivot");
    sum += std::log(diag(i));
  }
  return 2 * sum;
}

/// R_k in bits per channel use, clamped at zero.
template <typename Real>
Real rate_lower_bound(const MuiCovariance<Real>& cov, Real energy, Real snr, Index length) {
  const CMatrix<Real>& c = cov.matrix;
  require(c.rows() == length && c.cols() == length, "dimension_mismatch",
          "covariance must be T x T");
  require(energy > 0, "invalid_argument", "symbol energy must be positive");
  require(snr > 0 && std::isfinite(snr), "invalid_argument", "P_T/sigma^2 must be positive and finite");
  const Real scale = std::max(Real(1), c.cwiseAbs().maxCoeff());
  require((c - c.adjoint()).cwiseAbs().maxCoeff() <= Real(1e-12) * scale, "not_hermitian",
          "MUI covariance is not Hermitian");

  CMatrix<Real> shifted = c;
  shifted.diagonal().array() += Real(1) / snr;
  const Real log2_det = log_det_hpd(shifted) / std::numbers::ln2_v<Real>;
  return std::max(Real(0), std::log2(energy) - log2_det / static_cast<Real>(length));
}

/// Per-channel MUI covariances for a set of independent channel draws.
/// Channel c is generated from the stream (channel, c) of the seed and its
/// symbol frames from (symbols, c, s), so the bank is identical for any
/// thread count and any symbol energies share the same underlying draws.
template <typename Real = double>
struct CovarianceBank {
  Index n_antennas = 0;
  Index n_users = 0;
  Index taps = 0;
  Index length = 0;
  Index n_samples = 0;
  RVector<Real> energies;
  std::vector<std::vector<MuiCovariance<Real>>> per_channel;
};

template <typename Real>
CovarianceBank<Real> estimate_covariance_bank(Index n_antennas, Index n_users, Index taps,
                                              const RVector<Real>& energies, Index length,
                                              const MuiModel<Real>& model, Index n_channels, Index n_samples,
                                              std::uint64_t seed, int threads = 1) {
  require(n_channels >= 1, "invalid_argument", "n_channels must be >= 1");
  CovarianceBank<Real> bank{n_antennas, n_users, taps, length, n_samples, energies, {}};
  bank.per_channel.resize(static_cast<std::size_t>(n_channels));
  parallel_for(static_cast<std::size_t>(n_channels), threads, [&](std::size_t c) {
    const auto channel = trial_channel<Real>(seed, static_cast<Index>(c), n_antennas, n_users, taps);
    bank.per_channel[c] =
        estimate_mui_covariance(channel, energies, length, model, n_samples, seed, static_cast<std::uint64_t>(c));
  });
  return bank;
}

struct RateEstimate {
  std::vector<double> per_user_rates;
  std::vector<double> standard_errors;
  /// Mean over users and channels, and the standard error of the
  /// per-channel user average.
  double mean_rate = 0;
  double mean_standard_error = 0;

  // Configuration echo.
  double snr = 0;
  std::vector<double> energies;
  Index n_antennas = 0;
  Index n_users = 0;
  Index taps = 0;
  Index length = 0;
  Index tau = 0;
  int n_iterations = 0;
  Index n_channels = 0;
  Index n_samples = 0;
  std::uint64_t seed = 0;
};

namespace detail {

inline void mean_and_se(const std::vector<double>& values, double& mean, double& se) {
  const auto n = static_cast<double>(values.size());
  mean = 0;
  for (double v : values) mean += v;
  mean /= n;
  double ss = 0;
  for (double v : values) ss += (v - mean) * (v - mean);
  se = values.size() > 1 ? std::sqrt(ss / (n - 1) / n) : 0.0;
}

}  // namespace detail

/// Channel-averaged R_k from a covariance bank at the given P_T/sigma^2.
template <typename Real>
RateEstimate ergodic_rate_from_bank(const CovarianceBank<Real>& bank, Real snr) {
  const auto users = static_cast<std::size_t>(bank.n_users);
  const std::size_t channels = bank.per_channel.size();
  std::vector<std::vector<double>> by_user(users, std::vector<double>(channels));
  std::vector<double> channel_means(channels, 0.0);
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t k = 0; k < users; ++k) {
      const double r = static_cast<double>(
          rate_lower_bound(bank.per_channel[c][k], bank.energies(static_cast<Index>(k)), snr, bank.length));
      by_user[k][c] = r;
      channel_means[c] += r / static_cast<double>(users);
    }
  }

  RateEstimate est;
  est.per_user_rates.resize(users);
  est.standard_errors.resize(users);
  for (std::size_t k = 0; k < users; ++k) detail::mean_and_se(by_user[k], est.per_user_rates[k], est.standard_errors[k]);
  detail::mean_and_se(channel_means, est.mean_rate, est.mean_standard_error);

  est.snr = static_cast<double>(snr);
  for (Index k = 0; k < bank.energies.size(); ++k) est.energies.push_back(static_cast<double>(bank.energies(k)));
  est.n_antennas = bank.n_antennas;
  est.n_users = bank.n_users;
  est.taps = bank.taps;
  est.length = bank.length;
  est.n_channels = static_cast<Index>(channels);
  est.n_samples = bank.n_samples;
  return est;
}

/// Ergodic per-user rate bound of the CE precoder over `n_channels`
/// uniform-PDP Rayleigh channels.
template <typename Real>
RateEstimate ergodic_rate(Index n_antennas, Index n_users, Index taps, const RVector<Real>& energies, Real snr,
                          Index length, const PrecoderConfig& config, Index n_channels, Index n_samples,
                          std::uint64_t seed, int threads = 1, const MuiModel<Real>& model = {}) {
  require(n_channels >= 2, "invalid_argument", "n_channels must be >= 2 for standard errors");
  const MuiModel<Real> active = model ? model : precoder_mui_model<Real>(config);
  const auto bank = estimate_covariance_bank(n_antennas, n_users, taps, energies, length, active, n_channels,
                                             n_samples, seed, threads);
  RateEstimate est = ergodic_rate_from_bank(bank, snr);
  est.tau = config.tau;
  est.n_iterations = config.n_iterations;
  est.seed = seed;
  return est;
}

}  // namespace cemimo
