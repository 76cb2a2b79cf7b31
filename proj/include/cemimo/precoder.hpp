#pragma once

// Constant-envelope precoder for frequency-selective channels.
//
// The frame objective
//
//   F(theta) = sum_t sum_k | (1/sqrt N) sum_i sum_l h_{k,i}[l] e^{j theta_i[t-l]} - sqrt(E_k) u_k[t] |^2
//
// is split into blocks of tau consecutive time instances. Block r is
// minimized over its own angles only, with the angles of earlier blocks held
// at their final values. Within a block the angles are visited cyclically
// (antenna-major inside each time instance, time instances in increasing
// order) and each is set to its exact one-dimensional minimizer.
//
// Residuals S(k,t) (noise-free received sample minus desired symbol) are
// computed once per block and then maintained incrementally: changing one
// angle theta_n[t1] only touches S(., t1 .. t1 + lookahead(t1)).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "cemimo/channel.hpp"
#include "cemimo/frames.hpp"
#include "cemimo/random.hpp"
#include "cemimo/types.hpp"

namespace cemimo {

enum class InitMode { uniform_random, zeros };

/// How much of the block objective history to keep.
enum class TraceLevel {
  none,          ///< initial and final value per block only
  iteration,     ///< one value per full iteration
  subiteration,  ///< one value per coordinate update
};

struct PrecoderConfig {
  Index tau = 1;
  int n_iterations = 4;
  InitMode init_mode = InitMode::uniform_random;
  std::uint64_t rng_seed = 0;
  TraceLevel trace = TraceLevel::subiteration;
};

/// Time span of block r (zero-based r and t): [begin, end), length d_r.
struct BlockBounds {
  Index begin = 0;
  Index end = 0;
  Index taps = 1;

  Index length() const { return end - begin; }

  /// L_r(t) = min(L - 1, last - t): how many later in-block samples an
  /// angle at time t reaches.
  Index lookahead(Index t) const { return std::min(taps - 1, end - 1 - t); }
};

inline Index block_count(Index length, Index tau) {
  require(length >= 1 && tau >= 1, "invalid_argument", "need T >= 1 and tau >= 1");
  return (length + tau - 1) / tau;
}

inline BlockBounds block_bounds(Index r, Index length, Index tau, Index taps) {
  require(taps >= 1, "invalid_argument", "need L >= 1");
  const Index blocks = block_count(length, tau);
  require(r >= 0 && r < blocks, "invalid_argument",
          "block index " + std::to_string(r) + " out of range [0, " + std::to_string(blocks) + ")");
  return {r * tau, std::min(length, (r + 1) * tau), taps};
}

/// Channel rearranged for the coordinate updates: column n*L + l holds the
/// M gains h_{., n}[l], so everything one antenna touches is contiguous.
template <typename Real = double>
class PackedChannel {
 public:
  explicit PackedChannel(const ChannelTensor<Real>& channel)
      : n_antennas_(channel.n_antennas()),
        n_users_(channel.n_users()),
        taps_(channel.n_taps()),
        gains_(channel.n_users(), channel.n_antennas() * channel.n_taps()),
        energy_prefix_(channel.n_taps(), channel.n_antennas()) {
    for (Index n = 0; n < n_antennas_; ++n) {
      Real running = 0;
      for (Index l = 0; l < taps_; ++l) {
        gains_.col(n * taps_ + l) = channel.tap(l).col(n);
        running += gains_.col(n * taps_ + l).squaredNorm();
        energy_prefix_(l, n) = running;
      }
    }
  }

  Index n_antennas() const { return n_antennas_; }
  Index n_users() const { return n_users_; }
  Index n_taps() const { return taps_; }

  auto gains(Index n, Index l) const { return gains_.col(n * taps_ + l); }

  /// Gains h_{., n}[0 .. count-1] as one contiguous vector of length M * count.
  auto gains_through(Index n, Index count) const {
    return Eigen::Map<const CVector<Real>>(gains_.col(n * taps_).data(), n_users_ * count);
  }

  /// sum_{l' <= l} sum_k |h_{k,n}[l']|^2.
  Real energy_through(Index n, Index l) const { return energy_prefix_(l, n); }

 private:
  Index n_antennas_;
  Index n_users_;
  Index taps_;
  CMatrix<Real> gains_;
  RMatrix<Real> energy_prefix_;
};

/// Residuals of the active block plus what the block inherits from the past.
template <typename Real = double>
struct ResidualState {
  Index block = 0;
  BlockBounds bounds;
  /// S(k, t) for t in [bounds.begin, bounds.end), column t - begin.
  CMatrix<Real> residuals;
  /// Phasors of the L - 1 instants before the block (oldest first); zero
  /// where nothing was transmitted yet.
  CMatrix<Real> carry;
  /// e^{j theta_i[t]} for the block's own angles, column t - begin.
  CMatrix<Real> phasors;
  /// Running sum of |S|^2 over the block, i.e. the block objective I_r.
  Real objective = 0;
};

/// Complex multiply-add counter for the coordinate updates.
struct OpCounter {
  std::uint64_t multiply_adds = 0;
};

struct BlockReport {
  Index block = 0;
  int iterations_used = 0;
  /// I_r before the first update followed by values at the chosen granularity.
  std::vector<double> objective_trace;
  double initial_objective = 0;
  double final_objective = 0;
  /// Multiply-adds spent by each full iteration of this block.
  std::vector<std::uint64_t> iteration_multiply_adds;
};

struct PrecoderReport {
  std::vector<BlockReport> blocks;
  double final_objective = 0;
  std::uint64_t multiply_adds = 0;
  std::vector<std::string> warnings;

  std::vector<double> objective_trace() const {
    std::vector<double> flat;
    for (const auto& b : blocks) flat.insert(flat.end(), b.objective_trace.begin(), b.objective_trace.end());
    return flat;
  }
};

namespace detail {

template <typename Real>
void check_frame_shapes(const ChannelTensor<Real>& channel, const PhaseFrame<Real>& phases,
                        const SymbolFrame<Real>& symbols) {
  require(phases.n_antennas() == channel.n_antennas(), "dimension_mismatch",
          "phase frame has " + std::to_string(phases.n_antennas()) + " antennas, channel has " +
              std::to_string(channel.n_antennas()));
  require(symbols.n_users() == channel.n_users(), "dimension_mismatch",
          "symbol frame has " + std::to_string(symbols.n_users()) + " users, channel has " +
              std::to_string(channel.n_users()));
  require(phases.length() == symbols.length(), "dimension_mismatch",
          "phase frame and symbol frame lengths differ");
}

}  // namespace detail

/// Noise-free received samples scaled by 1/sqrt(P_T) minus the desired
/// symbols: (1/sqrt N) sum_i sum_l h_{k,i}[l] e^{j theta_i[t-l]} - sqrt(E_k) u_k[t].
template <typename Real>
CMatrix<Real> residual_frame(const ChannelTensor<Real>& channel, const PhaseFrame<Real>& phases,
                             const SymbolFrame<Real>& symbols) {
  detail::check_frame_shapes(channel, phases, symbols);
  const Real inv_sqrt_n = Real(1) / std::sqrt(static_cast<Real>(channel.n_antennas()));
  return inv_sqrt_n * convolve(channel, phases.phasors()) - symbols.desired();
}

/// Frame objective F(theta); nonnegative.
template <typename Real>
Real evaluate_objective(const ChannelTensor<Real>& channel, const PhaseFrame<Real>& phases,
                        const SymbolFrame<Real>& symbols) {
  return residual_frame(channel, phases, symbols).squaredNorm();
}

/// I_r evaluated directly from the angles.
template <typename Real>
Real evaluate_block_objective(const ChannelTensor<Real>& channel, const PhaseFrame<Real>& phases,
                              const SymbolFrame<Real>& symbols, const BlockBounds& bounds) {
  const CMatrix<Real> residuals = residual_frame(channel, phases, symbols);
  return residuals.middleCols(bounds.begin, bounds.length()).squaredNorm();
}

/// Computes S(k, t) for block r from scratch. Angles before the block are
/// taken as final; angles inside it at their current values.
template <typename Real>
ResidualState<Real> init_residuals(const ChannelTensor<Real>& channel, const PhaseFrame<Real>& phases,
                                   const SymbolFrame<Real>& symbols, Index block, Index tau) {
  detail::check_frame_shapes(channel, phases, symbols);
  const Index taps = channel.n_taps();
  const BlockBounds bounds = block_bounds(block, phases.length(), tau, taps);

  // Phasors for [begin - (L-1), end), zero before the frame.
  const Index history = taps - 1;
  CMatrix<Real> local = CMatrix<Real>::Zero(channel.n_antennas(), history + bounds.length());
  for (Index c = 0; c < local.cols(); ++c) {
    const Index t = bounds.begin - history + c;
    if (t < 0) continue;
    for (Index i = 0; i < channel.n_antennas(); ++i) local(i, c) = std::polar(Real(1), phases(i, t));
  }

  ResidualState<Real> state;
  state.block = block;
  state.bounds = bounds;
  state.carry = local.leftCols(history);
  state.phasors = local.rightCols(bounds.length());
  state.residuals = CMatrix<Real>::Zero(channel.n_users(), bounds.length());
  for (Index l = 0; l < taps; ++l)
    state.residuals.noalias() += channel.tap(l) * local.middleCols(history - l, bounds.length());

  const Real inv_sqrt_n = Real(1) / std::sqrt(static_cast<Real>(channel.n_antennas()));
  state.residuals *= inv_sqrt_n;
  const RVector<Real> amplitude = symbols.energies().cwiseSqrt();
  for (Index c = 0; c < bounds.length(); ++c)
    state.residuals.col(c) -= amplitude.template cast<Complex<Real>>().cwiseProduct(
        symbols.symbols().col(bounds.begin + c));
  state.objective = state.residuals.squaredNorm();
  return state;
}

/// Sets theta_n[begin + q] to the exact minimizer of the block objective
/// over that single angle and updates the affected residuals. Returns the
/// new angle. When the objective is flat in that coordinate the angle is
/// kept.
template <typename Real>
Real update_angle(ResidualState<Real>& state, PhaseFrame<Real>& phases, const PackedChannel<Real>& channel,
                  Index n, Index q, OpCounter* ops = nullptr) {
  const BlockBounds& bounds = state.bounds;
  const Index t1 = bounds.begin + q;
  const Index horizon = bounds.lookahead(t1);
  const Real inv_sqrt_n = Real(1) / std::sqrt(static_cast<Real>(channel.n_antennas()));

  const Real old_angle = phases(n, t1);
  const Complex<Real> old_phasor = state.phasors(n, q);

  // Gains h_{., n}[0 .. horizon] and residuals S(., t1 .. t1 + horizon) are
  // both contiguous; walk them as interleaved (re, im) pairs.
  const Index len = channel.n_users() * (horizon + 1);
  const Real* g = reinterpret_cast<const Real*>(channel.gains_through(n, horizon + 1).data());
  Real* w = reinterpret_cast<Real*>(state.residuals.col(q).data());

  // sum_t sum_k conj(h_{k,n}[t-t1]) S_{n,t1}(k,t), where S_{n,t1} is S with
  // this angle's own contribution removed.
  Real acc_re = 0, acc_im = 0, before = 0;
#pragma omp simd reduction(+ : acc_re, acc_im, before)
  for (Index j = 0; j < 2 * len; j += 2) {
    acc_re += g[j] * w[j] + g[j + 1] * w[j + 1];
    acc_im += g[j] * w[j + 1] - g[j + 1] * w[j];
    before += w[j] * w[j] + w[j + 1] * w[j + 1];
  }
  const Complex<Real> acc =
      Complex<Real>(acc_re, acc_im) - old_phasor * (inv_sqrt_n * channel.energy_through(n, horizon));

  if (ops != nullptr) ops->multiply_adds += static_cast<std::uint64_t>(len);

  const Real magnitude = std::abs(acc);
  if (magnitude < Real(1e-300)) return old_angle;

  // e^{j(pi + arg acc)} = -acc / |acc|.
  const Complex<Real> new_phasor = -acc / magnitude;
  const Real new_angle = wrap_angle(std::numbers::pi_v<Real> + std::arg(acc));
  const Complex<Real> step = (new_phasor - old_phasor) * inv_sqrt_n;
  const Real step_re = step.real(), step_im = step.imag();
  Real after = 0;
#pragma omp simd reduction(+ : after)
  for (Index j = 0; j < 2 * len; j += 2) {
    w[j] += g[j] * step_re - g[j + 1] * step_im;
    w[j + 1] += g[j] * step_im + g[j + 1] * step_re;
    after += w[j] * w[j] + w[j + 1] * w[j + 1];
  }
  if (ops != nullptr) ops->multiply_adds += static_cast<std::uint64_t>(len);
  const Real delta = after - before;

  state.phasors(n, q) = new_phasor;
  state.objective += delta;
  phases.set(n, t1, new_angle);
  return new_angle;
}

/// Called after every coordinate update with (antenna, time, state, phases).
template <typename Real>
using UpdateObserver =
    std::function<void(Index, Index, const ResidualState<Real>&, const PhaseFrame<Real>&)>;

/// Runs config.n_iterations cyclic passes over block r. Earlier blocks must
/// already hold their final angles.
template <typename Real>
BlockReport optimize_block(const ChannelTensor<Real>& channel, const PackedChannel<Real>& packed,
                           const SymbolFrame<Real>& symbols, PhaseFrame<Real>& phases, Index block,
                           const PrecoderConfig& config, const UpdateObserver<Real>& observer = {}) {
  ResidualState<Real> state = init_residuals(channel, phases, symbols, block, config.tau);
  const BlockBounds bounds = state.bounds;

  BlockReport report;
  report.block = block;
  report.initial_objective = static_cast<double>(state.objective);
  report.objective_trace.push_back(report.initial_objective);

  for (int it = 0; it < config.n_iterations; ++it) {
    OpCounter ops;
    for (Index q = 0; q < bounds.length(); ++q) {
      for (Index n = 0; n < packed.n_antennas(); ++n) {
        update_angle(state, phases, packed, n, q, &ops);
        if (config.trace == TraceLevel::subiteration)
          report.objective_trace.push_back(static_cast<double>(state.objective));
        if (observer) observer(n, bounds.begin + q, state, phases);
      }
    }
    // The running objective accumulates rounding; resynchronize once per pass.
    state.objective = state.residuals.squaredNorm();
    if (config.trace == TraceLevel::iteration)
      report.objective_trace.push_back(static_cast<double>(state.objective));
    report.iteration_multiply_adds.push_back(ops.multiply_adds);
    ++report.iterations_used;
  }

  report.final_objective = static_cast<double>(state.objective);
  if (config.trace == TraceLevel::none) report.objective_trace.push_back(report.final_objective);
  return report;
}

template <typename Real = double>
struct PrecodeResult {
  PhaseFrame<Real> phases;
  PrecoderReport report;
};

/// Sequential block precoder starting from the given angles.
template <typename Real>
PrecodeResult<Real> precode_frame(const ChannelTensor<Real>& channel, const SymbolFrame<Real>& symbols,
                                  PhaseFrame<Real> initial, const PrecoderConfig& config,
                                  const UpdateObserver<Real>& observer = {}) {
  require(config.tau >= 1, "invalid_argument", "tau must be >= 1");
  require(config.n_iterations >= 1, "invalid_argument", "n_iterations must be >= 1");
  require(symbols.length() >= 1, "invalid_argument", "frame length must be >= 1");
  detail::check_frame_shapes(channel, initial, symbols);

  PrecodeResult<Real> result{std::move(initial), {}};
  if (config.tau < channel.n_taps())
    result.report.warnings.push_back("tau (" + std::to_string(config.tau) +
                                     ") is shorter than the channel length L (" +
                                     std::to_string(channel.n_taps()) +
                                     "); the O(NML) per-channel-use cost bound assumes tau >= L");

  const PackedChannel<Real> packed(channel);
  const Index blocks = block_count(symbols.length(), config.tau);
  double total = 0;
  for (Index r = 0; r < blocks; ++r) {
    BlockReport block = optimize_block(channel, packed, symbols, result.phases, r, config, observer);
    total += block.final_objective;
    for (auto ops : block.iteration_multiply_adds) result.report.multiply_adds += ops;
    result.report.blocks.push_back(std::move(block));
  }
  result.report.final_objective = total;
  return result;
}

/// Sequential block precoder with initial angles drawn per config.init_mode.
template <typename Real>
PrecodeResult<Real> precode_frame(const ChannelTensor<Real>& channel, const SymbolFrame<Real>& symbols,
                                  const PrecoderConfig& config, const UpdateObserver<Real>& observer = {}) {
  PhaseFrame<Real> initial = config.init_mode == InitMode::zeros
                                 ? PhaseFrame<Real>::zeros(channel.n_antennas(), symbols.length())
                                 : PhaseFrame<Real>::uniform(channel.n_antennas(), symbols.length(),
                                                             config.rng_seed);
  return precode_frame(channel, symbols, std::move(initial), config, observer);
}

/// x_i[t] = sqrt(P_T/N) e^{j theta_i[t]}.
template <typename Real>
CMatrix<Real> transmit_signal(const PhaseFrame<Real>& phases, Real total_power) {
  require(total_power > 0, "invalid_argument", "total transmit power must be positive");
  const Real amplitude = std::sqrt(total_power / static_cast<Real>(phases.n_antennas()));
  return phases.angles().unaryExpr([amplitude](Real a) { return std::polar(amplitude, a); });
}

}  // namespace cemimo
