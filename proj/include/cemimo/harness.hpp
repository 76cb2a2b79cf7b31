#pragma once

// Experiment orchestration: symbol-energy selection, minimum-power search
// for the CE precoder and the ZF reference, tau and antenna sweeps, CSV.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cemimo/precoder.hpp"
#include "cemimo/rate.hpp"

namespace cemimo {

inline constexpr const char* kVersion = "0.1.0";

struct ExperimentConfig {
  Index N = 32;
  Index M = 4;
  Index L = 2;
  Index tau = 6;
  Index T = 24;
  double target_rate_bpcu = 2.0;
  Index n_channels = 50;
  Index n_symbol_frames = 100;
  int n_iterations = 4;
  /// Initial E* candidates, strictly increasing. Re-centered on the winner
  /// at every power probe.
  std::vector<double> energy_grid;
  std::pair<double, double> power_bracket_db{-10.0, 20.0};
  std::uint64_t rng_seed = 1;
  Index n_subcarriers = 64;

  /// N=32, M=4, L=2, tau=3L, T=4 tau.
  static ExperimentConfig desk_scale();
  /// N=80, M=10, L=4, tau=3L, T=4 tau.
  static ExperimentConfig paper_scale();

  /// Throws on invalid values; returns non-fatal warnings.
  std::vector<std::string> validate() const;

  PrecoderConfig precoder() const;
};

/// 12 points spaced by 16^(1/11), spanning a factor of 16, on the lattice
/// of powers of that ratio, centered near N / (2M).
std::vector<double> default_energy_grid(Index N, Index M);

nlohmann::json to_json(const ExperimentConfig& config);
/// Fields absent from the document keep the values of `base`.
ExperimentConfig config_from_json(const nlohmann::json& doc, ExperimentConfig base = ExperimentConfig::desk_scale());

struct RunOptions {
  int threads = 1;
  std::ostream* log = nullptr;
};

/// Channel-averaged per-user CE rate as a function of (E*, P_T/sigma^2).
/// Covariance banks are cached per E*; the SNR only enters through the
/// diagonal shift, so every probe at an already-seen E* is cheap.
class CeRateOracle {
 public:
  CeRateOracle(ExperimentConfig config, RunOptions options, MuiModel<double> model = {});

  /// Mean over users and channels, with the standard error across channels.
  RateEstimate rate(double energy, double snr);

  const ExperimentConfig& config() const { return config_; }
  std::size_t banks_computed() const { return cache_.size(); }

 private:
  const CovarianceBank<double>& bank(double energy);

  ExperimentConfig config_;
  RunOptions options_;
  MuiModel<double> model_;
  std::map<long long, CovarianceBank<double>> cache_;
};

struct EnergyChoice {
  std::vector<double> grid;
  std::vector<double> rates;
  std::vector<double> standard_errors;
  double energy = 0;
  double rate = 0;
  double standard_error = 0;
};

/// Best E* over `grid` at P_T/sigma^2 = snr (linear), ties to the smaller
/// value. When the winner sits on an edge of a multi-point grid the grid is
/// shifted and re-evaluated (at most `max_shifts` times).
EnergyChoice best_symbol_energy(CeRateOracle& oracle, double snr, const std::vector<double>& grid,
                                int max_shifts = 3);

/// `grid` rescaled so that its middle element lands on `center`.
std::vector<double> recenter_grid(const std::vector<double>& grid, double center);

struct CePowerResult {
  double power_db = 0;
  double rate = 0;
  double rate_se = 0;
  double energy = 0;
  /// d rate / d dB at the returned point, with E* held fixed.
  double slope_bpcu_per_db = 0;
  /// rate_se / slope: the Monte-Carlo uncertainty expressed in dB.
  double power_se_db = 0;
  int probes = 0;
  EnergyChoice energy_choice;
};

inline constexpr double kCeRateTolerance = 0.02;
inline constexpr double kCePowerTolerance = 0.05;

/// Minimum P_T/sigma^2 (dB) at which the best-E* CE rate reaches the target.
CePowerResult ce_min_power(const ExperimentConfig& config, const RunOptions& options = {},
                           const MuiModel<double>& model = {});
CePowerResult ce_min_power(CeRateOracle& oracle);

/// One CSV row.
struct SweepRow {
  std::string sweep_var;
  Index L = 0;
  Index tau = 0;
  Index N = 0;
  Index M = 0;
  double E_star = 0;
  double ce_min_db = 0;
  double zf_min_db = 0;
  double gap_db = 0;
  double rate_se = 0;

  bool operator==(const SweepRow&) const = default;
};

/// A row plus diagnostics that do not go into the CSV.
struct SweepPoint {
  SweepRow row;
  CePowerResult ce;
  ExperimentConfig config;
};

SweepPoint run_point(const ExperimentConfig& config, const std::string& sweep_var, const RunOptions& options = {},
                     const MuiModel<double>& model = {});

/// One row per (L, tau). An empty `tau_list` means {L, 2L, 3L, 6L} for each
/// L. The frame length keeps config.T / config.tau blocks per frame.
std::vector<SweepPoint> sweep_tau(const ExperimentConfig& config, const std::vector<Index>& tau_list,
                                  const std::vector<Index>& L_list, const RunOptions& options = {});

/// One row per antenna count.
std::vector<SweepPoint> sweep_antennas(const ExperimentConfig& config, const std::vector<Index>& N_list,
                                       const RunOptions& options = {});

inline constexpr const char* kCsvHeader = "sweep_var,L,tau,N,M,E_star,ce_min_db,zf_min_db,gap_db,rate_se";

std::string to_csv(const std::vector<SweepRow>& rows, std::uint64_t seed);
std::vector<SweepRow> parse_csv(const std::string& text);
std::vector<SweepRow> rows_of(const std::vector<SweepPoint>& points);

}  // namespace cemimo
