#include "cemimo/harness.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "cemimo/zf.hpp"

namespace cemimo {

using nlohmann::json;

namespace {

const double kGridRatio = std::pow(16.0, 1.0 / 11.0);

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

long long energy_key(double energy) { return std::llround(std::log(energy) * 1e6); }

}  // namespace

std::vector<double> default_energy_grid(Index N, Index M) {
  const double guess = std::max(1.0, static_cast<double>(N) / (2.0 * static_cast<double>(M)));
  const long center = std::lround(std::log(guess) / std::log(kGridRatio));
  std::vector<double> grid;
  for (long j = center - 5; j <= center + 6; ++j) grid.push_back(std::pow(kGridRatio, static_cast<double>(j)));
  return grid;
}

ExperimentConfig ExperimentConfig::desk_scale() {
  ExperimentConfig c;
  c.energy_grid = default_energy_grid(c.N, c.M);
  return c;
}

ExperimentConfig ExperimentConfig::paper_scale() {
  ExperimentConfig c;
  c.N = 80;
  c.M = 10;
  c.L = 4;
  c.tau = 12;
  c.T = 48;
  c.energy_grid = default_energy_grid(c.N, c.M);
  return c;
}

std::vector<std::string> ExperimentConfig::validate() const {
  require(N >= 1 && M >= 1 && L >= 1 && tau >= 1 && T >= 1, "malformed_config",
          "N, M, L, tau and T must be positive");
  require(M <= N, "malformed_config", "need M <= N");
  require(target_rate_bpcu > 0, "malformed_config", "target_rate_bpcu must be positive");
  require(n_channels >= 2, "malformed_config", "n_channels must be >= 2");
  require(n_symbol_frames >= 1, "malformed_config", "n_symbol_frames must be >= 1");
  require(n_iterations >= 1, "malformed_config", "n_iterations must be >= 1");
  require(!energy_grid.empty(), "malformed_config", "energy_grid must not be empty");
  for (std::size_t i = 0; i < energy_grid.size(); ++i) {
    require(energy_grid[i] > 0 && std::isfinite(energy_grid[i]), "malformed_config",
            "energy_grid values must be positive");
    require(i == 0 || energy_grid[i] > energy_grid[i - 1], "malformed_config",
            "energy_grid must be strictly increasing");
  }
  require(power_bracket_db.first < power_bracket_db.second, "malformed_config",
          "power_bracket_db must be [low, high] with low < high");
  require(n_subcarriers >= L, "malformed_config", "n_subcarriers must be >= L");

  std::vector<std::string> warnings;
  if (T % tau != 0)
    warnings.push_back("T (" + std::to_string(T) + ") is not a multiple of tau (" + std::to_string(tau) + ")");
  if (tau < L)
    warnings.push_back("tau (" + std::to_string(tau) + ") is shorter than L (" + std::to_string(L) + ")");
  // Fewer symbol frames than T leave the sample covariance rank deficient;
  // the bound then keeps growing with E*.
  if (n_symbol_frames < T)
    warnings.push_back("n_symbol_frames (" + std::to_string(n_symbol_frames) + ") is below T (" +
                       std::to_string(T) + "); the rate estimate is biased upward at large E*");
  return warnings;
}

PrecoderConfig ExperimentConfig::precoder() const {
  PrecoderConfig p;
  p.tau = tau;
  p.n_iterations = n_iterations;
  p.init_mode = InitMode::uniform_random;
  p.trace = TraceLevel::none;
  return p;
}

json to_json(const ExperimentConfig& c) {
  return {{"N", c.N},
          {"M", c.M},
          {"L", c.L},
          {"tau", c.tau},
          {"T", c.T},
          {"target_rate_bpcu", c.target_rate_bpcu},
          {"n_channels", c.n_channels},
          {"n_symbol_frames", c.n_symbol_frames},
          {"n_iterations", c.n_iterations},
          {"energy_grid", c.energy_grid},
          {"power_bracket_db", {c.power_bracket_db.first, c.power_bracket_db.second}},
          {"rng_seed", c.rng_seed},
          {"n_subcarriers", c.n_subcarriers}};
}

ExperimentConfig config_from_json(const json& doc, ExperimentConfig base) {
  require(doc.is_object(), "malformed_config", "config must be a JSON object");
  static const std::vector<std::string> known{"N",          "M",          "L",           "tau",
                                              "T",          "target_rate_bpcu",           "n_channels",
                                              "n_symbol_frames",          "n_iterations", "energy_grid",
                                              "power_bracket_db",         "rng_seed",     "n_subcarriers"};
  for (const auto& [key, value] : doc.items())
    require(std::find(known.begin(), known.end(), key) != known.end(), "malformed_config",
            "unknown config field '" + key + "'");
  try {
    const bool dims_changed = doc.contains("N") || doc.contains("M");
    if (doc.contains("N")) base.N = doc["N"].get<Index>();
    if (doc.contains("M")) base.M = doc["M"].get<Index>();
    if (doc.contains("L")) base.L = doc["L"].get<Index>();
    if (doc.contains("tau")) base.tau = doc["tau"].get<Index>();
    if (doc.contains("T")) base.T = doc["T"].get<Index>();
    if (doc.contains("target_rate_bpcu")) base.target_rate_bpcu = doc["target_rate_bpcu"].get<double>();
    if (doc.contains("n_channels")) base.n_channels = doc["n_channels"].get<Index>();
    if (doc.contains("n_symbol_frames")) base.n_symbol_frames = doc["n_symbol_frames"].get<Index>();
    if (doc.contains("n_iterations")) base.n_iterations = doc["n_iterations"].get<int>();
    if (doc.contains("energy_grid"))
      base.energy_grid = doc["energy_grid"].get<std::vector<double>>();
    else if (dims_changed)
      base.energy_grid = default_energy_grid(base.N, base.M);
    if (doc.contains("power_bracket_db")) {
      const auto b = doc["power_bracket_db"].get<std::vector<double>>();
      require(b.size() == 2, "malformed_config", "power_bracket_db must have two entries");
      base.power_bracket_db = {b[0], b[1]};
    }
    if (doc.contains("rng_seed")) base.rng_seed = doc["rng_seed"].get<std::uint64_t>();
    if (doc.contains("n_subcarriers")) base.n_subcarriers = doc["n_subcarriers"].get<Index>();
  } catch (const json::exception& ex) {
    throw Error("malformed_config", std::string("bad config value: ") + ex.what());
  }
  base.validate();
  return base;
}

CeRateOracle::CeRateOracle(ExperimentConfig config, RunOptions options, MuiModel<double> model)
    : config_(std::move(config)), options_(options), model_(std::move(model)) {
  config_.validate();
  if (!model_) model_ = precoder_mui_model<double>(config_.precoder());
}

const CovarianceBank<double>& CeRateOracle::bank(double energy) {
  const long long key = energy_key(energy);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  if (options_.log != nullptr)
    *options_.log << "  [N=" << config_.N << " L=" << config_.L << " tau=" << config_.tau
                  << "] Monte-Carlo covariances at E*=" << energy << "\n"
                  << std::flush;
  const RVector<double> energies = RVector<double>::Constant(config_.M, energy);
  auto bank = estimate_covariance_bank(config_.N, config_.M, config_.L, energies, config_.T, model_,
                                       config_.n_channels, config_.n_symbol_frames, config_.rng_seed,
                                       options_.threads);
  return cache_.emplace(key, std::move(bank)).first->second;
}

RateEstimate CeRateOracle::rate(double energy, double snr) {
  RateEstimate est = ergodic_rate_from_bank(bank(energy), snr);
  est.tau = config_.tau;
  est.n_iterations = config_.n_iterations;
  est.seed = config_.rng_seed;
  return est;
}

std::vector<double> recenter_grid(const std::vector<double>& grid, double center) {
  const double mid = grid[(grid.size() - 1) / 2];
  std::vector<double> out;
  out.reserve(grid.size());
  for (double g : grid) out.push_back(center * (g / mid));
  return out;
}

EnergyChoice best_symbol_energy(CeRateOracle& oracle, double snr, const std::vector<double>& grid, int max_shifts) {
  require(!grid.empty(), "invalid_argument", "energy grid must not be empty");
  EnergyChoice choice;
  choice.grid = grid;
  for (int shift = 0;; ++shift) {
    choice.rates.clear();
    choice.standard_errors.clear();
    std::size_t best = 0;
    for (std::size_t i = 0; i < choice.grid.size(); ++i) {
      const RateEstimate est = oracle.rate(choice.grid[i], snr);
      choice.rates.push_back(est.mean_rate);
      choice.standard_errors.push_back(est.mean_standard_error);
      // Strict improvement only: ties stay with the smaller energy.
      if (choice.rates[i] > choice.rates[best]) best = i;
    }
    choice.energy = choice.grid[best];
    choice.rate = choice.rates[best];
    choice.standard_error = choice.standard_errors[best];

    const bool on_edge = choice.grid.size() > 1 && (best == 0 || best + 1 == choice.grid.size());
    // At the lowest edge with a zero rate everywhere there is nothing to chase.
    const bool all_zero = choice.rate <= 0;
    if (!on_edge || all_zero || shift >= max_shifts) return choice;
    choice.grid = recenter_grid(choice.grid, choice.energy);
  }
}

CePowerResult ce_min_power(CeRateOracle& oracle) {
  const ExperimentConfig& config = oracle.config();
  const double target = config.target_rate_bpcu;
  std::vector<double> grid = config.energy_grid;
  EnergyChoice last;
  int probes = 0;

  auto probe = [&](double db) {
    last = best_symbol_energy(oracle, db_to_linear(db), grid);
    ++probes;
    return last.rate;
  };
  // Bracket ends are evaluated on the configured grid; bisection probes
  // then follow the winner.
  auto rate_at_edge = [&](double db) {
    grid = config.energy_grid;
    return probe(db);
  };

  const Bracket bracket =
      fixed_bracket(rate_at_edge, target, config.power_bracket_db.first, config.power_bracket_db.second);
  grid = config.energy_grid;
  std::map<double, EnergyChoice> seen;
  auto bisect_probe = [&](double db) {
    const double r = probe(db);
    seen[db] = last;
    if (r > 0) grid = recenter_grid(grid, last.energy);
    return r;
  };
  const PowerSearchResult found = bisect_min_power(bisect_probe, target, bracket, kCeRateTolerance, kCePowerTolerance);

  CePowerResult result;
  result.power_db = found.power_db;
  result.probes = probes;
  auto hit = seen.find(found.power_db);
  result.energy_choice = hit != seen.end() ? hit->second : best_symbol_energy(oracle, db_to_linear(found.power_db), grid);
  result.energy = result.energy_choice.energy;
  result.rate = result.energy_choice.rate;
  result.rate_se = result.energy_choice.standard_error;

  const double h = 0.25;
  const double up = oracle.rate(result.energy, db_to_linear(found.power_db + h)).mean_rate;
  const double down = oracle.rate(result.energy, db_to_linear(found.power_db - h)).mean_rate;
  result.slope_bpcu_per_db = (up - down) / (2 * h);
  result.power_se_db = result.slope_bpcu_per_db > 0 ? result.rate_se / result.slope_bpcu_per_db : 0.0;
  return result;
}

CePowerResult ce_min_power(const ExperimentConfig& config, const RunOptions& options, const MuiModel<double>& model) {
  CeRateOracle oracle(config, options, model);
  return ce_min_power(oracle);
}

SweepPoint run_point(const ExperimentConfig& config, const std::string& sweep_var, const RunOptions& options,
                     const MuiModel<double>& model) {
  SweepPoint point;
  point.config = config;
  point.ce = ce_min_power(config, options, model);
  const double zf = zf_min_power<double>(config.N, config.M, config.L, config.target_rate_bpcu, config.n_channels,
                                         config.rng_seed, config.n_subcarriers, options.threads);
  point.row = {sweep_var,
               config.L,
               config.tau,
               config.N,
               config.M,
               point.ce.energy,
               point.ce.power_db,
               zf,
               point.ce.power_db - zf,
               point.ce.rate_se};
  if (options.log != nullptr)
    *options.log << "point " << sweep_var << ": N=" << config.N << " M=" << config.M << " L=" << config.L
                 << " tau=" << config.tau << " T=" << config.T << " -> CE " << point.ce.power_db << " dB (E*="
                 << point.ce.energy << ", se " << point.ce.power_se_db << " dB), ZF " << zf << " dB\n"
                 << std::flush;
  return point;
}

std::vector<SweepPoint> sweep_tau(const ExperimentConfig& config, const std::vector<Index>& tau_list,
                                  const std::vector<Index>& L_list, const RunOptions& options) {
  config.validate();
  require(!L_list.empty(), "invalid_argument", "L list must not be empty");
  const Index blocks_per_frame = std::max<Index>(1, config.T / config.tau);
  std::vector<SweepPoint> points;
  for (Index L : L_list) {
    const std::vector<Index> taus = tau_list.empty() ? std::vector<Index>{L, 2 * L, 3 * L, 6 * L} : tau_list;
    for (Index tau : taus) {
      ExperimentConfig c = config;
      c.L = L;
      c.tau = tau;
      c.T = blocks_per_frame * tau;
      c.n_subcarriers = std::max(c.n_subcarriers, L);
      points.push_back(run_point(c, "tau", options));
    }
  }
  return points;
}

std::vector<SweepPoint> sweep_antennas(const ExperimentConfig& config, const std::vector<Index>& N_list,
                                       const RunOptions& options) {
  config.validate();
  require(!N_list.empty(), "invalid_argument", "N list must not be empty");
  std::vector<SweepPoint> points;
  for (Index n : N_list) {
    ExperimentConfig c = config;
    c.N = n;
    if (config.energy_grid == default_energy_grid(config.N, config.M)) c.energy_grid = default_energy_grid(n, c.M);
    points.push_back(run_point(c, "N", options));
  }
  return points;
}

std::vector<SweepRow> rows_of(const std::vector<SweepPoint>& points) {
  std::vector<SweepRow> rows;
  for (const auto& p : points) rows.push_back(p.row);
  return rows;
}

}  // namespace cemimo
