// ce-precode: command-line front end to the cemimo library.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cemimo/channel.hpp"
#include "cemimo/container.hpp"
#include "cemimo/harness.hpp"
#include "cemimo/parallel.hpp"
#include "cemimo/precoder.hpp"
#include "cemimo/rate.hpp"

using namespace cemimo;
using nlohmann::json;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string config_path;
  std::string out;
  std::optional<int> threads;
  bool paper_scale = false;
  bool verbose = false;
};

void emit_error(const std::string& code, const std::string& message) {
  std::cerr << json{{"error", code}, {"message", message}}.dump() << "\n";
}

ExperimentConfig load_config(const Globals& g) {
  ExperimentConfig config = g.paper_scale ? ExperimentConfig::paper_scale() : ExperimentConfig::desk_scale();
  if (!g.config_path.empty()) config = config_from_json(read_json_file(g.config_path), config);
  if (g.seed) config.rng_seed = *g.seed;
  for (const auto& w : config.validate()) std::cerr << "warning: " << w << "\n";
  return config;
}

void write_output(const Globals& g, const std::string& text) {
  if (g.out.empty() || g.out == "-")
    std::cout << text << std::flush;
  else
    write_text_file(g.out, text);
}

RunOptions run_options(const Globals& g) {
  RunOptions options;
  options.threads = resolve_threads(g.threads);
  options.log = g.verbose ? &std::cerr : nullptr;
  return options;
}

ChannelTensor<double> channel_for(const ExperimentConfig& config, const std::string& path, Index index) {
  if (!path.empty()) return channel_from_json(read_json_file(path));
  return trial_channel<double>(config.rng_seed, index, config.N, config.M, config.L);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constant-envelope multi-user precoding for frequency-selective massive MIMO"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Globals g;
  app.add_option("--seed", g.seed, "Master RNG seed (overrides rng_seed from the config)");
  app.add_option("--config", g.config_path, "JSON experiment config")->check(CLI::ExistingFile);
  app.add_option("--out", g.out, "Output path (default: stdout)");
  app.add_option("--threads", g.threads, "Worker threads (fallback: CE_PRECODE_THREADS, then 1)")
      ->check(CLI::PositiveNumber);
  app.add_flag("--paper-scale", g.paper_scale, "Start from N=80, M=10, L=4, tau=12, T=48");
  app.add_flag("-v,--verbose", g.verbose, "Progress on stderr");

  Index channel_index = 0;
  auto* gen = app.add_subcommand("channel-gen", "Draw one Rayleigh channel and write it as JSON");
  gen->add_option("--index", channel_index, "Channel index within the seed's channel stream");

  std::string channel_path;
  double energy = 1.0;
  Index symbol_frame = 0;
  auto* pre = app.add_subcommand("precode", "Precode one Gaussian symbol frame");
  pre->add_option("--channel", channel_path, "Channel JSON (default: draw from the seed)")->check(CLI::ExistingFile);
  pre->add_option("--index", channel_index, "Channel index when drawing");
  pre->add_option("--energy", energy, "Per-user symbol energy E*")->check(CLI::PositiveNumber);
  pre->add_option("--frame", symbol_frame, "Symbol frame index");

  double snr_db = 10.0;
  auto* rate = app.add_subcommand("rate", "Ergodic per-user CE rate bound at one (E*, P_T/sigma^2)");
  rate->add_option("--energy", energy, "Per-user symbol energy E*")->check(CLI::PositiveNumber);
  rate->add_option("--snr-db", snr_db, "P_T/sigma^2 in dB");

  auto* minp = app.add_subcommand("min-power", "CE and ZF minimum P_T/sigma^2 for the target rate (one CSV row)");

  std::vector<Index> tau_list;
  std::vector<Index> L_list{1, 2, 4, 8};
  auto* stau = app.add_subcommand("sweep-tau", "Minimum power versus block length");
  stau->add_option("--tau", tau_list, "Block lengths (default: L, 2L, 3L, 6L per L)");
  stau->add_option("--L", L_list, "Channel lengths");

  std::vector<Index> N_list{16, 32, 64};
  auto* sn = app.add_subcommand("sweep-n", "Minimum power versus antenna count");
  sn->add_option("--N", N_list, "Antenna counts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error("usage", e.what());
    return 2;
  }

  try {
    const ExperimentConfig config = load_config(g);
    const RunOptions options = run_options(g);

    if (gen->parsed()) {
      const auto channel = trial_channel<double>(config.rng_seed, channel_index, config.N, config.M, config.L);
      write_output(g, to_json(channel).dump(2) + "\n");
    } else if (pre->parsed()) {
      const auto channel = channel_for(config, channel_path, channel_index);
      const auto s = static_cast<std::uint64_t>(symbol_frame);
      const auto c = static_cast<std::uint64_t>(channel_index);
      const auto symbols = SymbolFrame<double>::gaussian(RVector<double>::Constant(channel.n_users(), energy),
                                                         config.T, derive_seed(config.rng_seed, Stream::symbols, c, s));
      PrecoderConfig pc = config.precoder();
      pc.trace = TraceLevel::iteration;
      pc.rng_seed = derive_seed(config.rng_seed, Stream::init, c, s);
      const auto result = precode_frame(channel, symbols, pc);
      for (const auto& w : result.report.warnings) std::cerr << "warning: " << w << "\n";
      const json doc{{"phases", to_json(result.phases)}, {"report", to_json(result.report)}};
      write_output(g, doc.dump(2) + "\n");
    } else if (rate->parsed()) {
      CeRateOracle oracle(config, options);
      const RateEstimate est = oracle.rate(energy, std::pow(10.0, snr_db / 10.0));
      write_output(g, to_json(est).dump(2) + "\n");
    } else if (minp->parsed()) {
      const SweepPoint point = run_point(config, "point", options);
      write_output(g, to_csv({point.row}, config.rng_seed));
    } else if (stau->parsed()) {
      write_output(g, to_csv(rows_of(sweep_tau(config, tau_list, L_list, options)), config.rng_seed));
    } else if (sn->parsed()) {
      write_output(g, to_csv(rows_of(sweep_antennas(config, N_list, options)), config.rng_seed));
    }
  } catch (const Error& e) {
    emit_error(e.code(), e.what());
    return 1;
  } catch (const std::exception& e) {
    emit_error("internal", e.what());
    return 1;
  }
  return 0;
}
