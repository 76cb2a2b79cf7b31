#include "cemimo/container.hpp"

#include <fstream>
#include <sstream>

namespace cemimo {

using nlohmann::json;

namespace {

void expect_kind(const json& doc, const char* kind) {
  require(doc.is_object() && doc.value("kind", "") == kind, "malformed_container",
          std::string("expected a '") + kind + "' container");
  require(doc.value("version", 0) == kContainerVersion, "malformed_container",
          "unsupported container version");
}

Index positive_dim(const json& doc, const char* key) {
  require(doc.contains(key) && doc[key].is_number_integer() && doc[key].get<Index>() >= 1,
          "malformed_container", std::string("missing or invalid dimension '") + key + "'");
  return doc[key].get<Index>();
}

}  // namespace

json to_json(const ChannelTensor<double>& channel) {
  const Index m = channel.n_users(), n = channel.n_antennas(), taps = channel.n_taps();
  json gains = json::array();
  for (Index k = 0; k < m; ++k)
    for (Index i = 0; i < n; ++i)
      for (Index l = 0; l < taps; ++l) {
        gains.push_back(channel(k, i, l).real());
        gains.push_back(channel(k, i, l).imag());
      }
  return {{"kind", "channel"},
          {"version", kContainerVersion},
          {"N", n},
          {"M", m},
          {"L", taps},
          {"seed", channel.seed()},
          {"pdp", channel.pdp().tap_powers},
          {"gains", std::move(gains)}};
}

ChannelTensor<double> channel_from_json(const json& doc) {
  expect_kind(doc, "channel");
  const Index n = positive_dim(doc, "N"), m = positive_dim(doc, "M"), taps = positive_dim(doc, "L");
  const auto& gains = doc.at("gains");
  require(gains.is_array() && static_cast<Index>(gains.size()) == 2 * m * n * taps, "malformed_container",
          "gain array length must be 2*M*N*L");
  std::vector<CMatrix<double>> tap_mats(static_cast<std::size_t>(taps), CMatrix<double>(m, n));
  std::size_t pos = 0;
  for (Index k = 0; k < m; ++k)
    for (Index i = 0; i < n; ++i)
      for (Index l = 0; l < taps; ++l, pos += 2)
        tap_mats[static_cast<std::size_t>(l)](k, i) = {gains[pos].get<double>(), gains[pos + 1].get<double>()};
  PowerDelayProfile pdp;
  if (doc.contains("pdp")) pdp.tap_powers = doc["pdp"].get<std::vector<double>>();
  return ChannelTensor<double>(std::move(tap_mats), doc.value("seed", std::uint64_t{0}), std::move(pdp));
}

json to_json(const PhaseFrame<double>& phases) {
  json angles = json::array();
  for (Index i = 0; i < phases.n_antennas(); ++i)
    for (Index t = 0; t < phases.length(); ++t) angles.push_back(phases(i, t));
  return {{"kind", "phase_frame"},
          {"version", kContainerVersion},
          {"N", phases.n_antennas()},
          {"T", phases.length()},
          {"angles", std::move(angles)}};
}

PhaseFrame<double> phases_from_json(const json& doc) {
  expect_kind(doc, "phase_frame");
  const Index n = positive_dim(doc, "N"), t_len = positive_dim(doc, "T");
  const auto& angles = doc.at("angles");
  require(angles.is_array() && static_cast<Index>(angles.size()) == n * t_len, "malformed_container",
          "angle array length must be N*T");
  RMatrix<double> mat(n, t_len);
  std::size_t pos = 0;
  for (Index i = 0; i < n; ++i)
    for (Index t = 0; t < t_len; ++t) mat(i, t) = angles[pos++].get<double>();
  return PhaseFrame<double>(std::move(mat));
}

json to_json(const PrecoderReport& report) {
  json offsets = json::array(), iterations = json::array(), block_final = json::array();
  std::size_t offset = 0;
  for (const auto& b : report.blocks) {
    offsets.push_back(offset);
    offset += b.objective_trace.size();
    iterations.push_back(b.iterations_used);
    block_final.push_back(b.final_objective);
  }
  return {{"kind", "precoder_report"},
          {"version", kContainerVersion},
          {"objective_trace", report.objective_trace()},
          {"block_offsets", std::move(offsets)},
          {"iterations_used", std::move(iterations)},
          {"block_objectives", std::move(block_final)},
          {"final_objective", report.final_objective},
          {"multiply_adds", report.multiply_adds},
          {"warnings", report.warnings}};
}

json to_json(const RateEstimate& e) {
  return {{"kind", "rate_estimate"},
          {"version", kContainerVersion},
          {"per_user_rates", e.per_user_rates},
          {"standard_errors", e.standard_errors},
          {"mean_rate", e.mean_rate},
          {"mean_standard_error", e.mean_standard_error},
          {"config",
           {{"snr", e.snr},
            {"energies", e.energies},
            {"N", e.n_antennas},
            {"M", e.n_users},
            {"L", e.taps},
            {"T", e.length},
            {"tau", e.tau},
            {"n_iterations", e.n_iterations},
            {"n_channels", e.n_channels},
            {"n_samples", e.n_samples},
            {"seed", e.seed}}}};
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "io_error", "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& ex) {
    throw Error("malformed_config", path.string() + ": " + ex.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), "io_error", "cannot write " + path.string());
  out << text;
  require(static_cast<bool>(out), "io_error", "write failed for " + path.string());
}

}  // namespace cemimo
