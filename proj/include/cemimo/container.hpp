#pragma once

// JSON containers for channels, phase frames, precoder reports and rate
// estimates. Layouts are described in the README; doubles are written with
// enough digits to round-trip exactly.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "cemimo/channel.hpp"
#include "cemimo/frames.hpp"
#include "cemimo/precoder.hpp"
#include "cemimo/rate.hpp"

namespace cemimo {

inline constexpr int kContainerVersion = 1;

nlohmann::json to_json(const ChannelTensor<double>& channel);
ChannelTensor<double> channel_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const PhaseFrame<double>& phases);
PhaseFrame<double> phases_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const PrecoderReport& report);
nlohmann::json to_json(const RateEstimate& estimate);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace cemimo
