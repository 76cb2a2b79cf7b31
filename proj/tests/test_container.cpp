#include <doctest.h>

#include "cemimo/container.hpp"

using namespace cemimo;

TEST_CASE("channel container round trip") {
  const auto h = generate_channel<double>(17, 5, 3, PowerDelayProfile{{0.7, 0.2, 0.1}});
  const auto doc = to_json(h);
  CHECK(doc["kind"] == "channel");
  CHECK(doc["gains"].size() == 2 * 5 * 3 * 3);
  const auto back = channel_from_json(nlohmann::json::parse(doc.dump()));
  CHECK(back.seed() == 17);
  CHECK(back.pdp().tap_powers == h.pdp().tap_powers);
  for (Index l = 0; l < 3; ++l) CHECK(back.tap(l) == h.tap(l));
  // Gains are stored user, antenna, tap with (re, im) interleaved.
  CHECK(doc["gains"][0].get<double>() == h(0, 0, 0).real());
  CHECK(doc["gains"][3].get<double>() == h(0, 0, 1).imag());
  CHECK(doc["gains"][6].get<double>() == h(0, 1, 0).real());
}

TEST_CASE("phase frame container round trip") {
  const auto th = PhaseFrame<double>::uniform(4, 6, 3);
  const auto back = phases_from_json(nlohmann::json::parse(to_json(th).dump()));
  CHECK(back.angles() == th.angles());
}

TEST_CASE("malformed containers") {
  auto doc = to_json(generate_channel<double>(1, 2, 2, PowerDelayProfile::uniform(2)));
  doc["gains"].erase(0);
  CHECK_THROWS_AS(channel_from_json(doc), Error);
  CHECK_THROWS_AS(channel_from_json(nlohmann::json{{"kind", "phase_frame"}}), Error);
  auto ph = to_json(PhaseFrame<double>::zeros(2, 2));
  ph["angles"][0] = 4.0;
  CHECK_THROWS_AS(phases_from_json(ph), Error);
  CHECK_THROWS_AS(read_json_file("/nonexistent/file.json"), Error);
}

TEST_CASE("report containers") {
  const auto h = trial_channel<double>(1, 0, 4, 2, 2);
  const auto u = SymbolFrame<double>::gaussian(RVector<double>::Constant(2, 1.0), 6, 2);
  PrecoderConfig cfg{3, 2};
  cfg.trace = TraceLevel::iteration;
  const auto res = precode_frame(h, u, cfg);
  const auto doc = to_json(res.report);
  CHECK(doc["kind"] == "precoder_report");
  CHECK(doc["objective_trace"].size() == 2 * 3);
  CHECK(doc["final_objective"].get<double>() == res.report.final_objective);

  const auto est = ergodic_rate<double>(4, 2, 2, RVector<double>::Constant(2, 1.0), 3.0, 6, cfg, 2, 3, 5);
  const auto rd = to_json(est);
  CHECK(rd["kind"] == "rate_estimate");
  CHECK(rd["config"]["seed"] == 5);
  CHECK(rd["per_user_rates"].size() == 2);
}
