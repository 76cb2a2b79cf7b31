#include <doctest.h>

#include <cmath>

#include "cemimo/channel.hpp"
#include "oracles.hpp"

using namespace cemimo;

TEST_CASE("tap statistics follow the power delay profile") {
  const PowerDelayProfile pdp{{0.5, 0.3, 0.2}};
  // 4 x 250 gains per tap per draw, 100 draws: 10^5 samples per tap.
  std::vector<double> power(3, 0.0), power_sq(3, 0.0);
  std::vector<std::complex<double>> mean(3, 0.0);
  long n = 0;
  for (int d = 0; d < 100; ++d) {
    const auto h = generate_channel<double>(derive_seed(11, Stream::channel, d), 250, 4, pdp);
    for (long l = 0; l < 3; ++l) {
      for (long i = 0; i < 250; ++i)
        for (long k = 0; k < 4; ++k) {
          const double p = std::norm(h(k, i, l));
          power[l] += p;
          power_sq[l] += p * p;
          mean[l] += h(k, i, l);
        }
    }
    n += 1000;
  }
  for (long l = 0; l < 3; ++l) {
    const double m = power[l] / n;
    const double var = power_sq[l] / n - m * m;
    CHECK(std::abs(m - pdp.tap_powers[l]) < 3 * std::sqrt(var / n));
    const double se = std::sqrt(pdp.tap_powers[l] / 2 / n);
    CHECK(std::abs(mean[l].real() / n) < 3 * se);
    CHECK(std::abs(mean[l].imag() / n) < 3 * se);
  }
}

TEST_CASE("same seed, same channel") {
  const auto a = trial_channel<double>(5, 2, 8, 3, 4);
  const auto b = trial_channel<double>(5, 2, 8, 3, 4);
  const auto c = trial_channel<double>(5, 3, 8, 3, 4);
  for (long l = 0; l < 4; ++l) {
    CHECK(a.tap(l) == b.tap(l));
    CHECK(a.tap(l) != c.tap(l));
  }
}

TEST_CASE("invalid power delay profiles are rejected") {
  CHECK_THROWS_AS(generate_channel<double>(1, 4, 2, PowerDelayProfile{{0.5, 0.4}}), Error);
  CHECK_THROWS_AS(generate_channel<double>(1, 4, 2, PowerDelayProfile{{1.2, -0.2}}), Error);
  CHECK_THROWS_AS(generate_channel<double>(1, 4, 2, PowerDelayProfile{{}}), Error);
  CHECK_NOTHROW(generate_channel<double>(1, 4, 2, PowerDelayProfile{{0.25, 0.75}}));
}

TEST_CASE("noise-free reception matches a direct sum with a zero prefix") {
  const auto h = trial_channel<double>(3, 0, 5, 3, 3);
  const auto th = PhaseFrame<double>::uniform(5, 7, 99);
  const double pt = 2.5;
  const auto y = noise_free_receive(h, th, pt);
  const double scale = std::sqrt(pt / 5);
  for (long t = 0; t < 7; ++t)
    for (long k = 0; k < 3; ++k) {
      std::complex<double> direct = 0;
      for (long i = 0; i < 5; ++i)
        for (long l = 0; l < 3; ++l)
          if (t >= l) direct += h(k, i, l) * std::polar(1.0, th(i, t - l));
      CHECK(std::abs(y.samples(k, t) - scale * direct) < 1e-12);
    }
  // At t = 0 only tap 0 contributes.
  const CVector<double> first = scale * h.tap(0) * th.phasors().col(0);
  CHECK((y.samples.col(0) - first).norm() < 1e-12);
}

TEST_CASE("convolution is linear in the transmitted phasors") {
  const auto h = trial_channel<double>(4, 1, 6, 2, 2);
  const auto x = PhaseFrame<double>::uniform(6, 5, 1).phasors();
  const std::complex<double> c(0.3, -1.7);
  const CMatrix<double> lhs = convolve(h, (c * x).eval());
  const CMatrix<double> rhs = c * convolve(h, x);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("add_awgn") {
  const auto h = trial_channel<double>(1, 0, 4, 2, 2);
  const auto y = noise_free_receive(h, PhaseFrame<double>::zeros(4, 50000), 1.0);

  SUBCASE("zero variance leaves the frame untouched") {
    const auto z = add_awgn(y, 0.0, 3);
    CHECK(z.samples == y.samples);
  }
  SUBCASE("unit variance over 10^5 samples") {
    const auto z = add_awgn(y, 1.0, 3);
    const CMatrix<double> noise = z.samples - y.samples;
    const double n = double(noise.size());
    const double var = noise.squaredNorm() / n;
    // |w|^2 is exponential with mean 1 and variance 1.
    CHECK(std::abs(var - 1.0) < 3 * std::sqrt(1.0 / n));
    const auto again = add_awgn(y, 1.0, 3);
    CHECK(again.samples == z.samples);
  }
  SUBCASE("negative variance") { CHECK_THROWS_AS(add_awgn(y, -1.0, 3), Error); }
}
