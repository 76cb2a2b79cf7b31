#include <doctest.h>

#include <cmath>
#include <set>

#include "cemimo/random.hpp"
#include "cemimo/types.hpp"

using namespace cemimo;

TEST_CASE("derive_seed separates streams and indices") {
  std::set<std::uint64_t> seen;
  for (auto s : {Stream::channel, Stream::symbols, Stream::init, Stream::noise})
    for (std::uint64_t a = 0; a < 8; ++a)
      for (std::uint64_t b = 0; b < 8; ++b) seen.insert(derive_seed(7, s, a, b));
  CHECK(seen.size() == 4 * 8 * 8);
  CHECK(derive_seed(7, Stream::channel, 3, 1) == derive_seed(7, Stream::channel, 3, 1));
  CHECK(derive_seed(7, Stream::channel, 3, 1) != derive_seed(8, Stream::channel, 3, 1));
  // (a, b) and (b, a) must not collide.
  CHECK(derive_seed(7, Stream::symbols, 1, 2) != derive_seed(7, Stream::symbols, 2, 1));
}

TEST_CASE("engines are reproducible") {
  auto a = make_engine(42);
  auto b = make_engine(42);
  for (int i = 0; i < 100; ++i) CHECK(a() == b());
}

TEST_CASE("complex Gaussian splits the variance evenly") {
  auto gen = make_engine(derive_seed(1, Stream::noise));
  ComplexGaussian<double> draw(2.0);
  const int n = 100000;
  double re2 = 0, im2 = 0, cross = 0;
  for (int i = 0; i < n; ++i) {
    const auto z = draw(gen);
    re2 += z.real() * z.real();
    im2 += z.imag() * z.imag();
    cross += z.real() * z.imag();
  }
  // Each squared component has mean 1 and variance 2.
  const double se = std::sqrt(2.0 / n);
  CHECK(std::abs(re2 / n - 1.0) < 3 * se);
  CHECK(std::abs(im2 / n - 1.0) < 3 * se);
  CHECK(std::abs(cross / n) < 3 * std::sqrt(1.0 / n));
}

TEST_CASE("wrap_angle lands in [-pi, pi)") {
  const double pi = std::numbers::pi;
  CHECK(wrap_angle(pi) == doctest::Approx(-pi));
  CHECK(wrap_angle(2 * pi) == doctest::Approx(0.0));
  CHECK(wrap_angle(-pi) == -pi);
  CHECK(wrap_angle(1.5 * pi) == doctest::Approx(-0.5 * pi));
  for (double a = -40.0; a < 40.0; a += 0.0137) {
    const double w = wrap_angle(a);
    CHECK(w >= -pi);
    CHECK(w < pi);
    CHECK(std::abs(std::remainder(w - a, 2 * pi)) < 1e-12);
  }
}
