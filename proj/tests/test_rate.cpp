#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "cemimo/rate.hpp"
#include "oracles.hpp"

using namespace cemimo;

namespace {

MuiCovariance<double> zero_cov(Index T) { return {CMatrix<double>::Zero(T, T), 1}; }

const MuiModel<double> zero_mui = [](const ChannelTensor<double>& h, const SymbolFrame<double>& u, std::uint64_t) {
  return CMatrix<double>::Zero(h.n_users(), u.length()).eval();
};

}  // namespace

TEST_CASE("rate_lower_bound closed forms") {
  CHECK(rate_lower_bound(zero_cov(4), 1.0, 4.0, 4) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(rate_lower_bound(zero_cov(4), 1.0, 1.0, 4) == 0.0);
  CHECK(rate_lower_bound(zero_cov(4), 1.0, 0.5, 4) == 0.0);
  CHECK(rate_lower_bound(zero_cov(3), 2.5, 7.0, 3) == doctest::Approx(std::log2(2.5 * 7.0)).epsilon(1e-14));

  MuiCovariance<double> diag{CMatrix<double>::Zero(2, 2), 10};
  diag.matrix(0, 0) = 0.3;
  diag.matrix(1, 1) = 0.1;
  const double expect = 2.0 - (std::log2(0.4) + std::log2(0.2)) / 2.0;
  CHECK(rate_lower_bound(diag, 4.0, 10.0, 2) == doctest::Approx(expect).epsilon(1e-14));
  CHECK(expect == doctest::Approx(3.822).epsilon(1e-3));
}

TEST_CASE("rate_lower_bound rejects bad input") {
  MuiCovariance<double> c{CMatrix<double>::Identity(3, 3), 1};
  c.matrix(0, 1) = {0.1, 0.2};
  CHECK_THROWS_WITH_AS(rate_lower_bound(c, 1.0, 1.0, 3), doctest::Contains("Hermitian"), Error);
  CHECK_THROWS_AS(rate_lower_bound(zero_cov(3), 1.0, 1.0, 4), Error);
  MuiCovariance<double> neg{-5.0 * CMatrix<double>::Identity(2, 2), 1};
  CHECK_THROWS_AS(rate_lower_bound(neg, 1.0, 1.0, 2), Error);
}

TEST_CASE("log_det_hpd matches the eigenvalues") {
  const auto a = trial_channel<double>(3, 0, 6, 6, 1).tap(0);
  const CMatrix<double> m = a * a.adjoint() + CMatrix<double>::Identity(6, 6);
  const Eigen::SelfAdjointEigenSolver<CMatrix<double>> es(m);
  CHECK(log_det_hpd(m) == doctest::Approx(es.eigenvalues().array().log().sum()).epsilon(1e-12));
}

TEST_CASE("rate is nondecreasing in power") {
  const auto h = trial_channel<double>(4, 0, 16, 2, 2);
  const auto cov = estimate_mui_covariance<double>(h, RVector<double>::Constant(2, 3.0), 12,
                                           precoder_mui_model<double>({6, 4}), 20, 5);
  double prev = 0;
  for (int i = 0; i < 20; ++i) {
    const double r = rate_lower_bound(cov[0], 3.0, std::pow(10.0, (-10.0 + 2.0 * i) / 10), 12);
    CHECK(r >= prev);
    CHECK(r >= 0.0);
    prev = r;
  }
}

TEST_CASE("compute_mui") {
  SUBCASE("zero channel") {
    const auto u = SymbolFrame<double>::gaussian(RVector<double>::Constant(2, 2.0), 4, 1);
    const ChannelTensor<double> h(std::vector<CMatrix<double>>(2, CMatrix<double>::Zero(2, 3)));
    const auto mui = compute_mui(h, PhaseFrame<double>::uniform(3, 4, 2), u).mui;
    CHECK((mui + u.desired()).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("matches the received samples and the objective") {
    const auto h = trial_channel<double>(9, 0, 5, 3, 2);
    const auto u = SymbolFrame<double>::gaussian(RVector<double>::Constant(3, 1.5), 6, 3);
    PrecoderConfig cfg{3, 4};
    const auto th = precode_frame(h, u, cfg).phases;
    const auto mui = compute_mui(h, th, u).mui;
    const double pt = 3.0;
    const CMatrix<double> from_y = noise_free_receive(h, th, pt).samples / std::sqrt(pt) - u.desired();
    CHECK((mui - from_y).cwiseAbs().maxCoeff() < 1e-12);
    const double f = evaluate_objective(h, th, u);
    CHECK(std::abs(mui.squaredNorm() - f) <= 1e-9 * f);
  }
}

TEST_CASE("estimate_mui_covariance") {
  const auto h = trial_channel<double>(2, 0, 32, 4, 2);
  const RVector<double> e = RVector<double>::Constant(4, 4.0);

  SUBCASE("zero-MUI stub gives a zero matrix") {
    for (const auto& c : estimate_mui_covariance<double>(h, e, 8, zero_mui, 5, 1)) CHECK(c.matrix.isZero(0.0));
  }
  SUBCASE("one sample is a rank-one outer product") {
    const auto cov = estimate_mui_covariance<double>(h, e, 8, precoder_mui_model<double>({4, 4}), 1, 1);
    for (const auto& c : cov) {
      const Eigen::SelfAdjointEigenSolver<CMatrix<double>> es(c.matrix);
      const auto ev = es.eigenvalues();
      CHECK(ev(7) > 0);
      CHECK(ev.head(7).cwiseAbs().maxCoeff() < 1e-12 * ev(7));
    }
  }
  SUBCASE("pinned run is Hermitian and PSD") {
    const auto cov = estimate_mui_covariance<double>(h, e, 8, precoder_mui_model<double>({4, 4}), 50, 7);
    for (const auto& c : cov) {
      CHECK((c.matrix - c.matrix.adjoint()).cwiseAbs().maxCoeff() <= 1e-12);
      const Eigen::SelfAdjointEigenSolver<CMatrix<double>> es(c.matrix);
      CHECK(es.eigenvalues().minCoeff() >= -1e-10);
      CHECK(c.n_samples == 50);
    }
  }
}

TEST_CASE("ergodic_rate") {
  const PrecoderConfig cfg{4, 4};
  const RVector<double> e = RVector<double>::Constant(2, 2.0);

  SUBCASE("zero-MUI stub is exact") {
    const auto est = ergodic_rate<double>(8, 2, 2, e, 5.0, 8, cfg, 3, 4, 1, 1, zero_mui);
    for (double r : est.per_user_rates) CHECK(std::abs(r - std::log2(2.0 * 5.0)) < 1e-9);
    for (double se : est.standard_errors) CHECK(se < 1e-12);
  }
  SUBCASE("vanishing power gives zero") {
    const auto est = ergodic_rate<double>(8, 2, 2, e, 1e-9, 8, cfg, 3, 4, 1);
    for (double r : est.per_user_rates) CHECK(r == 0.0);
  }
  SUBCASE("needs two channels") { CHECK_THROWS_AS(ergodic_rate<double>(8, 2, 2, e, 1.0, 8, cfg, 1, 4, 1), Error); }
}

TEST_CASE("ergodic_rate Monte-Carlo consistency") {
  const PrecoderConfig cfg{6, 4};
  const RVector<double> e = RVector<double>::Constant(4, 3.0);
  const auto a = ergodic_rate<double>(32, 4, 2, e, 10.0, 12, cfg, 50, 20, 1);
  const auto b = ergodic_rate<double>(32, 4, 2, e, 10.0, 12, cfg, 50, 20, 2);
  const double combined = std::hypot(a.mean_standard_error, b.mean_standard_error);
  CHECK(std::abs(a.mean_rate - b.mean_rate) < 4 * combined);

  // Users are exchangeable.
  double lo = a.per_user_rates[0], hi = lo, se = 0;
  for (std::size_t k = 0; k < 4; ++k) {
    lo = std::min(lo, a.per_user_rates[k]);
    hi = std::max(hi, a.per_user_rates[k]);
    se = std::max(se, a.standard_errors[k]);
  }
  CHECK(hi - lo < 4 * std::sqrt(2.0) * se);

  CHECK(a.n_channels == 50);
  CHECK(a.n_samples == 20);
  CHECK(a.tau == 6);
  CHECK(a.seed == 1);
}

TEST_CASE("covariance banks are thread-count independent") {
  const auto model = precoder_mui_model<double>({3, 2});
  const RVector<double> e = RVector<double>::Constant(2, 2.0);
  const auto one = estimate_covariance_bank<double>(8, 2, 2, e, 6, model, 6, 5, 3, 1);
  const auto four = estimate_covariance_bank<double>(8, 2, 2, e, 6, model, 6, 5, 3, 4);
  for (std::size_t c = 0; c < 6; ++c)
    for (std::size_t k = 0; k < 2; ++k) CHECK(one.per_channel[c][k].matrix == four.per_channel[c][k].matrix);
}
