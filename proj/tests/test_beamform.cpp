#include <doctest.h>

#include "nfbf/beamform.hpp"
#include "oracles.hpp"

using namespace nfbf;

namespace {

AnalogBeamformer random_feasible(int n_t, int n_rf, Rng& rng) {
  AnalogBeamformer a = AnalogBeamformer::zeros(n_t, n_rf);
  for (int n = 0; n < n_t; ++n) {
    a.theta(n) = rng.uniform(0.0, 2 * kPi);
    const int choice = static_cast<int>(rng.below(n_rf + 1));
    if (choice > 0) a.switches(n, choice - 1) = 1;
  }
  return a;
}

}  // namespace

TEST_SUITE("beamform") {
  TEST_CASE("compose basics") {
    AnalogBeamformer off = AnalogBeamformer::zeros(4, 2);
    CHECK(compose(off).norm() == 0.0);

    AnalogBeamformer both = AnalogBeamformer::zeros(2, 1);
    both.switches.setOnes();
    const CMat f = compose(both);
    CHECK(f(0, 0) == cxd(1.0 / std::sqrt(2.0), 0.0));
    CHECK(f(1, 0) == cxd(1.0 / std::sqrt(2.0), 0.0));

    AnalogBeamformer bad = AnalogBeamformer::zeros(2, 2);
    bad.switches.row(0).setOnes();
    CHECK_THROWS_AS(compose(bad), std::invalid_argument);
  }

  TEST_CASE("compose keeps the row sparsity of S") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
      const AnalogBeamformer a = random_feasible(16, 3, rng);
      const CMat f = compose(a);
      const double mod = 1.0 / std::sqrt(16.0);
      for (int n = 0; n < 16; ++n) {
        int nonzero = 0;
        for (int l = 0; l < 3; ++l) {
          if (std::abs(f(n, l)) > 0) {
            ++nonzero;
            CHECK(std::abs(f(n, l)) == doctest::Approx(mod).epsilon(1e-12));
          }
        }
        CHECK(nonzero == a.switches.row(n).sum());
      }
    }
  }

  TEST_CASE("validate reports violations") {
    AnalogBeamformer good = AnalogBeamformer::zeros(3, 2);
    good.switches(0, 1) = 1;
    CHECK(validate(good).ok);

    AnalogBeamformer overlap = AnalogBeamformer::zeros(3, 2);
    overlap.switches.row(1).setOnes();
    const auto rep = validate(overlap);
    CHECK_FALSE(rep.ok);
    REQUIRE(rep.violations.size() == 1);
    CHECK(rep.violations[0].find("row 2") != std::string::npos);

    AnalogBeamformer nonbinary = AnalogBeamformer::zeros(3, 2);
    nonbinary.switches(2, 0) = 5;
    CHECK_FALSE(validate(nonbinary).ok);
  }

  TEST_CASE("sinr against the scalar-loop oracle") {
    Rng rng(17);
    const CMat h = oracle::random_cmat(8, 2, rng);
    const AnalogBeamformer a = random_feasible(8, 2, rng);
    const CMat f_rf = compose(a);
    const CMat f_bb = oracle::random_cmat(2, 2, rng);
    const RVec sigma2 = RVec::Constant(2, 0.01);

    const RVec got = sinr(h, f_rf, f_bb, sigma2);
    const RVec expect = oracle::sinr(h, f_rf, f_bb, sigma2);
    for (int k = 0; k < 2; ++k) CHECK(got(k) == doctest::Approx(expect(k)).epsilon(1e-12));
  }

  TEST_CASE("sinr special cases") {
    Rng rng(29);
    const CMat h = oracle::random_cmat(6, 1, rng);
    const CMat f_rf = CMat::Identity(6, 6);
    const CMat f_bb = oracle::random_cmat(6, 1, rng);
    const RVec sigma2 = RVec::Constant(1, 0.5);
    const double expect = std::norm((h.col(0).adjoint() * f_bb.col(0)).value()) / 0.5;
    CHECK(sinr(h, f_rf, f_bb, sigma2)(0) == doctest::Approx(expect).epsilon(1e-12));

    CHECK(sinr(h, f_rf, CMat::Zero(6, 1), sigma2)(0) == 0.0);
    CHECK_THROWS_AS(sinr(h, f_rf, CMat::Zero(5, 1), sigma2), std::invalid_argument);
    CHECK_THROWS_AS(sinr(h, f_rf, f_bb, RVec::Zero(1)), std::invalid_argument);
  }

  TEST_CASE("sinr invariant to unit-modulus scaling of a channel column") {
    Rng rng(31);
    const CMat h = oracle::random_cmat(8, 3, rng);
    const CMat f_rf = compose(random_feasible(8, 3, rng));
    const CMat f_bb = oracle::random_cmat(3, 3, rng);
    const RVec sigma2 = RVec::Constant(3, 1e-3);
    CMat h2 = h;
    h2.col(1) *= std::polar(1.0, 1.234);
    const RVec s1 = sinr(h, f_rf, f_bb, sigma2);
    const RVec s2 = sinr(h2, f_rf, f_bb, sigma2);
    for (int k = 0; k < 3; ++k) CHECK(s1(k) == doctest::Approx(s2(k)).epsilon(1e-12));
  }

  TEST_CASE("sum_rate") {
    RVec z(2);
    z << 0.0, 0.0;
    CHECK(sum_rate(z) == 0.0);
    RVec one(1);
    one << 1.0;
    CHECK(sum_rate(one) == doctest::Approx(1.0));
    RVec v(2);
    v << 3.0, 7.0;
    CHECK(sum_rate(v) == doctest::Approx(5.0));
    RVec neg(1);
    neg << -0.1;
    CHECK_THROWS_AS(sum_rate(neg), std::invalid_argument);

    // monotone in each coordinate
    RVec lo(2), hi(2);
    lo << 0.5, 2.0;
    hi << 0.6, 2.0;
    CHECK(sum_rate(hi) > sum_rate(lo));
  }

  TEST_CASE("enforce_power") {
    Rng rng(41);
    const CMat f_rf = compose(random_feasible(8, 2, rng));
    const CMat raw = oracle::random_cmat(2, 2, rng);
    const double p_t = 2.5;
    const CMat f_bb = enforce_power(f_rf, raw, p_t);
    CHECK((f_rf * f_bb).squaredNorm() == doctest::Approx(p_t).epsilon(1e-9));

    // scale invariance of the input
    const CMat f_bb2 = enforce_power(f_rf, 2.0 * raw, p_t);
    CHECK((f_bb - f_bb2).norm() < 1e-12);

    // already satisfying input is unchanged
    const CMat again = enforce_power(f_rf, f_bb, p_t);
    CHECK((again - f_bb).norm() < 1e-12);

    CHECK_THROWS_AS(enforce_power(f_rf, CMat::Zero(2, 2), p_t), NumericError);
  }

  TEST_CASE("total_power Table rows") {
    PowerModel pm;
    pm.p_t_w = 10.0;
    pm.p_bb_w = 0.2;
    pm.p_rf_w = 0.25;
    pm.p_ps_w = 0.01;
    pm.p_sw_w = 0.005;

    CHECK(total_power(Architecture::fully_digital, pm, 1500, 3, 1500) ==
          doctest::Approx(385.2).epsilon(1e-12));
    CHECK(total_power(Architecture::fully_connected, pm, 1500, 3, 1500) ==
          doctest::Approx(10.0 + 0.2 + 3 * 0.25 + 1500 * 3 * 0.01));
    CHECK(total_power(Architecture::fixed_subarray, pm, 1500, 3, 1500) ==
          doctest::Approx(10.0 + 0.2 + 3 * 0.25 + 1500 * 0.01));
    CHECK(total_power(Architecture::dynamic_subarray, pm, 1500, 3, 900) ==
          doctest::Approx(10.0 + 0.2 + 3 * 0.25 + 900 * 0.015));
    // M = 0 leaves only the transmit + baseband + RF terms
    CHECK(total_power(Architecture::dynamic_subarray, pm, 64, 3, 0) ==
          doctest::Approx(10.0 + 0.2 + 0.75));
    // with one RF chain, fixed-subarray equals fully-connected
    CHECK(total_power(Architecture::fixed_subarray, pm, 256, 1, 256) ==
          doctest::Approx(total_power(Architecture::fully_connected, pm, 256, 1, 256)));
    // non-decreasing in M
    double prev = 0.0;
    for (int m = 0; m <= 64; ++m) {
      const double p = total_power(Architecture::dynamic_subarray, pm, 64, 3, m);
      CHECK(p >= prev);
      prev = p;
    }
    CHECK_THROWS_AS(total_power(Architecture::dynamic_subarray, pm, 8, 3, 9),
                    std::invalid_argument);
  }

  TEST_CASE("energy_efficiency") {
    CHECK(energy_efficiency(0.0, 3.0) == 0.0);
    CHECK(energy_efficiency(10.0, 2.0) == doctest::Approx(5.0));
    CHECK(energy_efficiency(10.0, 4.0) == doctest::Approx(energy_efficiency(10.0, 2.0) / 2));
    CHECK_THROWS_AS(energy_efficiency(1.0, 0.0), std::invalid_argument);
  }

  TEST_CASE("estimation_overhead Table rows") {
    CHECK(estimation_overhead(EstimationScheme::real_time, 1500, 3, 3, 120, 200) ==
          doctest::Approx(108000000.0));
    CHECK(estimation_overhead(EstimationScheme::two_timescale, 1500, 3, 3, 120, 200) ==
          doctest::Approx(756000.0));  // 540,000 + 216,000, checked by hand
    CHECK(estimation_overhead(EstimationScheme::two_timescale, 64, 3, 3, 40, 1) ==
          doctest::Approx(64.0 * 3 * 40 + 3.0 * 3 * 40));
  }

  TEST_CASE("dbm conversions") {
    CHECK(dbm_to_watt(30.0) == doctest::Approx(1.0));
    CHECK(dbm_to_watt(-80.0) == doctest::Approx(1e-11));
    CHECK(watt_to_dbm(dbm_to_watt(17.5)) == doctest::Approx(17.5).epsilon(1e-12));
  }
}
