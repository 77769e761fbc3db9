#include <doctest.h>

#include "nfbf/channel.hpp"
#include "oracles.hpp"

using namespace nfbf;

namespace {
const ArrayGeometry kGeom28 = ArrayGeometry::from_carrier(128, 28e9);
}

TEST_SUITE("channel") {
  TEST_CASE("geometry constants") {
    CHECK(kGeom28.wavelength_m == doctest::Approx(0.0107068735).epsilon(1e-9));
    CHECK(kGeom28.spacing_m == doctest::Approx(kGeom28.wavelength_m / 2).epsilon(1e-12));
    CHECK_THROWS_AS(ArrayGeometry::from_carrier(0, 28e9), std::invalid_argument);
    CHECK_THROWS_AS(ArrayGeometry::from_carrier(4, -1.0), std::invalid_argument);
  }

  TEST_CASE("antenna_distance") {
    UePolar ue{2.0, 0.3};
    CHECK(antenna_distance(kGeom28, ue, 1) == doctest::Approx(2.0).epsilon(1e-15));

    // reference-evaluated value for r=2, aod=0, n=2 at 28 GHz half-wavelength
    UePolar broadside{2.0, 0.0};
    CHECK(antenna_distance(kGeom28, broadside, 2) ==
          doctest::Approx(2.000007164808425).epsilon(1e-12));

    // collinear limit: aod -> pi/2, antennas along the UE direction
    ArrayGeometry tight = ArrayGeometry::from_carrier_with_spacing(8, 28e9, 0.005);
    UePolar collinear{2.0, kPi / 2 - 1e-9};
    CHECK(antenna_distance(tight, collinear, 3) == doctest::Approx(1.99).epsilon(1e-6));

    CHECK_THROWS_AS(antenna_distance(kGeom28, ue, 0), std::invalid_argument);
    CHECK_THROWS_AS(antenna_distance(kGeom28, ue, kGeom28.n_antennas + 1), std::invalid_argument);
  }

  TEST_CASE("antenna_aod") {
    UePolar ue{2.0, -0.4};
    CHECK(antenna_aod(kGeom28, ue, 1) == doctest::Approx(std::abs(ue.aod_rad)).epsilon(1e-12));
    CHECK(antenna_aod(kGeom28, UePolar{2.0, 0.0}, 1) == doctest::Approx(0.0));

    // independent evaluation of Eqs.-style chain for n=100 (exact value;
    // the coarse figure 0.25848 carries rounding from intermediate constants)
    const double got = antenna_aod(kGeom28, UePolar{2.0, 0.0}, 100);
    CHECK(got == doctest::Approx(0.2590411698772139).epsilon(1e-12));
    CHECK(std::abs(got - 0.25848) < 1e-3);
  }

  TEST_CASE("path_loss") {
    PathLossModel m{30.0, 1.0, 3.0};
    CHECK(path_loss(m, 1.0) == doctest::Approx(1e-3).epsilon(1e-12));
    CHECK(path_loss(m, 2.0) == doctest::Approx(1.25e-4).epsilon(1e-12));
    CHECK(path_loss(PathLossModel{0.0, 1.0, 0.0}, 123.4) == doctest::Approx(1.0));
    CHECK_THROWS_AS(path_loss(m, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(path_loss(m, -2.0), std::invalid_argument);
  }

  TEST_CASE("radiation_gain") {
    CHECK(radiation_gain(0.0) == doctest::Approx(1.0));
    CHECK(radiation_gain(kPi / 3) == doctest::Approx(0.125).epsilon(1e-12));
    CHECK(radiation_gain(kPi / 4) == doctest::Approx(0.35355339059327384).epsilon(1e-12));
    CHECK(radiation_gain(-kPi / 3) == doctest::Approx(radiation_gain(kPi / 3)));  // even
    CHECK_THROWS_AS(radiation_gain(kPi / 2), std::invalid_argument);
  }

  TEST_CASE("channel_vector matches the straight-line oracle") {
    ArrayGeometry geom = ArrayGeometry::from_carrier(4, 28e9);
    PathLossModel model{30.0, 1.0, 3.0};
    UePolar ue{2.0, kPi / 6};
    const CVec h = channel_vector(geom, ue, model);
    for (int n = 1; n <= 4; ++n) {
      const cxd expect = oracle::channel_entry(ue.range_m, ue.aod_rad, n, geom.wavelength_m,
                                               geom.spacing_m, 30.0, 1.0, 3.0);
      CHECK(std::abs(h(n - 1) - expect) < 1e-15);
    }
  }

  TEST_CASE("channel_vector magnitude identities") {
    ArrayGeometry geom1 = ArrayGeometry::from_carrier(1, 28e9);
    PathLossModel model{30.0, 1.0, 3.0};
    const CVec h1 = channel_vector(geom1, UePolar{1.0, 0.0}, model);
    CHECK(std::abs(h1(0)) == doctest::Approx(std::sqrt(1e-3)).epsilon(1e-12));

    ArrayGeometry geom = ArrayGeometry::from_carrier(32, 28e9);
    UePolar ue{2.5, 0.7};
    const CVec h = channel_vector(geom, ue, model);
    for (int n = 1; n <= geom.n_antennas; ++n) {
      const double expected2 = path_loss(model, antenna_distance(geom, ue, n)) *
                               radiation_gain(antenna_aod(geom, ue, n));
      CHECK(std::norm(h(n - 1)) == doctest::Approx(expected2).epsilon(1e-12));
    }
    CHECK(h.allFinite());
  }

  TEST_CASE("projection bound r_{k,n} >= r_k cos(aod)") {
    ArrayGeometry geom = ArrayGeometry::from_carrier(64, 28e9);
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
      UePolar ue{rng.uniform(0.5, 10.0), rng.uniform(-1.2, 1.2)};
      const double floor = ue.range_m * std::cos(ue.aod_rad);
      for (int n = 1; n <= geom.n_antennas; ++n)
        CHECK(antenna_distance(geom, ue, n) >= floor - 1e-12);
      CHECK(antenna_distance(geom, ue, 1) == doctest::Approx(ue.range_m));
    }
  }

  TEST_CASE("gain non-increasing in distance at fixed angle") {
    PathLossModel model{30.0, 1.0, 3.0};
    double prev = path_loss(model, 0.5);
    for (double r = 1.0; r < 50.0; r += 0.5) {
      const double cur = path_loss(model, r);
      CHECK(cur <= prev);
      prev = cur;
    }
  }

  TEST_CASE("mobility model validation") {
    CHECK_THROWS_AS(MobilityModel({{2.0, 1.5}}, 0.5, 0.0), ConfigError);   // AoD escapes
    CHECK_THROWS_AS(MobilityModel({{0.4, 0.0}}, 0.0, 1.0), ConfigError);   // range reaches 0
    CHECK_THROWS_AS(MobilityModel({{2.0, 0.0}}, -0.1, 0.0), ConfigError);  // negative spread
    CHECK_NOTHROW(MobilityModel({{2.0, 0.0}}, kPi / 48, 1.0));
  }

  TEST_CASE("sample_ue_locations") {
    MobilityModel still({{3.0, 0.25}, {4.0, -0.5}}, 0.0, 0.0);
    Rng rng(11);
    const auto fixed = sample_ue_locations(still, rng);
    CHECK(fixed[0].range_m == doctest::Approx(3.0));
    CHECK(fixed[0].aod_rad == doctest::Approx(0.25));
    CHECK(fixed[1].range_m == doctest::Approx(4.0));
    CHECK(fixed[1].aod_rad == doctest::Approx(-0.5));

    MobilityModel moving({{3.0, 0.25}}, kPi / 48, 1.0);
    Rng a(42), b(42);
    for (int i = 0; i < 200; ++i) {
      const auto s1 = sample_ue_locations(moving, a);
      const auto s2 = sample_ue_locations(moving, b);
      CHECK(s1[0].range_m == s2[0].range_m);  // bit-identical under equal seeds
      CHECK(s1[0].aod_rad == s2[0].aod_rad);
      CHECK(s1[0].aod_rad >= 0.25 - kPi / 96);
      CHECK(s1[0].aod_rad <= 0.25 + kPi / 96);
      CHECK(s1[0].range_m >= 2.5);
      CHECK(s1[0].range_m <= 3.5);
    }
  }
}
