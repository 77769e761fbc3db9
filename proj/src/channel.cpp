#include "nfbf/channel.hpp"

#include <cmath>
#include <string>

namespace nfbf {

ArrayGeometry ArrayGeometry::from_carrier(int n_antennas, double carrier_freq_hz) {
  const double lambda = kSpeedOfLight / carrier_freq_hz;
  return from_carrier_with_spacing(n_antennas, carrier_freq_hz, lambda / 2.0);
}

ArrayGeometry ArrayGeometry::from_carrier_with_spacing(int n_antennas, double carrier_freq_hz,
                                                       double spacing_m) {
  if (n_antennas <= 0) throw std::invalid_argument("ArrayGeometry: n_antennas must be positive");
  if (carrier_freq_hz <= 0.0)
    throw std::invalid_argument("ArrayGeometry: carrier frequency must be positive");
  if (spacing_m <= 0.0) throw std::invalid_argument("ArrayGeometry: spacing must be positive");
  ArrayGeometry g;
  g.n_antennas = n_antennas;
  g.carrier_freq_hz = carrier_freq_hz;
  g.wavelength_m = kSpeedOfLight / carrier_freq_hz;
  g.spacing_m = spacing_m;
  return g;
}

MobilityModel::MobilityModel(std::vector<UePolar> centers_in, double aod_spread, double range_spread)
    : centers(std::move(centers_in)), aod_spread_rad(aod_spread), range_spread_m(range_spread) {
  if (aod_spread_rad < 0.0 || range_spread_m < 0.0)
    throw ConfigError("MobilityModel: spreads must be nonnegative");
  for (const auto& c : centers) {
    const double aod_lo = c.aod_rad - aod_spread_rad / 2.0;
    const double aod_hi = c.aod_rad + aod_spread_rad / 2.0;
    if (aod_lo <= -kPi / 2.0 || aod_hi >= kPi / 2.0)
      throw ConfigError("MobilityModel: AoD interval escapes (-pi/2, pi/2)");
    if (c.range_m - range_spread_m / 2.0 <= 0.0)
      throw ConfigError("MobilityModel: range interval reaches r <= 0");
  }
}

double antenna_distance(const ArrayGeometry& geom, const UePolar& ue, int n) {
  if (n < 1 || n > geom.n_antennas)
    throw std::invalid_argument("antenna_distance: antenna index out of range");
  const double y = (n - 1) * geom.spacing_m;
  const double r = ue.range_m;
  return std::sqrt(r * r + y * y - 2.0 * y * r * std::sin(ue.aod_rad));
}

double antenna_aod(const ArrayGeometry& geom, const UePolar& ue, int n) {
  const double r_n = antenna_distance(geom, ue, n);
  if (r_n <= 0.0) throw std::invalid_argument("antenna_aod: degenerate geometry, r_{k,n} = 0");
  double c = ue.range_m * std::cos(ue.aod_rad) / r_n;
  if (c > 1.0 || c < -1.0) {
    if (std::abs(c) - 1.0 > 1e-12)
      throw NumericError("antenna_aod: arccos argument outside [-1,1] by " +
                         std::to_string(std::abs(c) - 1.0));
    c = (c > 0.0) ? 1.0 : -1.0;
  }
  return std::acos(c);
}

double path_loss(const PathLossModel& model, double r_m) {
  if (r_m <= 0.0) throw std::invalid_argument("path_loss: distance must be positive");
  return std::pow(10.0, -model.c0_db / 10.0) * std::pow(r_m / model.d0_m, -model.exponent);
}

double radiation_gain(double aod_rad) {
  if (std::abs(aod_rad) >= kPi / 2.0)
    throw std::invalid_argument("radiation_gain: |aod| must be < pi/2");
  const double c = std::cos(aod_rad);
  return c * c * c;
}

CVec channel_vector(const ArrayGeometry& geom, const UePolar& ue, const PathLossModel& model) {
  CVec h(geom.n_antennas);
  const double two_pi_over_lambda = 2.0 * kPi / geom.wavelength_m;
  for (int n = 1; n <= geom.n_antennas; ++n) {
    const double r_n = antenna_distance(geom, ue, n);
    const double gain = std::sqrt(path_loss(model, r_n) * radiation_gain(antenna_aod(geom, ue, n)));
    h(n - 1) = std::polar(gain, -two_pi_over_lambda * r_n);
  }
  return h;
}

CMat channel_matrix(const ArrayGeometry& geom, const std::vector<UePolar>& ues,
                    const PathLossModel& model) {
  CMat h(geom.n_antennas, static_cast<int>(ues.size()));
  for (std::size_t k = 0; k < ues.size(); ++k) h.col(static_cast<int>(k)) = channel_vector(geom, ues[k], model);
  return h;
}

std::vector<UePolar> sample_ue_locations(const MobilityModel& mobility, Rng& rng) {
  std::vector<UePolar> out;
  out.reserve(mobility.centers.size());
  for (const auto& c : mobility.centers) {
    UePolar ue;
    ue.aod_rad = rng.uniform(c.aod_rad - mobility.aod_spread_rad / 2.0,
                             c.aod_rad + mobility.aod_spread_rad / 2.0);
    ue.range_m = rng.uniform(c.range_m - mobility.range_spread_m / 2.0,
                             c.range_m + mobility.range_spread_m / 2.0);
    out.push_back(ue);
  }
  return out;
}

}  // namespace nfbf
