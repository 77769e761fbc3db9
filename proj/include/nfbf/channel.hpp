#ifndef NFBF_CHANNEL_HPP
#define NFBF_CHANNEL_HPP

#include <vector>

#include "nfbf/rng.hpp"
#include "nfbf/types.hpp"

namespace nfbf {

/// Uniform linear array along the y-axis with the reference point at the
/// bottom element: antenna n (1-based) sits at (0, (n-1)*spacing).
struct ArrayGeometry {
  int n_antennas = 0;
  double carrier_freq_hz = 0.0;
  double wavelength_m = 0.0;
  double spacing_m = 0.0;

  /// Half-wavelength array for a given carrier.
  static ArrayGeometry from_carrier(int n_antennas, double carrier_freq_hz);
  /// Same, but with an explicit element spacing.
  static ArrayGeometry from_carrier_with_spacing(int n_antennas, double carrier_freq_hz,
                                                 double spacing_m);
};

/// UE position in polar form relative to the array reference point.
/// aod_rad must lie strictly inside (-pi/2, pi/2) so every per-antenna AoD
/// stays in the radiation-gain domain. Any range_m > 0 is accepted; validity
/// of the propagation model at very short range is the caller's concern.
struct UePolar {
  double range_m = 0.0;
  double aod_rad = 0.0;
};

/// L(r) = 10^(-c0_db/10) * (r/d0_m)^(-exponent), amplitude-squared units.
struct PathLossModel {
  double c0_db = 30.0;
  double d0_m = 1.0;
  double exponent = 3.0;
};

/// Per-UE uniform location distribution: aod ~ U[center-aod_spread/2,
/// center+aod_spread/2], range ~ U[center-range_spread/2, center+range_spread/2].
/// The constructor-checked invariants guarantee every sample is a valid UePolar.
struct MobilityModel {
  std::vector<UePolar> centers;
  double aod_spread_rad = 0.0;
  double range_spread_m = 0.0;

  MobilityModel() = default;
  MobilityModel(std::vector<UePolar> centers, double aod_spread_rad, double range_spread_m);

  int n_ues() const { return static_cast<int>(centers.size()); }
};

/// Exact element-to-UE distance (spherical wavefront, no plane-wave
/// approximation). Antenna index n is 1-based.
double antenna_distance(const ArrayGeometry& geom, const UePolar& ue, int n);

/// AoD seen from antenna n, in [0, pi). The arccos argument is clamped when
/// within 1e-12 of [-1, 1]; a larger excursion is a genuine geometry bug and
/// throws NumericError.
double antenna_aod(const ArrayGeometry& geom, const UePolar& ue, int n);

double path_loss(const PathLossModel& model, double r_m);

/// Element radiation gain cos(aod)^3, defined on |aod| < pi/2.
double radiation_gain(double aod_rad);

/// Near-field channel vector: h[n] = sqrt(L_n * G_n) * exp(-j*2*pi*r_n/lambda).
CVec channel_vector(const ArrayGeometry& geom, const UePolar& ue, const PathLossModel& model);

/// N_t x K matrix whose k-th column is channel_vector for ues[k].
CMat channel_matrix(const ArrayGeometry& geom, const std::vector<UePolar>& ues,
                    const PathLossModel& model);

/// One independent location draw per UE. Deterministic for a given stream.
std::vector<UePolar> sample_ue_locations(const MobilityModel& mobility, Rng& rng);

}  // namespace nfbf

#endif
