#ifndef NFBF_SCENARIO_HPP
#define NFBF_SCENARIO_HPP

#include "nfbf/channel.hpp"
#include "nfbf/types.hpp"

namespace nfbf {

/// Full physical configuration of one experiment instance: array, propagation
/// model, UE location statistics, noise and power budget.
struct Scenario {
  ArrayGeometry geometry;
  PathLossModel path_loss;
  MobilityModel mobility;
  int n_rf = 1;
  double noise_dbm = -80.0;
  double p_t_w = 1.0;

  int n_ues() const { return mobility.n_ues(); }

  RVec sigma2() const {
    return RVec::Constant(n_ues(), dbm_to_watt(noise_dbm));
  }

  /// Channel at the mobility centers (no random draw).
  CMat center_channel() const { return channel_matrix(geometry, mobility.centers, path_loss); }

  /// Channel for one random UE location draw.
  CMat sample_channel(Rng& rng) const {
    return channel_matrix(geometry, sample_ue_locations(mobility, rng), path_loss);
  }
};

}  // namespace nfbf

#endif
