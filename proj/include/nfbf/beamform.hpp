#ifndef NFBF_BEAMFORM_HPP
#define NFBF_BEAMFORM_HPP

#include <string>
#include <vector>

#include "nfbf/types.hpp"

namespace nfbf {

/// Dynamic-subarray analog beamformer, stored factored: per-antenna phase
/// angles theta and a binary switch matrix S (N_t x N_RF). The dense matrix
/// F_RF = diag(phi) * S with phi_n = exp(j*theta_n)/sqrt(N_t) is composed on
/// demand; the factored form is what the optimizers work on and makes the
/// non-overlap constraint structural.
struct AnalogBeamformer {
  RVec theta;     // length N_t
  IMat switches;  // N_t x N_RF, entries 0/1, at most one 1 per row

  int n_antennas() const { return static_cast<int>(theta.size()); }
  int n_rf() const { return static_cast<int>(switches.cols()); }
  /// Number of antennas connected to some RF chain.
  int n_active() const;

  static AnalogBeamformer zeros(int n_antennas, int n_rf);
};

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> violations;
};

/// F_RF = diag(phi) * S. Throws on a row with more than one active switch.
CMat compose(const AnalogBeamformer& analog);

/// Diagnostic check of the non-overlap / binary constraints. Never throws.
ValidationReport validate(const AnalogBeamformer& analog);

/// Per-UE SINR_k = |h_k^H F_RF f_k|^2 / (sum_{j != k} |h_k^H F_RF f_j|^2 + sigma2_k).
RVec sinr(const CMat& h, const CMat& f_rf, const CMat& f_bb, const RVec& sigma2);

/// sum_k log2(1 + sinr_k).
double sum_rate(const RVec& sinr_values);

/// Scale f_bb_raw so that ||f_rf * f_bb||_F^2 == p_t.
CMat enforce_power(const CMat& f_rf, const CMat& f_bb_raw, double p_t);

enum class Architecture { fully_digital, fully_connected, fixed_subarray, dynamic_subarray };

Architecture architecture_from_string(const std::string& tag);
std::string to_string(Architecture arch);

/// Component power draws in watts.
struct PowerModel {
  double p_t_w = 10.0;
  double p_bb_w = 0.2;
  double p_rf_w = 0.25;
  double p_ps_w = 0.01;
  double p_sw_w = 0.005;
};

/// Total consumption per architecture. m_active only matters for the dynamic
/// subarray (count of connected antennas).
double total_power(Architecture arch, const PowerModel& model, int n_t, int n_rf, int m_active);

double energy_efficiency(double sum_rate_bps_hz, double total_power_w);

enum class EstimationScheme { real_time, two_timescale };

/// Channel coefficients estimated over one super-frame of t_frames frames,
/// ts_slots slots each. real_time: N_t*K*T*T_s. two_timescale: N_t*K*T (one
/// high-dimensional sample per frame) + K*N_RF*T*T_s (effective CSI per slot).
double estimation_overhead(EstimationScheme scheme, int n_t, int n_rf, int k, int t_frames,
                           int ts_slots);

struct LinkMetrics {
  RVec sinr;
  RVec rate_bps_hz;
  double sum_rate = 0.0;
};

LinkMetrics link_metrics(const CMat& h, const CMat& f_rf, const CMat& f_bb, const RVec& sigma2);

}  // namespace nfbf

#endif
