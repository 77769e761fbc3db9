#ifndef NFBF_BASELINES_HPP
#define NFBF_BASELINES_HPP

#include "nfbf/fp_realtime.hpp"
#include "nfbf/two_timescale.hpp"

namespace nfbf::baselines {

/// Contiguous equal blocks, remainder assigned to the last chain.
IMat fixed_subarray_pattern(int n_t, int n_rf);

struct BaselineResult {
  CMat f_rf;  // identity for the fully-digital bound
  CMat f_bb;
  RVec trace;
  int iters = 0;
  bool converged = false;

  double final_rate() const { return trace(trace.size() - 1); }
};

/// Performance upper bound: the same FP loop on an unconstrained N_t x K
/// precoder (F_RF = I). Requires K <= N_t.
BaselineResult fully_digital_realtime(const CMat& h, const RVec& sigma2, double p_t,
                                      const fp::FpSettings& settings);

/// All-connected phase-only analog stage: the phase step runs on the
/// N_t*N_RF-dimensional circle manifold.
BaselineResult fully_connected_realtime(const CMat& h, const RVec& sigma2, double p_t, int n_rf,
                                        const fp::FpSettings& settings);

/// Frozen contiguous switch blocks; FP loop over phases and digital only.
BaselineResult fixed_subarray_realtime(const CMat& h, const RVec& sigma2, double p_t, int n_rf,
                                       const fp::FpSettings& settings);

/// Dense unit-modulus analog matrix from a vectorized angle grid.
CMat compose_fully_connected(const RVec& theta_vec, int n_t, int n_rf);

/// Gradient of g0 = -sum-rate with respect to the vectorized phase grid of
/// the fully-connected architecture.
RVec grad_theta_fully_connected(const RVec& theta_vec, int n_t, int n_rf, const CMat& h,
                                const CMat& f_bb, const RVec& sigma2);

/// Two-timescale counterparts: fixed_subarray keeps s frozen (phases-only
/// SSCA), fully_connected drops the switch stage entirely, dynamic_subarray
/// forwards to tts::run_superframe. No fully-digital variant exists.
tts::TtsRunResult two_timescale_variant(Architecture arch, const Scenario& scenario,
                                        const tts::SscaParams& params,
                                        const tts::FrameSchedule& schedule, Rng& rng);

}  // namespace nfbf::baselines

#endif
