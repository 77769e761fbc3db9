#ifndef NFBF_TWO_TIMESCALE_HPP
#define NFBF_TWO_TIMESCALE_HPP

#include <utility>

#include "nfbf/beamform.hpp"
#include "nfbf/rng.hpp"
#include "nfbf/scenario.hpp"
#include "nfbf/types.hpp"

namespace nfbf::tts {

/// Super-frame layout: T frames of T_s slots each. The analog beamformer is
/// committed once per frame, the digital beamformer once per slot.
struct FrameSchedule {
  int t_frames = 1;
  int ts_slots = 1;
};

struct SscaParams {
  double tau = 1.0;
  double rho_exponent = 0.6;  // rho^t = (1+t)^(-rho_exponent)
  double varrho1 = 0.1;
  double varrho2 = 0.1;
  double c1 = 1.5;
  double c2 = 1.5;
  double epsilon = 1e-3;
  int n_max_inner = 15;
  double inner_tol = 1e-8;
  double activation_threshold = 0.5;
  // rate-checked off-mode pass on the deployed beamformer at each frame end,
  // driven by the frame's statistical channel sample
  bool prune = true;

  double rho(int t) const { return std::pow(1.0 + t, -rho_exponent); }
};

/// Recursive surrogate state. theta is the per-antenna phase vector; s is the
/// relaxed switch vector in [0,1]^{N_t*N_RF}, stored column-major so that
/// s[n + l*N_t] = S(n, l).
struct SurrogateState {
  double v = 0.0;
  RVec v_theta;
  RVec v_s;
  RVec theta;
  RVec s;
  int n_rf = 1;
  int frame_index = 0;  // t of the most recent recursion

  int n_antennas() const { return static_cast<int>(theta.size()); }
  static SurrogateState init(const RVec& theta0, const IMat& switches0);
};

/// Continuous-relaxation analog beamformer: F_RF(n,l) = phi_n * s_{n,l} with
/// phi_n = exp(j*theta_n)/sqrt(N_t).
CMat compose_relaxed(const RVec& theta, const RVec& s, int n_rf);

/// Single-sample objective g0 = -sum_k log2(1+SINR_k) at (theta, s).
double g0(const RVec& theta, const RVec& s, int n_rf, const CMat& h, const CMat& f_bb,
          const RVec& sigma2);

RVec grad_theta_g0(const RVec& theta, const RVec& s, int n_rf, const CMat& h, const CMat& f_bb,
                   const RVec& sigma2);

RVec grad_s_g0(const RVec& theta, const RVec& s, int n_rf, const CMat& h, const CMat& f_bb,
               const RVec& sigma2);

/// One SSCA recursion step on (v, v_theta, v_s) with the frame's channel
/// sample; advances frame_index and anchors the surrogate at (theta^t, s^t).
SurrogateState update_surrogate(const SurrogateState& state, const SscaParams& params,
                                const CMat& h_t, const CMat& f_bb_t, const RVec& sigma2);

/// Quadratic surrogate value f^t(theta, s).
double surrogate_value(const SurrogateState& state, const SscaParams& params, const RVec& theta,
                       const RVec& s);

/// Smooth l0 stand-in g_eps(x) = log(1+x/eps)/log(1+1/eps) on [0,1].
double g_eps(double x, double epsilon);

/// Linear MM majorizers of both Boolean penalties around s_m: each majorizer
/// is lin^T s + constant, touches its original at s_m and upper-bounds it on
/// the box.
struct PenaltyLinearization {
  RVec lin_box;      // for s^T(1-s)
  double const_box = 0.0;
  RVec lin_l0;       // for s_tilde^T(1-s_tilde) through the log chain
  double const_l0 = 0.0;
};

PenaltyLinearization penalty_linearization(const RVec& s_m, int n_rf, double epsilon);

/// Exact penalty values, used by the MM property tests and the inner loop.
double penalty_box(const RVec& s);
double penalty_l0_log(const RVec& s, int n_rf, double epsilon);

/// Coordinate-separable minimizer of f^t + varrho1*(box majorizer) +
/// varrho2*(l0 majorizer) over theta free, s in [0,1].
std::pair<RVec, RVec> solve_inner(const SurrogateState& state, const SscaParams& params,
                                  const PenaltyLinearization& pen, double varrho1, double varrho2);

struct InnerResult {
  RVec theta_bar;
  RVec s_bar;
  int iters = 0;
};

/// Inner MM loop with growing penalties (Algorithm 2 style): relinearize at
/// the current point, solve, grow varrho1/varrho2, until the iterate settles
/// or n_max_inner is reached.
InnerResult inner_loop(const SurrogateState& state, const SscaParams& params);

/// Convex-combination commit of (theta_bar, s_bar) into the state, plus the
/// deployable analog beamformer: each row activates its largest coordinate
/// when it exceeds activation_threshold, otherwise the antenna is off.
struct CommitResult {
  SurrogateState state;
  AnalogBeamformer analog;
};

CommitResult commit_frame(const SurrogateState& state, const SscaParams& params,
                          const RVec& theta_bar, const RVec& s_bar);

/// MMSE digital beamformer from effective CSI, normalized to the power
/// budget. Requires K <= N_RF.
CMat mmse_digital(const CMat& h_eff, const RVec& sigma2, const CMat& f_rf, double p_t);

struct TtsRunResult {
  RVec frame_rates;  // per-frame average sum-rate over slots
  AnalogBeamformer analog;
  CMat f_bb;  // digital beamformer of the last slot
  SurrogateState state;
  double mean_rate = 0.0;
  double plateau_rate = 0.0;  // mean over the last fifth of the frames
};

/// Two-timescale dynamic design over one super-frame (Algorithm 3 style):
/// per slot, draw an instantaneous channel and update the MMSE digital
/// beamformer; per frame end, draw a statistical sample, refresh the
/// surrogate, run the inner loop and commit the next analog beamformer.
TtsRunResult run_superframe(const Scenario& scenario, const SscaParams& params,
                            const FrameSchedule& schedule, Rng& rng);

}  // namespace nfbf::tts

#endif
