#ifndef NFBF_FP_REALTIME_HPP
#define NFBF_FP_REALTIME_HPP

#include <optional>

#include "nfbf/beamform.hpp"
#include "nfbf/manifold.hpp"
#include "nfbf/types.hpp"

namespace nfbf::fp {

enum class SwitchMode { exact_enumeration, row_coordinate_descent };

struct FpSettings {
  int max_outer_iters = 50;
  double rel_tol = 1e-4;
  SwitchMode switch_mode = SwitchMode::row_coordinate_descent;
  int switch_max_sweeps = 10;
  // run() first drives the frozen-switch design to its fixed point so the
  // switch stage starts from mature FP weights. -1: cap at max_outer_iters,
  // 0: disable the warm start.
  int warmup_max_iters = -1;
  // After the main loop, alternate rate-checked antenna pruning with
  // frozen-switch polish rounds. The delta subproblem of the switch stage
  // cannot see the power the digital rescale recovers from a disconnected
  // antenna, so the off mode has to be driven by the achieved rate itself.
  int prune_rounds = 6;
  manifold::RcgSettings rcg;
};

/// Block state of the alternating design. The Lagrange multipliers of the
/// dual transform are analytically eliminated and never stored; mu equals
/// the per-UE SINR at its optimum and d_mat = sum_j |xi_j|^2 h_j h_j^H.
struct FpState {
  RVec mu;
  CVec xi;
  CMat d_mat;
  AnalogBeamformer analog;
  CMat f_bb;
};

CMat build_d(const CMat& h, const CVec& xi);

/// mu_k^* = SINR_k.
RVec update_mu(const CMat& h, const CMat& f_rf, const CMat& f_bb, const RVec& sigma2);

/// xi_k^* = sqrt(1+mu_k) h_k^H F_RF f_k / C_k with
/// C_k = sum_j |h_k^H F_RF f_j|^2 + sigma2_k.
CVec update_xi(const CMat& h, const CMat& f_rf, const CMat& f_bb, const RVec& mu,
               const RVec& sigma2);

/// delta = sum_k ( 2 sqrt(1+mu_k) Re{xi_k^* h_k^H F_RF f_k}
///                 - f_k^H F_RF^H D F_RF f_k ), F_RF composed from state.analog.
double delta_objective(const FpState& state, const CMat& h, const CMat& f_bb);

/// Full transformed objective in bits. Every block update is monotone in this
/// quantity, and at (mu*, xi*) it equals sum_k log2(1+SINR_k) exactly.
double fp_objective_bits(const CMat& h, const RVec& mu, const CVec& xi, const CMat& f_rf,
                         const CMat& f_bb, const RVec& sigma2);

/// Best feasible switch matrix for fixed phases/digital beamformer.
/// row_coordinate_descent: best-response sweeps over rows, monotone in delta,
/// initialized at state.analog.switches. exact_enumeration: global optimum
/// over all (N_RF+1)^{N_t} assignments; throws CapacityError above 1e7.
IMat optimize_switch(const FpState& state, const CMat& h, const CMat& f_bb, SwitchMode mode,
                     int max_sweeps = 10);

/// Phase step: assembles the circle-manifold quadratic (Q, q) for the given
/// switch matrix and runs RCG from the current angles. Never decreases delta.
RVec optimize_phase(const FpState& state, const CMat& h, const CMat& f_bb, const IMat& switches,
                    const manifold::RcgSettings& rcg);

/// Unconstrained per-column optimum (F_RF^H D F_RF)^{-1} sqrt(1+mu_k) xi_k
/// F_RF^H h_k, then scaled to meet ||F_RF F_BB||_F^2 = p_t. Singular systems
/// are diagonally loaded; n_loadings (optional) counts such solves.
CMat update_digital(const FpState& state, const CMat& h, double p_t, int* n_loadings = nullptr);

/// Lower-level digital solve shared with the baselines (f_rf passed
/// explicitly). Falls back to f_bb_prev when the right-hand side vanishes.
CMat solve_digital(const CMat& f_rf, const CMat& d_mat, const RVec& mu, const CVec& xi,
                   const CMat& h, double p_t, const CMat& f_bb_prev, int* n_loadings = nullptr);

struct FpResult {
  AnalogBeamformer analog;
  CMat f_bb;
  RVec trace;  // sum-rate at init, then after each outer iteration
  int iters = 0;
  bool converged = false;
  int digital_loadings = 0;
  int warmup_iters = 0;
};

/// Deterministic feasible start: contiguous fixed-subarray switch pattern,
/// phases matched per antenna to the strongest UE there.
AnalogBeamformer default_init_analog(const CMat& h, int n_rf);

/// Matched-filter digital start scaled to the power budget.
CMat default_init_digital(const CMat& h, const CMat& f_rf, double p_t);

/// Real-time dynamic hybrid design: alternate mu, xi, S, theta, F_BB until
/// the sum-rate change falls below rel_tol or max_outer_iters is hit.
FpResult run(const CMat& h, const RVec& sigma2, double p_t, int n_rf, const FpSettings& settings);

FpResult run_from(const CMat& h, const RVec& sigma2, double p_t, const FpSettings& settings,
                  const AnalogBeamformer& analog0, const CMat& f_bb0);

/// The same loop with the switch matrix frozen (the fixed-subarray machinery
/// and the warm-start phase of run()).
FpResult run_frozen_switch(const CMat& h, const RVec& sigma2, double p_t,
                           const FpSettings& settings, const AnalogBeamformer& analog0,
                           const CMat& f_bb0);

struct PruneResult {
  int n_pruned = 0;
  double rate = 0.0;
};

/// One greedy pass of rate-checked antenna deactivation over the ineffective
/// rows (channel row norm below weak_threshold times the array mean; far-field
/// channels have no such rows and are left untouched). A candidate row is
/// zeroed, the digital stage re-solved (MMSE on the shrunken effective
/// channel, power enforced) and the move kept only when the exact sum rate
/// improves. Also re-solves the digital stage in place when that alone
/// improves the rate. analog/f_bb are updated in place.
PruneResult prune_antennas(const CMat& h, const RVec& sigma2, double p_t,
                           AnalogBeamformer& analog, CMat& f_bb,
                           double weak_threshold = 0.7);

}  // namespace nfbf::fp

#endif
