#include "nfbf/two_timescale.hpp"

#include <cmath>

#include "nfbf/fp_realtime.hpp"

namespace nfbf::tts {

namespace {

constexpr double kLn2 = 0.6931471805599453;

CVec unit_phases(const RVec& theta) {
  const double rho = 1.0 / std::sqrt(static_cast<double>(theta.size()));
  CVec phi(theta.size());
  for (int n = 0; n < theta.size(); ++n) phi(n) = std::polar(rho, theta(n));
  return phi;
}

RMat s_matrix(const RVec& s, int n_t, int n_rf) {
  return Eigen::Map<const RMat>(s.data(), n_t, n_rf);
}

}  // namespace

SurrogateState SurrogateState::init(const RVec& theta0, const IMat& switches0) {
  SurrogateState st;
  st.theta = theta0;
  st.n_rf = static_cast<int>(switches0.cols());
  const RMat s0 = switches0.cast<double>();
  st.s = Eigen::Map<const RVec>(s0.data(), s0.size());
  st.v = 0.0;
  st.v_theta = RVec::Ones(theta0.size());
  st.v_s = RVec::Ones(st.s.size());
  st.frame_index = 0;
  return st;
}

CMat compose_relaxed(const RVec& theta, const RVec& s, int n_rf) {
  const int n_t = static_cast<int>(theta.size());
  const CVec phi = unit_phases(theta);
  const RMat sm = s_matrix(s, n_t, n_rf);
  CMat f_rf(n_t, n_rf);
  for (int l = 0; l < n_rf; ++l)
    for (int n = 0; n < n_t; ++n) f_rf(n, l) = phi(n) * sm(n, l);
  return f_rf;
}

double g0(const RVec& theta, const RVec& s, int n_rf, const CMat& h, const CMat& f_bb,
          const RVec& sigma2) {
  return -sum_rate(sinr(h, compose_relaxed(theta, s, n_rf), f_bb, sigma2));
}

RVec grad_theta_g0(const RVec& theta, const RVec& s, int n_rf, const CMat& h, const CMat& f_bb,
                   const RVec& sigma2) {
  const int n_t = static_cast<int>(theta.size());
  const int k_ues = static_cast<int>(h.cols());
  const CVec phi = unit_phases(theta);
  const RMat sm = s_matrix(s, n_t, n_rf);
  const CMat f_rf = compose_relaxed(theta, s, n_rf);
  const CMat eff = h.adjoint() * f_rf * f_bb;  // eff(k, i) = h_k^H F_RF f_i

  RVec grad = RVec::Zero(n_t);
  const cxd imag_unit(0.0, 1.0);
  for (int k = 0; k < k_ues; ++k) {
    double gamma_k = sigma2(k);
    for (int i = 0; i < k_ues; ++i) gamma_k += std::norm(eff(k, i));
    const double gamma_mk = gamma_k - std::norm(eff(k, k));
    for (int i = 0; i < k_ues; ++i) {
      const double w = 1.0 / gamma_k - (i != k ? 1.0 / gamma_mk : 0.0);
      if (w == 0.0) continue;
      const CVec c = sm.cast<cxd>() * f_bb.col(i);  // S f_i
      const cxd z = eff(k, i);
      for (int n = 0; n < n_t; ++n) {
        // a^theta_{k,i}(n) = -2 Re{ j phi_n^* m_n z }, m_n = c_n^* h_k(n)
        const double a =
            -2.0 * (imag_unit * std::conj(phi(n)) * std::conj(c(n)) * h(n, k) * z).real();
        grad(n) += w * a;
      }
    }
  }
  return -grad / kLn2;
}

RVec grad_s_g0(const RVec& theta, const RVec& s, int n_rf, const CMat& h, const CMat& f_bb,
               const RVec& sigma2) {
  const int n_t = static_cast<int>(theta.size());
  const int k_ues = static_cast<int>(h.cols());
  const CVec phi = unit_phases(theta);
  const CMat f_rf = compose_relaxed(theta, s, n_rf);
  const CMat eff = h.adjoint() * f_rf * f_bb;

  RVec grad = RVec::Zero(n_t * n_rf);
  for (int k = 0; k < k_ues; ++k) {
    double gamma_k = sigma2(k);
    for (int i = 0; i < k_ues; ++i) gamma_k += std::norm(eff(k, i));
    const double gamma_mk = gamma_k - std::norm(eff(k, k));
    for (int i = 0; i < k_ues; ++i) {
      const double w = 1.0 / gamma_k - (i != k ? 1.0 / gamma_mk : 0.0);
      if (w == 0.0) continue;
      const cxd zc = std::conj(eff(k, i));
      for (int l = 0; l < n_rf; ++l) {
        const cxd fl = f_bb(l, i);
        for (int n = 0; n < n_t; ++n) {
          // a^s_{k,i}(n,l) = 2 Re{ z^* h_k(n)^* phi_n f_i(l) }
          const double a = 2.0 * (zc * std::conj(h(n, k)) * phi(n) * fl).real();
          grad(n + l * n_t) += w * a;
        }
      }
    }
  }
  return -grad / kLn2;
}

SurrogateState update_surrogate(const SurrogateState& state, const SscaParams& params,
                                const CMat& h_t, const CMat& f_bb_t, const RVec& sigma2) {
  const int t = state.frame_index + 1;
  const double rho = params.rho(t);
  if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("update_surrogate: rho out of (0,1]");

  SurrogateState next = state;
  next.frame_index = t;
  next.v = (1.0 - rho) * state.v +
           rho * g0(state.theta, state.s, state.n_rf, h_t, f_bb_t, sigma2);
  next.v_theta = (1.0 - rho) * state.v_theta +
                 rho * grad_theta_g0(state.theta, state.s, state.n_rf, h_t, f_bb_t, sigma2);
  next.v_s = (1.0 - rho) * state.v_s +
             rho * grad_s_g0(state.theta, state.s, state.n_rf, h_t, f_bb_t, sigma2);
  return next;
}

double surrogate_value(const SurrogateState& state, const SscaParams& params, const RVec& theta,
                       const RVec& s) {
  const RVec dt = theta - state.theta;
  const RVec ds = s - state.s;
  return state.v + state.v_theta.dot(dt) + state.v_s.dot(ds) + params.tau * dt.squaredNorm() +
         params.tau * ds.squaredNorm();
}

double g_eps(double x, double epsilon) {
  return std::log(1.0 + x / epsilon) / std::log(1.0 + 1.0 / epsilon);
}

PenaltyLinearization penalty_linearization(const RVec& s_m, int n_rf, double epsilon) {
  const int total = static_cast<int>(s_m.size());
  const int n_t = total / n_rf;
  PenaltyLinearization pen;
  pen.lin_box = RVec::Ones(total) - 2.0 * s_m;
  pen.const_box = s_m.squaredNorm();

  const double log_norm = std::log(1.0 + 1.0 / epsilon);
  RVec u(total), big_u(total);
  for (int j = 0; j < total; ++j) {
    u(j) = g_eps(s_m(j), epsilon);
    big_u(j) = 1.0 / (log_norm * (epsilon + s_m(j)));
  }
  RVec s_tilde_m = RVec::Zero(n_t);
  for (int l = 0; l < n_rf; ++l)
    for (int n = 0; n < n_t; ++n) s_tilde_m(n) += u(n + l * n_t);

  pen.lin_l0 = RVec(total);
  pen.const_l0 = s_tilde_m.squaredNorm();
  for (int l = 0; l < n_rf; ++l)
    for (int n = 0; n < n_t; ++n) {
      const int j = n + l * n_t;
      // The raw MM coefficient 1 - 2*s_tilde_m goes negative for any active
      // row; combined with the steep log linearization it would reward
      // connecting the row to every chain (s_tilde^T(1-s_tilde) is unbounded
      // below past 1). Clamping at zero confines the term to its
      // valid-majorizer regime: it only drives near-off rows to zero, and
      // the box penalty handles per-coordinate binarity.
      const double coeff = std::max(0.0, 1.0 - 2.0 * s_tilde_m(n));
      pen.lin_l0(j) = coeff * big_u(j);
      pen.const_l0 += coeff * (u(j) - big_u(j) * s_m(j));
    }
  return pen;
}

double penalty_box(const RVec& s) { return s.dot(RVec::Ones(s.size()) - s); }

double penalty_l0_log(const RVec& s, int n_rf, double epsilon) {
  const int n_t = static_cast<int>(s.size()) / n_rf;
  double acc = 0.0;
  for (int n = 0; n < n_t; ++n) {
    double st = 0.0;
    for (int l = 0; l < n_rf; ++l) st += g_eps(s(n + l * n_t), epsilon);
    acc += st * (1.0 - st);
  }
  return acc;
}

std::pair<RVec, RVec> solve_inner(const SurrogateState& state, const SscaParams& params,
                                  const PenaltyLinearization& pen, double varrho1,
                                  double varrho2) {
  const RVec theta_star = state.theta - state.v_theta / (2.0 * params.tau);
  RVec s_star = state.s -
                (state.v_s + varrho1 * pen.lin_box + varrho2 * pen.lin_l0) / (2.0 * params.tau);
  s_star = s_star.cwiseMax(0.0).cwiseMin(1.0);
  return {theta_star, s_star};
}

InnerResult inner_loop(const SurrogateState& state, const SscaParams& params) {
  InnerResult res;
  res.theta_bar = state.theta;
  res.s_bar = state.s;
  double r1 = params.varrho1;
  double r2 = params.varrho2;
  for (int m = 1; m <= params.n_max_inner; ++m) {
    const PenaltyLinearization pen = penalty_linearization(res.s_bar, state.n_rf, params.epsilon);
    auto [theta_new, s_new] = solve_inner(state, params, pen, r1, r2);
    const double moved = std::max((theta_new - res.theta_bar).lpNorm<Eigen::Infinity>(),
                                  (s_new - res.s_bar).lpNorm<Eigen::Infinity>());
    res.theta_bar = theta_new;
    res.s_bar = s_new;
    res.iters = m;
    r1 *= params.c1;
    r2 *= params.c2;
    if (moved < params.inner_tol) break;
  }
  return res;
}

CommitResult commit_frame(const SurrogateState& state, const SscaParams& params,
                          const RVec& theta_bar, const RVec& s_bar) {
  const double rho = params.rho(state.frame_index);
  CommitResult out;
  out.state = state;
  out.state.theta = (1.0 - rho) * state.theta + rho * theta_bar;
  out.state.s = ((1.0 - rho) * state.s + rho * s_bar).cwiseMax(0.0).cwiseMin(1.0);

  const int n_t = state.n_antennas();
  out.analog.theta = out.state.theta;
  out.analog.switches = IMat::Zero(n_t, state.n_rf);
  const RMat sm = s_matrix(out.state.s, n_t, state.n_rf);
  for (int n = 0; n < n_t; ++n) {
    int best = 0;
    for (int l = 1; l < state.n_rf; ++l)
      if (sm(n, l) > sm(n, best)) best = l;
    if (sm(n, best) > params.activation_threshold) out.analog.switches(n, best) = 1;
  }
  return out;
}

CMat mmse_digital(const CMat& h_eff, const RVec& sigma2, const CMat& f_rf, double p_t) {
  const int k_ues = static_cast<int>(h_eff.rows());
  if (k_ues > h_eff.cols())
    throw std::invalid_argument("mmse_digital: requires K <= N_RF");
  CMat gram = h_eff * h_eff.adjoint();
  for (int k = 0; k < k_ues; ++k) gram(k, k) += sigma2(k);
  const CMat f_tilde = h_eff.adjoint() * gram.ldlt().solve(CMat::Identity(k_ues, k_ues));
  return enforce_power(f_rf, f_tilde, p_t);
}

TtsRunResult run_superframe(const Scenario& scenario, const SscaParams& params,
                            const FrameSchedule& schedule, Rng& rng) {
  if (schedule.t_frames < 1 || schedule.ts_slots < 1)
    throw std::invalid_argument("run_superframe: schedule must have T, T_s >= 1");
  const RVec sigma2 = scenario.sigma2();
  const int n_rf = scenario.n_rf;

  // Deterministic start from the mobility centers (the statistics the BS
  // knows before any sample): fixed-subarray switches, matched phases.
  const CMat h_center = scenario.center_channel();
  AnalogBeamformer analog = [&] {
    AnalogBeamformer a = AnalogBeamformer::zeros(scenario.geometry.n_antennas, n_rf);
    const int block = scenario.geometry.n_antennas / n_rf;
    for (int n = 0; n < scenario.geometry.n_antennas; ++n) {
      const int l = block > 0 ? std::min(n / block, n_rf - 1) : n_rf - 1;
      a.switches(n, l) = 1;
      int strongest = 0;
      for (int k = 1; k < h_center.cols(); ++k)
        if (std::abs(h_center(n, k)) > std::abs(h_center(n, strongest))) strongest = k;
      a.theta(n) = std::arg(h_center(n, strongest));
    }
    return a;
  }();

  SurrogateState state = SurrogateState::init(analog.theta, analog.switches);
  CMat f_rf = compose(analog);
  CMat f_bb = CMat::Zero(n_rf, scenario.n_ues());

  // Fixed-partition shadow: the dynamic feasible set contains the fixed
  // subarray, so a plain theta-SSCA trajectory on the initial pattern is
  // always available as a deployment candidate.
  const IMat shadow_pattern = analog.switches;
  RVec shadow_theta = analog.theta;
  RVec shadow_v_theta = RVec::Ones(shadow_theta.size());
  const RMat shadow_sm = shadow_pattern.cast<double>();
  const RVec shadow_s = Eigen::Map<const RVec>(shadow_sm.data(), shadow_sm.size());

  TtsRunResult res;
  res.frame_rates = RVec::Zero(schedule.t_frames);

  for (int t = 1; t <= schedule.t_frames; ++t) {
    double rate_sum = 0.0;
    for (int ts = 0; ts < schedule.ts_slots; ++ts) {
      const CMat h_slot = scenario.sample_channel(rng);
      const CMat h_eff = h_slot.adjoint() * f_rf;
      if (h_eff.norm() > 0.0) {
        f_bb = mmse_digital(h_eff, sigma2, f_rf, scenario.p_t_w);
        rate_sum += sum_rate(sinr(h_slot, f_rf, f_bb, sigma2));
      } else {
        f_bb.setZero();  // dead analog stage; slot carries no rate
      }
    }
    res.frame_rates(t - 1) = rate_sum / schedule.ts_slots;

    // Long-timescale step at frame end.
    const CMat h_stat = scenario.sample_channel(rng);
    const CMat h_eff_stat = h_stat.adjoint() * f_rf;
    CMat f_bb_stat = CMat::Zero(n_rf, scenario.n_ues());
    if (h_eff_stat.norm() > 0.0)
      f_bb_stat = mmse_digital(h_eff_stat, sigma2, f_rf, scenario.p_t_w);
    state = update_surrogate(state, params, h_stat, f_bb_stat, sigma2);
    const InnerResult inner = inner_loop(state, params);
    CommitResult commit = commit_frame(state, params, inner.theta_bar, inner.s_bar);
    state = std::move(commit.state);
    AnalogBeamformer candidate = std::move(commit.analog);
    {
      // Deployment rounding is incumbent-sticky: a row whose relaxed blend
      // cleared the threshold moves to its new chain, but a strong row that
      // merely wandered below 0.5 keeps its current connection; only
      // ineffective rows (well below the mean channel norm) may go dark.
      double mean_row = 0.0;
      for (int n = 0; n < h_stat.rows(); ++n) mean_row += h_stat.row(n).norm() / h_stat.rows();
      for (int n = 0; n < candidate.switches.rows(); ++n)
        if (candidate.switches.row(n).sum() == 0 && analog.switches.row(n).sum() > 0 &&
            h_stat.row(n).norm() >= 0.7 * mean_row)
          candidate.switches.row(n) = analog.switches.row(n);
    }
    if (params.prune && candidate.n_active() > 0) {
      // off-mode pass against the frame's statistical sample: the switch
      // rounding cannot see the power the rescale recovers from weak antennas
      const CMat f_rf_frame = compose(candidate);
      const CMat h_eff_frame = h_stat.adjoint() * f_rf_frame;
      if (h_eff_frame.norm() > 0.0) {
        CMat f_frame = mmse_digital(h_eff_frame, sigma2, f_rf_frame, scenario.p_t_w);
        fp::prune_antennas(h_stat, sigma2, scenario.p_t_w, candidate, f_frame);
      }
    }
    // Advance the fixed-partition shadow with the same recursion weights and
    // its own digital response, exactly as the standalone fixed design would.
    const double rho_t = params.rho(state.frame_index);
    {
      AnalogBeamformer shadow_now;
      shadow_now.theta = shadow_theta;
      shadow_now.switches = shadow_pattern;
      const CMat f_rf_shadow = compose(shadow_now);
      const CMat h_eff_shadow = h_stat.adjoint() * f_rf_shadow;
      CMat f_bb_shadow = CMat::Zero(n_rf, scenario.n_ues());
      if (h_eff_shadow.norm() > 0.0)
        f_bb_shadow = mmse_digital(h_eff_shadow, sigma2, f_rf_shadow, scenario.p_t_w);
      shadow_v_theta =
          (1.0 - rho_t) * shadow_v_theta +
          rho_t * grad_theta_g0(shadow_theta, shadow_s, n_rf, h_stat, f_bb_shadow, sigma2);
      shadow_theta = (1.0 - rho_t) * shadow_theta +
                     rho_t * (shadow_theta - shadow_v_theta / (2.0 * params.tau));
    }

    // Deploy whichever beamformer serves the sampled statistics better; the
    // surrogate state itself keeps evolving from the committed point.
    const auto sample_rate = [&](const AnalogBeamformer& a) {
      const CMat f = compose(a);
      const CMat h_eff = h_stat.adjoint() * f;
      if (!(h_eff.norm() > 0.0)) return -1.0;
      return sum_rate(sinr(h_stat, f, mmse_digital(h_eff, sigma2, f, scenario.p_t_w), sigma2));
    };
    AnalogBeamformer shadow;
    shadow.theta = shadow_theta;
    shadow.switches = shadow_pattern;
    double best = sample_rate(analog);
    if (sample_rate(shadow) > best) {
      best = sample_rate(shadow);
      analog = std::move(shadow);
    }
    if (sample_rate(candidate) >= best) analog = std::move(candidate);
    f_rf = compose(analog);
  }

  res.analog = analog;
  res.f_bb = f_bb;
  res.state = state;
  res.mean_rate = res.frame_rates.mean();
  const int tail = std::max(1, schedule.t_frames / 5);
  res.plateau_rate = res.frame_rates.tail(tail).mean();
  return res;
}

}  // namespace nfbf::tts
