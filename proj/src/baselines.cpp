#include "nfbf/baselines.hpp"

#include <cmath>
#include <vector>

namespace nfbf::baselines {

namespace {

constexpr double kLn2 = 0.6931471805599453;

RVec run_trace_to_vec(const std::vector<double>& trace) {
  return Eigen::Map<const RVec>(trace.data(), static_cast<int>(trace.size()));
}

bool converged_step(double rate, double prev, double rel_tol) {
  return std::abs(rate - prev) <= rel_tol * std::max(std::abs(prev), 1e-12);
}

}  // namespace

IMat fixed_subarray_pattern(int n_t, int n_rf) {
  IMat s = IMat::Zero(n_t, n_rf);
  const int block = n_t / n_rf;
  for (int n = 0; n < n_t; ++n)
    s(n, block > 0 ? std::min(n / block, n_rf - 1) : n_rf - 1) = 1;
  return s;
}

BaselineResult fully_digital_realtime(const CMat& h, const RVec& sigma2, double p_t,
                                      const fp::FpSettings& settings) {
  const int n_t = static_cast<int>(h.rows());
  if (h.cols() > n_t)
    throw std::invalid_argument("fully_digital_realtime: requires K <= N_t");
  const CMat identity = CMat::Identity(n_t, n_t);

  BaselineResult res;
  res.f_rf = identity;
  res.f_bb = enforce_power(identity, h, p_t);  // matched-filter start

  std::vector<double> trace;
  trace.push_back(sum_rate(sinr(h, identity, res.f_bb, sigma2)));
  for (int it = 1; it <= settings.max_outer_iters; ++it) {
    const RVec mu = fp::update_mu(h, identity, res.f_bb, sigma2);
    const CVec xi = fp::update_xi(h, identity, res.f_bb, mu, sigma2);
    const CMat d_mat = fp::build_d(h, xi);
    res.f_bb = fp::solve_digital(identity, d_mat, mu, xi, h, p_t, res.f_bb);
    const double rate = sum_rate(sinr(h, identity, res.f_bb, sigma2));
    trace.push_back(rate);
    res.iters = it;
    if (converged_step(rate, trace[trace.size() - 2], settings.rel_tol)) {
      res.converged = true;
      break;
    }
  }
  res.trace = run_trace_to_vec(trace);
  return res;
}

CMat compose_fully_connected(const RVec& theta_vec, int n_t, int n_rf) {
  const double rho = 1.0 / std::sqrt(static_cast<double>(n_t));
  CMat f_rf(n_t, n_rf);
  for (int l = 0; l < n_rf; ++l)
    for (int n = 0; n < n_t; ++n) f_rf(n, l) = std::polar(rho, theta_vec(n + l * n_t));
  return f_rf;
}

RVec grad_theta_fully_connected(const RVec& theta_vec, int n_t, int n_rf, const CMat& h,
                                const CMat& f_bb, const RVec& sigma2) {
  const int k_ues = static_cast<int>(h.cols());
  const CMat f_rf = compose_fully_connected(theta_vec, n_t, n_rf);
  const CMat eff = h.adjoint() * f_rf * f_bb;
  const cxd imag_unit(0.0, 1.0);

  RVec grad = RVec::Zero(n_t * n_rf);
  for (int k = 0; k < k_ues; ++k) {
    double gamma_k = sigma2(k);
    for (int i = 0; i < k_ues; ++i) gamma_k += std::norm(eff(k, i));
    const double gamma_mk = gamma_k - std::norm(eff(k, k));
    for (int i = 0; i < k_ues; ++i) {
      const double w = 1.0 / gamma_k - (i != k ? 1.0 / gamma_mk : 0.0);
      if (w == 0.0) continue;
      const cxd z = eff(k, i);
      for (int l = 0; l < n_rf; ++l)
        for (int n = 0; n < n_t; ++n) {
          const int j = n + l * n_t;
          // m_j = h_k(n) conj(f_i(l)); a(j) = -2 Re{ j x_j^* m_j z }
          const cxd m = h(n, k) * std::conj(f_bb(l, i));
          const double a = -2.0 * (imag_unit * std::conj(f_rf(n, l)) * m * z).real();
          grad(j) += w * a;
        }
    }
  }
  return -grad / kLn2;
}

BaselineResult fully_connected_realtime(const CMat& h, const RVec& sigma2, double p_t, int n_rf,
                                        const fp::FpSettings& settings) {
  const int n_t = static_cast<int>(h.rows());
  const int k_ues = static_cast<int>(h.cols());
  const double rho = 1.0 / std::sqrt(static_cast<double>(n_t));

  // Column l phase-matched to UE l (mod K).
  RVec theta_vec(n_t * n_rf);
  for (int l = 0; l < n_rf; ++l)
    for (int n = 0; n < n_t; ++n) theta_vec(n + l * n_t) = std::arg(h(n, l % k_ues));

  BaselineResult res;
  res.f_rf = compose_fully_connected(theta_vec, n_t, n_rf);
  res.f_bb = fp::default_init_digital(h, res.f_rf, p_t);

  std::vector<double> trace;
  trace.push_back(sum_rate(sinr(h, res.f_rf, res.f_bb, sigma2)));
  for (int it = 1; it <= settings.max_outer_iters; ++it) {
    const RVec mu = fp::update_mu(h, res.f_rf, res.f_bb, sigma2);
    const CVec xi = fp::update_xi(h, res.f_rf, res.f_bb, mu, sigma2);
    const CMat d_mat = fp::build_d(h, xi);

    // min x^H Q x - 2 Re{x^H q} over the N_t*N_RF circle, x = vec(F_RF):
    // Q = kron(conj(F_BB F_BB^H), D), q = sum_k sqrt(1+mu_k) xi_k vec(h_k f_k^H).
    const CMat b = (res.f_bb * res.f_bb.adjoint()).conjugate();
    manifold::CircleQuadraticProblem problem;
    problem.radius = rho;
    problem.q_mat = CMat::Zero(n_t * n_rf, n_t * n_rf);
    for (int l = 0; l < n_rf; ++l)
      for (int lp = 0; lp < n_rf; ++lp)
        problem.q_mat.block(l * n_t, lp * n_t, n_t, n_t) = b(l, lp) * d_mat;
    problem.q_mat = 0.5 * (problem.q_mat + CMat(problem.q_mat.adjoint()));
    problem.q_vec = CVec::Zero(n_t * n_rf);
    for (int k = 0; k < k_ues; ++k) {
      const double scale = std::sqrt(1.0 + mu(k));
      for (int l = 0; l < n_rf; ++l)
        for (int n = 0; n < n_t; ++n)
          problem.q_vec(n + l * n_t) +=
              scale * xi(k) * h(n, k) * std::conj(res.f_bb(l, k));
    }

    CVec x0(n_t * n_rf);
    for (int j = 0; j < x0.size(); ++j) x0(j) = std::polar(rho, theta_vec(j));
    const auto sol = manifold::solve(problem, x0, settings.rcg);
    for (int j = 0; j < x0.size(); ++j) theta_vec(j) = std::arg(sol.phi(j));
    res.f_rf = compose_fully_connected(theta_vec, n_t, n_rf);

    res.f_bb = fp::solve_digital(res.f_rf, d_mat, mu, xi, h, p_t, res.f_bb);
    const double rate = sum_rate(sinr(h, res.f_rf, res.f_bb, sigma2));
    trace.push_back(rate);
    res.iters = it;
    if (converged_step(rate, trace[trace.size() - 2], settings.rel_tol)) {
      res.converged = true;
      break;
    }
  }
  res.trace = run_trace_to_vec(trace);
  return res;
}

BaselineResult fixed_subarray_realtime(const CMat& h, const RVec& sigma2, double p_t, int n_rf,
                                       const fp::FpSettings& settings) {
  fp::FpState state;
  state.analog = fp::default_init_analog(h, n_rf);
  state.analog.switches = fixed_subarray_pattern(static_cast<int>(h.rows()), n_rf);
  CMat f_rf = compose(state.analog);
  state.f_bb = fp::default_init_digital(h, f_rf, p_t);

  BaselineResult res;
  std::vector<double> trace;
  trace.push_back(sum_rate(sinr(h, f_rf, state.f_bb, sigma2)));
  for (int it = 1; it <= settings.max_outer_iters; ++it) {
    state.mu = fp::update_mu(h, f_rf, state.f_bb, sigma2);
    state.xi = fp::update_xi(h, f_rf, state.f_bb, state.mu, sigma2);
    state.d_mat = fp::build_d(h, state.xi);
    state.analog.theta =
        fp::optimize_phase(state, h, state.f_bb, state.analog.switches, settings.rcg);
    f_rf = compose(state.analog);
    state.f_bb = fp::update_digital(state, h, p_t);
    const double rate = sum_rate(sinr(h, f_rf, state.f_bb, sigma2));
    trace.push_back(rate);
    res.iters = it;
    if (converged_step(rate, trace[trace.size() - 2], settings.rel_tol)) {
      res.converged = true;
      break;
    }
  }
  res.f_rf = f_rf;
  res.f_bb = state.f_bb;
  res.trace = run_trace_to_vec(trace);
  return res;
}

tts::TtsRunResult two_timescale_variant(Architecture arch, const Scenario& scenario,
                                        const tts::SscaParams& params,
                                        const tts::FrameSchedule& schedule, Rng& rng) {
  if (arch == Architecture::dynamic_subarray)
    return tts::run_superframe(scenario, params, schedule, rng);
  if (arch == Architecture::fully_digital)
    throw std::invalid_argument("two_timescale_variant: no fully-digital two-timescale design");

  const int n_t = scenario.geometry.n_antennas;
  const int n_rf = scenario.n_rf;
  const RVec sigma2 = scenario.sigma2();
  const CMat h_center = scenario.center_channel();
  const bool fixed_sub = arch == Architecture::fixed_subarray;

  // Phase state: per-antenna for FS, full N_t*N_RF grid for FC.
  const int dim = fixed_sub ? n_t : n_t * n_rf;
  RVec theta(dim);
  IMat pattern = fixed_subarray_pattern(n_t, n_rf);
  RVec s_fixed;
  if (fixed_sub) {
    const RMat sm = pattern.cast<double>();
    s_fixed = Eigen::Map<const RVec>(sm.data(), sm.size());
    for (int n = 0; n < n_t; ++n) {
      int strongest = 0;
      for (int k = 1; k < h_center.cols(); ++k)
        if (std::abs(h_center(n, k)) > std::abs(h_center(n, strongest))) strongest = k;
      theta(n) = std::arg(h_center(n, strongest));
    }
  } else {
    for (int l = 0; l < n_rf; ++l)
      for (int n = 0; n < n_t; ++n)
        theta(n + l * n_t) = std::arg(h_center(n, l % h_center.cols()));
  }

  auto compose_current = [&](const RVec& th) -> CMat {
    if (fixed_sub) {
      AnalogBeamformer a;
      a.theta = th;
      a.switches = pattern;
      return compose(a);
    }
    return compose_fully_connected(th, n_t, n_rf);
  };

  double v = 0.0;
  RVec v_theta = RVec::Ones(dim);
  CMat f_rf = compose_current(theta);
  CMat f_bb = CMat::Zero(n_rf, scenario.n_ues());

  tts::TtsRunResult res;
  res.frame_rates = RVec::Zero(schedule.t_frames);

  for (int t = 1; t <= schedule.t_frames; ++t) {
    double rate_sum = 0.0;
    for (int ts = 0; ts < schedule.ts_slots; ++ts) {
      const CMat h_slot = scenario.sample_channel(rng);
      const CMat h_eff = h_slot.adjoint() * f_rf;
      if (h_eff.norm() > 0.0) {
        f_bb = tts::mmse_digital(h_eff, sigma2, f_rf, scenario.p_t_w);
        rate_sum += sum_rate(sinr(h_slot, f_rf, f_bb, sigma2));
      }
    }
    res.frame_rates(t - 1) = rate_sum / schedule.ts_slots;

    const CMat h_stat = scenario.sample_channel(rng);
    const CMat h_eff_stat = h_stat.adjoint() * f_rf;
    CMat f_bb_stat = CMat::Zero(n_rf, scenario.n_ues());
    if (h_eff_stat.norm() > 0.0)
      f_bb_stat = tts::mmse_digital(h_eff_stat, sigma2, f_rf, scenario.p_t_w);

    const double rho_t = params.rho(t);
    const double g = -sum_rate(sinr(h_stat, f_rf, f_bb_stat, sigma2));
    const RVec grad = fixed_sub
                          ? tts::grad_theta_g0(theta, s_fixed, n_rf, h_stat, f_bb_stat, sigma2)
                          : grad_theta_fully_connected(theta, n_t, n_rf, h_stat, f_bb_stat,
                                                       sigma2);
    v = (1.0 - rho_t) * v + rho_t * g;
    v_theta = (1.0 - rho_t) * v_theta + rho_t * grad;

    const RVec theta_bar = theta - v_theta / (2.0 * params.tau);
    theta = (1.0 - rho_t) * theta + rho_t * theta_bar;
    f_rf = compose_current(theta);
  }

  res.analog.theta = theta;  // FC: vectorized N_t*N_RF phase grid, no switches
  res.analog.switches = fixed_sub ? pattern : IMat(0, 0);
  res.f_bb = f_bb;
  res.mean_rate = res.frame_rates.mean();
  const int tail = std::max(1, schedule.t_frames / 5);
  res.plateau_rate = res.frame_rates.tail(tail).mean();
  return res;
}

}  // namespace nfbf::baselines
