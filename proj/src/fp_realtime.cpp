#include "nfbf/fp_realtime.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace nfbf::fp {

namespace {

constexpr double kLn2 = 0.6931471805599453;

double mmse_candidate_rate(const CMat& h, const RVec& sigma2, double p_t,
                           const AnalogBeamformer& candidate, CMat* f_out);
bool mmse_digital_restart(const CMat& h, const RVec& sigma2, double p_t,
                          const AnalogBeamformer& analog, CMat& f_bb, double& rate);
std::vector<double> extrapolated_polish(const CMat& h, const RVec& sigma2, double p_t,
                                        const FpSettings& settings, AnalogBeamformer& analog,
                                        CMat& f_bb, double& rate, int max_jumps);

void ensure_finite(const CMat& m, const char* stage) {
  if (!m.allFinite()) throw NumericError(std::string("fp: non-finite value after ") + stage);
}

CVec phases_of(const AnalogBeamformer& analog) {
  const double rho = 1.0 / std::sqrt(static_cast<double>(analog.n_antennas()));
  CVec phi(analog.n_antennas());
  for (int n = 0; n < phi.size(); ++n) phi(n) = std::polar(rho, analog.theta(n));
  return phi;
}

// Incremental evaluator of delta as a function of the switch assignment,
// with phases, digital beamformer and FP variables fixed. Rows couple only
// through D, so a single-row change is O(N_t K).
class SwitchObjective {
 public:
  SwitchObjective(const FpState& state, const CMat& h, const CMat& f_bb)
      : d_(state.d_mat), f_bb_(f_bb), n_t_(static_cast<int>(h.rows())),
        n_rf_(static_cast<int>(f_bb.rows())), k_(static_cast<int>(h.cols())) {
    phi_ = phases_of(state.analog);
    // lin_(n, l): delta gain of the linear term when row n drives chain l.
    lin_ = RMat::Zero(n_t_, n_rf_);
    for (int n = 0; n < n_t_; ++n)
      for (int l = 0; l < n_rf_; ++l) {
        double acc = 0.0;
        for (int k = 0; k < k_; ++k)
          acc += 2.0 * std::sqrt(1.0 + state.mu(k)) *
                 (std::conj(state.xi(k)) * std::conj(h(n, k)) * phi_(n) * f_bb_(l, k)).real();
        lin_(n, l) = acc;
      }
    choice_.assign(n_t_, 0);
    w_ = CMat::Zero(n_t_, k_);
    z_ = CMat::Zero(n_t_, k_);
    delta_ = 0.0;
  }

  void reset_to(const IMat& switches) {
    choice_.assign(n_t_, 0);
    for (int n = 0; n < n_t_; ++n)
      for (int l = 0; l < n_rf_; ++l)
        if (switches(n, l) != 0) choice_[n] = l + 1;
    w_.setZero();
    for (int n = 0; n < n_t_; ++n)
      if (choice_[n] > 0)
        for (int k = 0; k < k_; ++k) w_(n, k) = phi_(n) * f_bb_(choice_[n] - 1, k);
    z_ = d_ * w_;
    double lin = 0.0, quad = 0.0;
    for (int n = 0; n < n_t_; ++n)
      if (choice_[n] > 0) lin += lin_(n, choice_[n] - 1);
    for (int k = 0; k < k_; ++k) quad += w_.col(k).dot(z_.col(k)).real();
    delta_ = lin - quad;
  }

  double delta() const { return delta_; }
  int choice(int n) const { return choice_[n]; }
  int n_rows() const { return n_t_; }
  int n_options() const { return n_rf_ + 1; }

  // Change in delta if row n moved to `cand` (0 = off, 1..N_RF = chain).
  double probe(int n, int cand) const {
    const int cur = choice_[n];
    if (cand == cur) return 0.0;
    double d_lin = (cand > 0 ? lin_(n, cand - 1) : 0.0) - (cur > 0 ? lin_(n, cur - 1) : 0.0);
    double d_quad = 0.0;
    const double dnn = d_(n, n).real();
    for (int k = 0; k < k_; ++k) {
      const cxd b = cand > 0 ? phi_(n) * f_bb_(cand - 1, k) : cxd(0.0);
      const cxd step = b - w_(n, k);
      d_quad += 2.0 * (std::conj(step) * z_(n, k)).real() + std::norm(step) * dnn;
    }
    return d_lin - d_quad;
  }

  void apply(int n, int cand) {
    const double gain = probe(n, cand);
    for (int k = 0; k < k_; ++k) {
      const cxd b = cand > 0 ? phi_(n) * f_bb_(cand - 1, k) : cxd(0.0);
      const cxd step = b - w_(n, k);
      w_(n, k) = b;
      z_.col(k) += d_.col(n) * step;
    }
    choice_[n] = cand;
    delta_ += gain;
  }

  IMat to_matrix() const {
    IMat s = IMat::Zero(n_t_, n_rf_);
    for (int n = 0; n < n_t_; ++n)
      if (choice_[n] > 0) s(n, choice_[n] - 1) = 1;
    return s;
  }

 private:
  const CMat& d_;
  const CMat& f_bb_;
  int n_t_, n_rf_, k_;
  CVec phi_;
  RMat lin_;
  std::vector<int> choice_;
  CMat w_, z_;
  double delta_ = 0.0;
};

IMat switch_coordinate_descent(SwitchObjective& obj, int max_sweeps) {
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool changed = false;
    for (int n = 0; n < obj.n_rows(); ++n) {
      int best = obj.choice(n);
      double best_gain = 0.0;
      for (int cand = 0; cand < obj.n_options(); ++cand) {
        if (cand == obj.choice(n)) continue;
        const double gain = obj.probe(n, cand);
        if (gain > best_gain) {
          best_gain = gain;
          best = cand;
        }
      }
      if (best != obj.choice(n) && best_gain > 1e-12 * (1.0 + std::abs(obj.delta()))) {
        obj.apply(n, best);
        changed = true;
      }
    }
    if (!changed) break;
  }
  return obj.to_matrix();
}

IMat switch_enumeration(SwitchObjective& obj) {
  const int base = obj.n_options();
  const int rows = obj.n_rows();
  double combos = 1.0;
  for (int n = 0; n < rows; ++n) {
    combos *= base;
    if (combos > 1e7)
      throw CapacityError("optimize_switch: exact enumeration over " + std::to_string(base) +
                          "^" + std::to_string(rows) + " assignments exceeds the 1e7 cap");
  }
  // odometer walk from the all-off assignment, tracking the best state seen
  for (int n = 0; n < rows; ++n) obj.apply(n, 0);
  double best = obj.delta();
  std::vector<int> best_choice(rows, 0);
  std::vector<int> counter(rows, 0);
  while (true) {
    int pos = 0;
    while (pos < rows && counter[pos] == base - 1) {
      counter[pos] = 0;
      obj.apply(pos, 0);
      ++pos;
    }
    if (pos == rows) break;
    ++counter[pos];
    obj.apply(pos, counter[pos]);
    if (obj.delta() > best) {
      best = obj.delta();
      for (int n = 0; n < rows; ++n) best_choice[n] = counter[n];
    }
  }
  for (int n = 0; n < rows; ++n) obj.apply(n, best_choice[n]);
  return obj.to_matrix();
}

}  // namespace

CMat build_d(const CMat& h, const CVec& xi) {
  const int n_t = static_cast<int>(h.rows());
  CMat d = CMat::Zero(n_t, n_t);
  for (int j = 0; j < h.cols(); ++j) d.noalias() += std::norm(xi(j)) * h.col(j) * h.col(j).adjoint();
  return 0.5 * (d + CMat(d.adjoint()));
}

RVec update_mu(const CMat& h, const CMat& f_rf, const CMat& f_bb, const RVec& sigma2) {
  return sinr(h, f_rf, f_bb, sigma2);
}

CVec update_xi(const CMat& h, const CMat& f_rf, const CMat& f_bb, const RVec& mu,
               const RVec& sigma2) {
  const int k_ues = static_cast<int>(h.cols());
  const CMat eff = h.adjoint() * f_rf * f_bb;  // eff(k, j) = h_k^H F_RF f_j
  CVec xi(k_ues);
  for (int k = 0; k < k_ues; ++k) {
    double c = sigma2(k);
    for (int j = 0; j < k_ues; ++j) c += std::norm(eff(k, j));
    xi(k) = std::sqrt(1.0 + mu(k)) * eff(k, k) / c;
  }
  return xi;
}

double delta_objective(const FpState& state, const CMat& h, const CMat& f_bb) {
  const CMat f_rf = compose(state.analog);
  double delta = 0.0;
  for (int k = 0; k < h.cols(); ++k) {
    const cxd z = (h.col(k).adjoint() * f_rf * f_bb.col(k)).value();
    delta += 2.0 * std::sqrt(1.0 + state.mu(k)) * (std::conj(state.xi(k)) * z).real();
    delta -= (f_bb.col(k).adjoint() * f_rf.adjoint() * state.d_mat * f_rf * f_bb.col(k))
                 .value()
                 .real();
  }
  return delta;
}

double fp_objective_bits(const CMat& h, const RVec& mu, const CVec& xi, const CMat& f_rf,
                         const CMat& f_bb, const RVec& sigma2) {
  const int k_ues = static_cast<int>(h.cols());
  const CMat eff = h.adjoint() * f_rf * f_bb;
  double acc = 0.0;
  for (int k = 0; k < k_ues; ++k) {
    double c = sigma2(k);
    for (int j = 0; j < k_ues; ++j) c += std::norm(eff(k, j));
    acc += std::log(1.0 + mu(k)) - mu(k);
    acc += 2.0 * std::sqrt(1.0 + mu(k)) * (std::conj(xi(k)) * eff(k, k)).real() -
           std::norm(xi(k)) * c;
  }
  return acc / kLn2;
}

IMat optimize_switch(const FpState& state, const CMat& h, const CMat& f_bb, SwitchMode mode,
                     int max_sweeps) {
  SwitchObjective obj(state, h, f_bb);
  if (mode == SwitchMode::exact_enumeration) return switch_enumeration(obj);

  obj.reset_to(state.analog.switches);
  const IMat from_incumbent = switch_coordinate_descent(obj, max_sweeps);
  const double d_incumbent = obj.delta();

  // Second start: constructive greedy, strongest channel rows first, then the
  // same sweeps. Single-start descent stalls in single-move local optima on a
  // noticeable fraction of instances.
  obj.reset_to(IMat::Zero(h.rows(), f_bb.rows()));
  std::vector<int> order(h.rows());
  for (int n = 0; n < h.rows(); ++n) order[n] = n;
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return h.row(a).norm() > h.row(b).norm(); });
  for (int n : order) {
    int best = 0;
    double best_gain = 0.0;
    for (int cand = 1; cand < obj.n_options(); ++cand) {
      const double gain = obj.probe(n, cand);
      if (gain > best_gain) {
        best_gain = gain;
        best = cand;
      }
    }
    if (best != 0) obj.apply(n, best);
  }
  const IMat from_greedy = switch_coordinate_descent(obj, max_sweeps);
  return obj.delta() > d_incumbent ? from_greedy : from_incumbent;
}

RVec optimize_phase(const FpState& state, const CMat& h, const CMat& f_bb, const IMat& switches,
                    const manifold::RcgSettings& rcg) {
  const int n_t = static_cast<int>(h.rows());
  const int k_ues = static_cast<int>(h.cols());
  const CMat s = switches.cast<cxd>();

  // Q = sum_k diag{f_k^H S^H} D diag{S f_k},  q = sum_k sqrt(1+mu_k) xi_k
  //     diag{f_k^H S^H} h_k, both expressed through c_k = S f_k.
  CMat weight = CMat::Zero(n_t, n_t);
  CVec q = CVec::Zero(n_t);
  for (int k = 0; k < k_ues; ++k) {
    const CVec c = s * f_bb.col(k);
    weight.noalias() += c.conjugate() * c.transpose();
    q += std::sqrt(1.0 + state.mu(k)) * state.xi(k) *
         c.conjugate().cwiseProduct(h.col(k));
  }
  manifold::CircleQuadraticProblem problem;
  problem.q_mat = state.d_mat.cwiseProduct(weight);
  problem.q_mat = 0.5 * (problem.q_mat + CMat(problem.q_mat.adjoint()));
  problem.q_vec = q;
  problem.radius = 1.0 / std::sqrt(static_cast<double>(n_t));

  CVec phi0(n_t);
  for (int n = 0; n < n_t; ++n) phi0(n) = std::polar(problem.radius, state.analog.theta(n));
  const auto result = manifold::solve(problem, phi0, rcg);

  RVec theta(n_t);
  for (int n = 0; n < n_t; ++n) theta(n) = std::arg(result.phi(n));
  return theta;
}

CMat solve_digital(const CMat& f_rf, const CMat& d_mat, const RVec& mu, const CVec& xi,
                   const CMat& h, double p_t, const CMat& f_bb_prev, int* n_loadings) {
  const int n_rf = static_cast<int>(f_rf.cols());
  const int k_ues = static_cast<int>(h.cols());
  CMat m = f_rf.adjoint() * d_mat * f_rf;
  m = 0.5 * (m + CMat(m.adjoint()));

  CMat rhs(n_rf, k_ues);
  for (int k = 0; k < k_ues; ++k)
    rhs.col(k) = std::sqrt(1.0 + mu(k)) * xi(k) * (f_rf.adjoint() * h.col(k));
  if (rhs.norm() == 0.0) return f_bb_prev;  // dead objective, keep previous block

  Eigen::SelfAdjointEigenSolver<CMat> es(m);
  const double lam_max = es.eigenvalues().maxCoeff();
  const double lam_min = es.eigenvalues().minCoeff();
  if (!(lam_max > 0.0) || lam_min < lam_max * 1e-12) {
    const double loading = 1e-12 * std::max(m.trace().real(), 1e-300) / n_rf;
    m += loading * CMat::Identity(n_rf, n_rf);
    if (n_loadings) ++(*n_loadings);
  }
  const CMat f_bar = m.ldlt().solve(rhs);
  return enforce_power(f_rf, f_bar, p_t);
}

CMat update_digital(const FpState& state, const CMat& h, double p_t, int* n_loadings) {
  return solve_digital(compose(state.analog), state.d_mat, state.mu, state.xi, h, p_t,
                       state.f_bb, n_loadings);
}

AnalogBeamformer default_init_analog(const CMat& h, int n_rf) {
  const int n_t = static_cast<int>(h.rows());
  AnalogBeamformer analog = AnalogBeamformer::zeros(n_t, n_rf);
  const int block = n_t / n_rf;
  for (int n = 0; n < n_t; ++n) {
    const int l = block > 0 ? std::min(n / block, n_rf - 1) : n_rf - 1;
    analog.switches(n, l) = 1;
    int strongest = 0;
    for (int k = 1; k < h.cols(); ++k)
      if (std::abs(h(n, k)) > std::abs(h(n, strongest))) strongest = k;
    analog.theta(n) = std::arg(h(n, strongest));
  }
  return analog;
}

CMat default_init_digital(const CMat& h, const CMat& f_rf, double p_t) {
  CMat f_bb = f_rf.adjoint() * h;  // matched to the effective channel
  if ((f_rf * f_bb).norm() == 0.0) f_bb = CMat::Ones(f_rf.cols(), h.cols());
  return enforce_power(f_rf, f_bb, p_t);
}

FpResult run(const CMat& h, const RVec& sigma2, double p_t, int n_rf, const FpSettings& settings) {
  AnalogBeamformer analog0 = default_init_analog(h, n_rf);
  CMat f_bb0 = default_init_digital(h, compose(analog0), p_t);

  // Warm start: drive the frozen-switch design to its fixed point first, so
  // the switch optimization works with mature FP weights. The first switch
  // moves otherwise commit to a poor subarray based on the raw
  // matched-filter statistics and the loop cannot recover.
  FpResult warm;
  if (settings.warmup_max_iters != 0) {
    FpSettings frozen = settings;
    frozen.max_outer_iters =
        settings.warmup_max_iters > 0 ? settings.warmup_max_iters : settings.max_outer_iters;
    warm = run_frozen_switch(h, sigma2, p_t, frozen, analog0, f_bb0);
    analog0 = warm.analog;
    f_bb0 = warm.f_bb;
  }

  if (warm.trace.size() > 0) {
    double rate0 = warm.trace(warm.trace.size() - 1);
    mmse_digital_restart(h, sigma2, p_t, analog0, f_bb0, rate0);
  }

  FpResult res = run_from(h, sigma2, p_t, settings, analog0, f_bb0);
  if (warm.trace.size() > 0) {
    res.warmup_iters = warm.iters;
    RVec joined(warm.trace.size() - 1 + res.trace.size());
    joined << warm.trace.head(warm.trace.size() - 1), res.trace;
    res.trace = joined;
  }

  // Off-mode phase: the switch subproblem maximizes delta at fixed digital
  // power, which keeps every antenna with a positive marginal; the benefit of
  // deactivating a weak antenna only shows up through the power rescale.
  // Alternate exact-rate pruning with frozen-switch polish, keeping the best.
  std::vector<double> tail;
  double rate = res.trace(res.trace.size() - 1);
  for (int round = 0; round < settings.prune_rounds; ++round) {
    const double round_start = rate;
    const PruneResult pruned = prune_antennas(h, sigma2, p_t, res.analog, res.f_bb);
    if (pruned.rate > rate) {
      rate = pruned.rate;
      tail.push_back(rate);
    }
    const std::vector<double> polished = extrapolated_polish(
        h, sigma2, p_t, settings, res.analog, res.f_bb, rate, settings.max_outer_iters / 2);
    tail.insert(tail.end(), polished.begin(), polished.end());
    if (rate - round_start <= settings.rel_tol * std::max(round_start, 1e-12)) {
      // the outermost alternation has settled at the same tolerance that
      // governs the inner loops
      res.converged = true;
      break;
    }
  }
  if (!tail.empty()) {
    RVec joined(res.trace.size() + static_cast<int>(tail.size()));
    joined << res.trace, Eigen::Map<const RVec>(tail.data(), static_cast<int>(tail.size()));
    res.trace = joined;
  }
  return res;
}

namespace {

FpResult run_loop(const CMat& h, const RVec& sigma2, double p_t, const FpSettings& settings,
                  const AnalogBeamformer& analog0, const CMat& f_bb0, bool move_switches);

}  // namespace

FpResult run_frozen_switch(const CMat& h, const RVec& sigma2, double p_t,
                           const FpSettings& settings, const AnalogBeamformer& analog0,
                           const CMat& f_bb0) {
  return run_loop(h, sigma2, p_t, settings, analog0, f_bb0, false);
}

FpResult run_from(const CMat& h, const RVec& sigma2, double p_t, const FpSettings& settings,
                  const AnalogBeamformer& analog0, const CMat& f_bb0) {
  return run_loop(h, sigma2, p_t, settings, analog0, f_bb0, true);
}

namespace {

FpResult run_loop(const CMat& h, const RVec& sigma2, double p_t, const FpSettings& settings,
                  const AnalogBeamformer& analog0, const CMat& f_bb0, bool move_switches) {
  FpState state;
  state.analog = analog0;
  state.f_bb = f_bb0;
  CMat f_rf = compose(state.analog);

  FpResult res;
  res.analog = state.analog;
  res.f_bb = state.f_bb;
  std::vector<double> trace;
  trace.push_back(sum_rate(sinr(h, f_rf, state.f_bb, sigma2)));

  for (int it = 1; it <= settings.max_outer_iters; ++it) {
    state.mu = update_mu(h, f_rf, state.f_bb, sigma2);
    state.xi = update_xi(h, f_rf, state.f_bb, state.mu, sigma2);
    state.d_mat = build_d(h, state.xi);
    ensure_finite(state.d_mat, "auxiliary update");

    if (move_switches)
      state.analog.switches = optimize_switch(state, h, state.f_bb, settings.switch_mode,
                                              settings.switch_max_sweeps);
    state.analog.theta = optimize_phase(state, h, state.f_bb, state.analog.switches, settings.rcg);
    f_rf = compose(state.analog);
    ensure_finite(f_rf, "analog update");

    state.f_bb = update_digital(state, h, p_t, &res.digital_loadings);
    ensure_finite(state.f_bb, "digital update");

    const double rate = sum_rate(sinr(h, f_rf, state.f_bb, sigma2));
    if (!std::isfinite(rate)) throw NumericError("fp: non-finite sum-rate at iteration " +
                                                 std::to_string(it));
    res.iters = it;
    const double prev = trace[trace.size() - 1];
    if (rate < prev - 1e-12 * std::max(std::abs(prev), 1.0)) {
      // strictly worsening step (the scaled digital stage admits rare tiny
      // regressions): keep the previous iterate and stop at the fixed point
      state.analog = res.analog;
      state.f_bb = res.f_bb;
      res.converged = true;
      break;
    }
    trace.push_back(rate);
    res.analog = state.analog;
    res.f_bb = state.f_bb;
    if (std::abs(rate - prev) <= settings.rel_tol * std::max(std::abs(prev), 1e-12)) {
      res.converged = true;
      break;
    }
  }
  res.analog = state.analog;
  res.f_bb = state.f_bb;
  res.trace = Eigen::Map<const RVec>(trace.data(), static_cast<int>(trace.size()));
  return res;
}

}  // namespace

namespace {

// Rate of `candidate` with an MMSE digital stage re-solved on its effective
// channel; -1 when degenerate.
double mmse_candidate_rate(const CMat& h, const RVec& sigma2, double p_t,
                           const AnalogBeamformer& candidate, CMat* f_out) {
  const int k_ues = static_cast<int>(h.cols());
  const CMat f_rf = compose(candidate);
  const CMat h_eff = h.adjoint() * f_rf;  // K x N_RF
  if (!(h_eff.norm() > 0.0)) return -1.0;
  CMat gram = h_eff * h_eff.adjoint();
  for (int k = 0; k < k_ues; ++k) gram(k, k) += sigma2(k);
  const CMat f_dir = h_eff.adjoint() * gram.ldlt().solve(CMat::Identity(k_ues, k_ues));
  if (!((f_rf * f_dir).norm() > 0.0)) return -1.0;
  const CMat f_scaled = enforce_power(f_rf, f_dir, p_t);
  if (f_out) *f_out = f_scaled;
  return sum_rate(sinr(h, f_rf, f_scaled, sigma2));
}

// Replace the digital stage by its MMSE re-solve when that alone improves the
// exact rate. The (mu, xi, F_BB) alternation contracts at a near-unit linear
// ratio at high SNR; this jumps to its limit point in one step.
bool mmse_digital_restart(const CMat& h, const RVec& sigma2, double p_t,
                          const AnalogBeamformer& analog, CMat& f_bb, double& rate) {
  CMat f_new;
  const double restarted = mmse_candidate_rate(h, sigma2, p_t, analog, &f_new);
  if (restarted > rate + 1e-12 * (1.0 + std::abs(rate))) {
    f_bb = std::move(f_new);
    rate = restarted;
    return true;
  }
  return false;
}

}  // namespace

PruneResult prune_antennas(const CMat& h, const RVec& sigma2, double p_t,
                           AnalogBeamformer& analog, CMat& f_bb, double weak_threshold) {
  const int n_t = static_cast<int>(h.rows());

  PruneResult result;
  result.rate = sum_rate(sinr(h, compose(analog), f_bb, sigma2));
  mmse_digital_restart(h, sigma2, p_t, analog, f_bb, result.rate);

  double mean_row_norm = 0.0;
  for (int n = 0; n < n_t; ++n) mean_row_norm += h.row(n).norm() / n_t;

  std::vector<int> order;
  for (int n = 0; n < n_t; ++n)
    if (h.row(n).norm() < weak_threshold * mean_row_norm) order.push_back(n);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return h.row(a).norm() < h.row(b).norm(); });

  for (int n : order) {
    if (analog.switches.row(n).sum() == 0) continue;
    AnalogBeamformer candidate = analog;
    candidate.switches.row(n).setZero();
    if (candidate.n_active() == 0) continue;
    CMat f_new;
    const double rate = mmse_candidate_rate(h, sigma2, p_t, candidate, &f_new);
    if (rate > result.rate + 1e-12 * (1.0 + std::abs(result.rate))) {
      analog = std::move(candidate);
      f_bb = std::move(f_new);
      result.rate = rate;
      ++result.n_pruned;
    }
  }
  return result;
}

namespace {

// Accelerated polish for the slow phase-digital valley: the block alternation
// contracts with near-unit ratio, so two plain iterations give the walk
// direction and a capped extrapolation jumps along it. Every jump is gated on
// the exact rate. Returns the accepted rates in order.
std::vector<double> extrapolated_polish(const CMat& h, const RVec& sigma2, double p_t,
                                        const FpSettings& settings, AnalogBeamformer& analog,
                                        CMat& f_bb, double& rate, int max_jumps) {
  std::vector<double> accepted;
  FpSettings one = settings;
  one.max_outer_iters = 1;
  one.rel_tol = 1e-15;
  one.warmup_max_iters = 0;

  double base_lambda = 3000.0;
  for (int jump = 0; jump < max_jumps; ++jump) {
    const double jump_start = rate;
    const FpResult s1 = run_frozen_switch(h, sigma2, p_t, one, analog, f_bb);
    const FpResult s2 = run_frozen_switch(h, sigma2, p_t, one, s1.analog, s1.f_bb);
    const double plain = s2.trace(s2.trace.size() - 1);
    if (plain > rate) {
      rate = plain;
      analog = s2.analog;
      f_bb = s2.f_bb;
    }

    RVec dir = s2.analog.theta - s1.analog.theta;
    for (int n = 0; n < dir.size(); ++n) dir(n) = std::remainder(dir(n), 2 * kPi);
    double winner = 0.0;
    if (dir.norm() > 0.0) {
      for (const double lambda :
           {base_lambda, base_lambda / 3.0, base_lambda / 10.0, base_lambda / 100.0}) {
        AnalogBeamformer candidate = s2.analog;
        candidate.theta = s2.analog.theta + lambda * dir;
        const CMat f_rf = compose(candidate);
        FpState probe;
        probe.analog = candidate;
        probe.f_bb = s2.f_bb;
        probe.mu = update_mu(h, f_rf, s2.f_bb, sigma2);
        probe.xi = update_xi(h, f_rf, s2.f_bb, probe.mu, sigma2);
        probe.d_mat = build_d(h, probe.xi);
        const CMat f_new = update_digital(probe, h, p_t);
        const double r = sum_rate(sinr(h, f_rf, f_new, sigma2));
        if (r > rate) {
          rate = r;
          analog = std::move(probe.analog);
          f_bb = f_new;
          winner = lambda;
        }
      }
    }
    // classic step adaptation: grow while the longest jump keeps winning
    if (winner == base_lambda)
      base_lambda = std::min(base_lambda * 3.0, 1e8);
    else if (winner == 0.0)
      base_lambda = std::max(base_lambda / 10.0, 30.0);
    if (rate > jump_start) accepted.push_back(rate);
    if (rate - jump_start <= settings.rel_tol * std::max(jump_start, 1e-12)) break;
  }
  return accepted;
}

}  // namespace

}  // namespace nfbf::fp
