#include "nfbf/beamform.hpp"

#include <cmath>

namespace nfbf {

int AnalogBeamformer::n_active() const {
  int m = 0;
  for (int n = 0; n < switches.rows(); ++n)
    if (switches.row(n).sum() > 0) ++m;
  return m;
}

AnalogBeamformer AnalogBeamformer::zeros(int n_antennas, int n_rf) {
  AnalogBeamformer a;
  a.theta = RVec::Zero(n_antennas);
  a.switches = IMat::Zero(n_antennas, n_rf);
  return a;
}

CMat compose(const AnalogBeamformer& analog) {
  const int n_t = analog.n_antennas();
  const int n_rf = analog.n_rf();
  const double rho = 1.0 / std::sqrt(static_cast<double>(n_t));
  CMat f_rf = CMat::Zero(n_t, n_rf);
  for (int n = 0; n < n_t; ++n) {
    int active = 0;
    for (int l = 0; l < n_rf; ++l) active += analog.switches(n, l) != 0;
    if (active > 1)
      throw std::invalid_argument("compose: row " + std::to_string(n + 1) +
                                  " connects to more than one RF chain");
    if (active == 0) continue;
    const cxd phi = std::polar(rho, analog.theta(n));
    for (int l = 0; l < n_rf; ++l)
      if (analog.switches(n, l) != 0) f_rf(n, l) = phi;
  }
  return f_rf;
}

ValidationReport validate(const AnalogBeamformer& analog) {
  ValidationReport report;
  if (analog.theta.size() != analog.switches.rows()) {
    report.ok = false;
    report.violations.push_back("theta length does not match switch matrix rows");
    return report;
  }
  for (int n = 0; n < analog.switches.rows(); ++n) {
    int active = 0;
    for (int l = 0; l < analog.switches.cols(); ++l) {
      const int s = analog.switches(n, l);
      if (s != 0 && s != 1) {
        report.ok = false;
        report.violations.push_back("row " + std::to_string(n + 1) + ", chain " +
                                    std::to_string(l + 1) + ": non-binary switch entry " +
                                    std::to_string(s));
      }
      active += s != 0;
    }
    if (active > 1) {
      report.ok = false;
      report.violations.push_back("row " + std::to_string(n + 1) +
                                  ": connected to more than one RF chain");
    }
  }
  return report;
}

RVec sinr(const CMat& h, const CMat& f_rf, const CMat& f_bb, const RVec& sigma2) {
  const int k_ues = static_cast<int>(h.cols());
  if (f_rf.rows() != h.rows() || f_rf.cols() != f_bb.rows() || f_bb.cols() != k_ues ||
      sigma2.size() != k_ues)
    throw std::invalid_argument("sinr: dimension mismatch");
  for (int k = 0; k < k_ues; ++k)
    if (sigma2(k) <= 0.0) throw std::invalid_argument("sinr: noise power must be positive");

  // G(k, j) = |h_k^H F_RF f_j|^2
  const CMat eff = h.adjoint() * f_rf * f_bb;
  RVec out(k_ues);
  for (int k = 0; k < k_ues; ++k) {
    double interference = 0.0;
    for (int j = 0; j < k_ues; ++j)
      if (j != k) interference += std::norm(eff(k, j));
    out(k) = std::norm(eff(k, k)) / (interference + sigma2(k));
  }
  return out;
}

double sum_rate(const RVec& sinr_values) {
  double total = 0.0;
  for (int k = 0; k < sinr_values.size(); ++k) {
    if (sinr_values(k) < 0.0) throw std::invalid_argument("sum_rate: negative SINR");
    total += std::log2(1.0 + sinr_values(k));
  }
  return total;
}

CMat enforce_power(const CMat& f_rf, const CMat& f_bb_raw, double p_t) {
  const double norm = (f_rf * f_bb_raw).norm();
  if (!(norm > 0.0))
    throw NumericError("enforce_power: ||F_RF * F_BB||_F is zero, beamformer degenerate");
  return std::sqrt(p_t) / norm * f_bb_raw;
}

Architecture architecture_from_string(const std::string& tag) {
  if (tag == "fully_digital") return Architecture::fully_digital;
  if (tag == "fully_connected") return Architecture::fully_connected;
  if (tag == "fixed_subarray") return Architecture::fixed_subarray;
  if (tag == "dynamic_subarray") return Architecture::dynamic_subarray;
  throw std::invalid_argument("unknown architecture: " + tag);
}

std::string to_string(Architecture arch) {
  switch (arch) {
    case Architecture::fully_digital: return "fully_digital";
    case Architecture::fully_connected: return "fully_connected";
    case Architecture::fixed_subarray: return "fixed_subarray";
    case Architecture::dynamic_subarray: return "dynamic_subarray";
  }
  throw std::invalid_argument("unknown architecture enum value");
}

double total_power(Architecture arch, const PowerModel& m, int n_t, int n_rf, int m_active) {
  if (m_active > n_t) throw std::invalid_argument("total_power: m_active exceeds n_t");
  switch (arch) {
    case Architecture::fully_digital:
      return m.p_t_w + m.p_bb_w + n_t * m.p_rf_w;
    case Architecture::fully_connected:
      return m.p_t_w + m.p_bb_w + n_rf * m.p_rf_w + static_cast<double>(n_t) * n_rf * m.p_ps_w;
    case Architecture::fixed_subarray:
      return m.p_t_w + m.p_bb_w + n_rf * m.p_rf_w + n_t * m.p_ps_w;
    case Architecture::dynamic_subarray:
      return m.p_t_w + m.p_bb_w + n_rf * m.p_rf_w + m_active * (m.p_ps_w + m.p_sw_w);
  }
  throw std::invalid_argument("total_power: unknown architecture");
}

double energy_efficiency(double sum_rate_bps_hz, double total_power_w) {
  if (total_power_w <= 0.0)
    throw std::invalid_argument("energy_efficiency: total power must be positive");
  return sum_rate_bps_hz / total_power_w;
}

double estimation_overhead(EstimationScheme scheme, int n_t, int n_rf, int k, int t_frames,
                           int ts_slots) {
  const double nt = n_t, nrf = n_rf, ku = k, t = t_frames, ts = ts_slots;
  switch (scheme) {
    case EstimationScheme::real_time: return nt * ku * t * ts;
    case EstimationScheme::two_timescale: return nt * ku * t + ku * nrf * t * ts;
  }
  throw std::invalid_argument("estimation_overhead: unknown scheme");
}

LinkMetrics link_metrics(const CMat& h, const CMat& f_rf, const CMat& f_bb, const RVec& sigma2) {
  LinkMetrics m;
  m.sinr = sinr(h, f_rf, f_bb, sigma2);
  m.rate_bps_hz = RVec(m.sinr.size());
  for (int k = 0; k < m.sinr.size(); ++k) m.rate_bps_hz(k) = std::log2(1.0 + m.sinr(k));
  m.sum_rate = m.rate_bps_hz.sum();
  return m;
}

}  // namespace nfbf
