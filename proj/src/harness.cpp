#include "nfbf/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace nfbf::harness {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] void fail(const std::string& what) { throw ConfigError(what); }

template <typename T>
T field_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    fail(std::string("config field '") + key + "' has the wrong type");
  }
}

const json& section(const json& j, const char* key, const json& empty) {
  if (!j.contains(key)) return empty;
  if (!j.at(key).is_object()) fail(std::string("config section '") + key + "' must be an object");
  return j.at(key);
}

}  // namespace

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t hash = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

Algorithm algorithm_from_string(const std::string& tag) {
  if (tag == "FD-R") return Algorithm::fd_r;
  if (tag == "FC-R") return Algorithm::fc_r;
  if (tag == "FS-R") return Algorithm::fs_r;
  if (tag == "DS-R") return Algorithm::ds_r;
  if (tag == "FC-T") return Algorithm::fc_t;
  if (tag == "FS-T") return Algorithm::fs_t;
  if (tag == "DS-T") return Algorithm::ds_t;
  fail("unknown algorithm tag '" + tag +
       "' (expected FD-R, FC-R, FS-R, DS-R, FC-T, FS-T or DS-T)");
}

std::string to_string(Algorithm alg) {
  switch (alg) {
    case Algorithm::fd_r: return "FD-R";
    case Algorithm::fc_r: return "FC-R";
    case Algorithm::fs_r: return "FS-R";
    case Algorithm::ds_r: return "DS-R";
    case Algorithm::fc_t: return "FC-T";
    case Algorithm::fs_t: return "FS-T";
    case Algorithm::ds_t: return "DS-T";
  }
  fail("bad algorithm enum");
}

Architecture architecture_of(Algorithm alg) {
  switch (alg) {
    case Algorithm::fd_r: return Architecture::fully_digital;
    case Algorithm::fc_r:
    case Algorithm::fc_t: return Architecture::fully_connected;
    case Algorithm::fs_r:
    case Algorithm::fs_t: return Architecture::fixed_subarray;
    case Algorithm::ds_r:
    case Algorithm::ds_t: return Architecture::dynamic_subarray;
  }
  fail("bad algorithm enum");
}

bool is_two_timescale(Algorithm alg) {
  return alg == Algorithm::fc_t || alg == Algorithm::fs_t || alg == Algorithm::ds_t;
}

SweepAxis axis_from_string(const std::string& tag) {
  if (tag == "power") return SweepAxis::power;
  if (tag == "n_antennas") return SweepAxis::n_antennas;
  if (tag == "distance") return SweepAxis::distance;
  if (tag == "spread") return SweepAxis::spread;
  if (tag == "frames") return SweepAxis::frames;
  fail("unknown sweep axis '" + tag +
       "' (expected power, n_antennas, distance, spread or frames)");
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::power: return "power";
    case SweepAxis::n_antennas: return "n_antennas";
    case SweepAxis::distance: return "distance";
    case SweepAxis::spread: return "spread";
    case SweepAxis::frames: return "frames";
  }
  fail("bad axis enum");
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  static const json empty = json::object();
  ExperimentConfig cfg;
  cfg.name = field_or<std::string>(j, "name", "experiment");

  const json& sc = section(j, "scenario", empty);
  cfg.scenario.n_antennas = field_or<int>(sc, "n_antennas", 64);
  cfg.scenario.carrier_freq_hz = field_or<double>(sc, "carrier_freq_hz", 28e9);
  cfg.scenario.n_rf = field_or<int>(sc, "n_rf", 3);
  cfg.scenario.n_ues = field_or<int>(sc, "n_ues", 3);
  cfg.scenario.noise_dbm = field_or<double>(sc, "noise_dbm", -80.0);
  cfg.scenario.p_t_dbm = field_or<double>(sc, "p_t_dbm", 30.0);
  const json& pl = section(sc, "path_loss", empty);
  cfg.scenario.path_loss.c0_db = field_or<double>(pl, "c0_db", 30.0);
  cfg.scenario.path_loss.d0_m = field_or<double>(pl, "d0_m", 1.0);
  cfg.scenario.path_loss.exponent = field_or<double>(pl, "exponent", 3.0);
  if (sc.contains("ue_centers")) {
    cfg.scenario.explicit_centers = true;
    for (const auto& c : sc.at("ue_centers")) {
      UePolar ue;
      ue.aod_rad = field_or<double>(c, "aod_deg", 0.0) * kPi / 180.0;
      ue.range_m = field_or<double>(c, "range_m", 3.0);
      cfg.scenario.centers.push_back(ue);
    }
  } else {
    auto box = [&](const char* key, double lo, double hi) {
      std::pair<double, double> out{lo, hi};
      if (sc.contains(key)) {
        const auto& arr = sc.at(key);
        if (!arr.is_array() || arr.size() != 2)
          fail(std::string("scenario.") + key + " must be a [lo, hi] pair");
        out = {arr[0].get<double>(), arr[1].get<double>()};
      }
      return out;
    };
    std::tie(cfg.scenario.center_aod_deg_lo, cfg.scenario.center_aod_deg_hi) =
        box("center_aod_deg", -60.0, 60.0);
    std::tie(cfg.scenario.center_range_m_lo, cfg.scenario.center_range_m_hi) =
        box("center_range_m", 2.0, 5.0);
  }
  cfg.scenario.aod_spread_rad = field_or<double>(sc, "aod_spread_rad", kPi / 48.0);
  cfg.scenario.range_spread_m = field_or<double>(sc, "range_spread_m", 1.0);

  if (!j.contains("algorithms") || !j.at("algorithms").is_array() || j.at("algorithms").empty())
    fail("config must list at least one algorithm");
  for (const auto& tag : j.at("algorithms"))
    cfg.algorithms.push_back(algorithm_from_string(tag.get<std::string>()));

  const json& sw = section(j, "sweep", empty);
  cfg.axis = axis_from_string(field_or<std::string>(sw, "axis", "power"));
  if (!sw.contains("values") || !sw.at("values").is_array() || sw.at("values").empty())
    fail("sweep.values must be a non-empty array");
  for (const auto& v : sw.at("values")) cfg.sweep_values.push_back(v.get<double>());

  const std::string kind = field_or<std::string>(j, "spread_kind", "aod");
  if (kind == "aod") cfg.spread_kind = SpreadKind::aod;
  else if (kind == "range") cfg.spread_kind = SpreadKind::range;
  else fail("spread_kind must be 'aod' or 'range'");

  if (!j.contains("seeds") || !j.at("seeds").is_array() || j.at("seeds").empty())
    fail("config must list at least one seed");
  for (const auto& s : j.at("seeds")) cfg.seeds.push_back(s.get<std::uint64_t>());

  cfg.output_dir = field_or<std::string>(j, "output_dir", "out");
  cfg.threads = field_or<int>(j, "threads", 0);
  const std::string timing = field_or<std::string>(j, "timing", "none");
  if (timing == "none") cfg.timing = TimingMode::none;
  else if (timing == "wall") cfg.timing = TimingMode::wall;
  else fail("timing must be 'none' or 'wall'");
  cfg.export_traces = field_or<bool>(j, "export_traces", false);
  cfg.export_selection = field_or<bool>(j, "export_selection", false);
  cfg.debug_power_residual = field_or<bool>(j, "debug_power_residual", false);

  const json& fp = section(j, "fp", empty);
  cfg.fp_settings.max_outer_iters = field_or<int>(fp, "max_outer_iters", 50);
  cfg.fp_settings.rel_tol = field_or<double>(fp, "rel_tol", 1e-4);
  const std::string mode = field_or<std::string>(fp, "switch_mode", "row_coordinate_descent");
  if (mode == "row_coordinate_descent")
    cfg.fp_settings.switch_mode = fp::SwitchMode::row_coordinate_descent;
  else if (mode == "exact_enumeration")
    cfg.fp_settings.switch_mode = fp::SwitchMode::exact_enumeration;
  else fail("fp.switch_mode must be 'row_coordinate_descent' or 'exact_enumeration'");
  cfg.fp_settings.switch_max_sweeps = field_or<int>(fp, "switch_max_sweeps", 10);
  cfg.fp_settings.rcg.max_iters = field_or<int>(fp, "rcg_max_iters", 200);
  cfg.fp_settings.rcg.grad_tol = field_or<double>(fp, "rcg_grad_tol", 1e-8);

  const json& tt = section(j, "two_timescale", empty);
  cfg.schedule.t_frames = field_or<int>(tt, "t_frames", 40);
  cfg.schedule.ts_slots = field_or<int>(tt, "ts_slots", 50);
  cfg.tts_params.tau = field_or<double>(tt, "tau", 1.0);
  cfg.tts_params.rho_exponent = field_or<double>(tt, "rho_exponent", 0.6);
  cfg.tts_params.varrho1 = field_or<double>(tt, "varrho1", 0.1);
  cfg.tts_params.varrho2 = field_or<double>(tt, "varrho2", 0.1);
  cfg.tts_params.c1 = field_or<double>(tt, "c1", 1.5);
  cfg.tts_params.c2 = field_or<double>(tt, "c2", 1.5);
  cfg.tts_params.epsilon = field_or<double>(tt, "epsilon", 1e-3);
  cfg.tts_params.n_max_inner = field_or<int>(tt, "n_max_inner", 15);
  cfg.tts_params.activation_threshold = field_or<double>(tt, "activation_threshold", 0.5);

  const json& pm = section(j, "power_model", empty);
  cfg.power_model.p_bb_w = field_or<double>(pm, "p_bb_w", 0.2);
  cfg.power_model.p_rf_w = field_or<double>(pm, "p_rf_w", 0.25);
  cfg.power_model.p_ps_w = field_or<double>(pm, "p_ps_w", 0.01);
  cfg.power_model.p_sw_w = field_or<double>(pm, "p_sw_w", 0.005);

  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail("config parse error in " + path + ": " + e.what());
  }
  return from_json(j);
}

ExperimentConfig ExperimentConfig::load_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(std::string("config parse error: ") + e.what());
  }
  return from_json(j);
}

void ExperimentConfig::validate() const {
  const auto& sc = scenario;
  if (sc.n_antennas < 1) fail("scenario.n_antennas must be >= 1");
  if (sc.carrier_freq_hz <= 0) fail("scenario.carrier_freq_hz must be positive");
  if (sc.n_rf < 1) fail("scenario.n_rf must be >= 1");
  if (sc.n_ues < 1) fail("scenario.n_ues must be >= 1");
  if (sc.n_ues > sc.n_antennas) fail("scenario.n_ues must not exceed n_antennas");
  if (sc.path_loss.d0_m <= 0) fail("path_loss.d0_m must be positive");
  if (sc.path_loss.exponent < 0) fail("path_loss.exponent must be nonnegative");
  if (sc.aod_spread_rad < 0 || sc.range_spread_m < 0) fail("spreads must be nonnegative");

  bool any_tts = false;
  for (Algorithm alg : algorithms) any_tts = any_tts || is_two_timescale(alg);
  if (any_tts && sc.n_ues > sc.n_rf)
    fail("two-timescale algorithms require n_ues <= n_rf (MMSE stage)");

  if (sweep_values.empty()) fail("sweep.values must be non-empty");
  for (std::size_t i = 1; i < sweep_values.size(); ++i)
    if (!(sweep_values[i] > sweep_values[i - 1]))
      fail("sweep.values must be strictly increasing");
  if (seeds.empty()) fail("seeds must contain at least one entry");
  if (threads < 0) fail("threads must be >= 0");
  if (schedule.t_frames < 1 || schedule.ts_slots < 1)
    fail("two_timescale.t_frames and ts_slots must be >= 1");
  if (fp_settings.max_outer_iters < 1) fail("fp.max_outer_iters must be >= 1");
  if (fp_settings.rel_tol <= 0) fail("fp.rel_tol must be positive");
  if (tts_params.tau <= 0) fail("two_timescale.tau must be positive");
  if (tts_params.epsilon <= 0) fail("two_timescale.epsilon must be positive");
  if (tts_params.c1 <= 1 || tts_params.c2 <= 1)
    fail("two_timescale growth factors c1, c2 must exceed 1");
  if (tts_params.varrho1 <= 0 || tts_params.varrho2 <= 0)
    fail("two_timescale penalty weights must be positive");
  if (tts_params.n_max_inner < 1) fail("two_timescale.n_max_inner must be >= 1");

  // location domain checks, per sweep point where relevant
  auto check_bounds = [&](double aod_lo_rad, double aod_hi_rad, double range_lo,
                          double aod_spread, double range_spread) {
    if (aod_lo_rad - aod_spread / 2 <= -kPi / 2 || aod_hi_rad + aod_spread / 2 >= kPi / 2)
      fail("UE AoD interval (center range plus spread) escapes (-pi/2, pi/2)");
    if (range_lo - range_spread / 2 <= 0) fail("UE range interval reaches r <= 0");
  };
  for (double value : sweep_values) {
    double aod_spread = sc.aod_spread_rad;
    double range_spread = sc.range_spread_m;
    if (axis == SweepAxis::spread) {
      if (value < 0) fail("spread sweep values must be nonnegative");
      if (spread_kind == SpreadKind::aod) {
        aod_spread = value;
        range_spread = 0;
      } else {
        range_spread = value;
        aod_spread = 0;
      }
    }
    if (axis == SweepAxis::n_antennas &&
        (value != std::floor(value) || value < std::max(sc.n_rf, sc.n_ues)))
      fail("n_antennas sweep values must be integers >= max(n_rf, n_ues)");
    if (axis == SweepAxis::frames && (value != std::floor(value) || value < 1))
      fail("frames sweep values must be positive integers");
    if (axis == SweepAxis::power && dbm_to_watt(value) <= 0) fail("invalid power value");

    if (sc.explicit_centers) {
      if (static_cast<int>(sc.centers.size()) != sc.n_ues)
        fail("ue_centers length must equal n_ues");
      for (const auto& c : sc.centers) {
        const double r = axis == SweepAxis::distance ? value : c.range_m;
        check_bounds(c.aod_rad, c.aod_rad, r, aod_spread, range_spread);
      }
    } else {
      if (sc.center_aod_deg_hi < sc.center_aod_deg_lo ||
          sc.center_range_m_hi < sc.center_range_m_lo)
        fail("center boxes must have lo <= hi");
      const double lo = sc.center_aod_deg_lo * kPi / 180.0;
      const double hi = sc.center_aod_deg_hi * kPi / 180.0;
      const double r_lo =
          axis == SweepAxis::distance ? value : sc.center_range_m_lo;
      check_bounds(lo, hi, r_lo, aod_spread, range_spread);
    }
  }
}

nlohmann::json ExperimentConfig::canonical_json() const {
  json j;
  j["name"] = name;
  json sc;
  sc["n_antennas"] = scenario.n_antennas;
  sc["carrier_freq_hz"] = scenario.carrier_freq_hz;
  sc["n_rf"] = scenario.n_rf;
  sc["n_ues"] = scenario.n_ues;
  sc["noise_dbm"] = scenario.noise_dbm;
  sc["p_t_dbm"] = scenario.p_t_dbm;
  sc["path_loss"] = {{"c0_db", scenario.path_loss.c0_db},
                     {"d0_m", scenario.path_loss.d0_m},
                     {"exponent", scenario.path_loss.exponent}};
  if (scenario.explicit_centers) {
    json centers = json::array();
    for (const auto& c : scenario.centers)
      centers.push_back({{"aod_deg", c.aod_rad * 180.0 / kPi}, {"range_m", c.range_m}});
    sc["ue_centers"] = centers;
  } else {
    sc["center_aod_deg"] = {scenario.center_aod_deg_lo, scenario.center_aod_deg_hi};
    sc["center_range_m"] = {scenario.center_range_m_lo, scenario.center_range_m_hi};
  }
  sc["aod_spread_rad"] = scenario.aod_spread_rad;
  sc["range_spread_m"] = scenario.range_spread_m;
  j["scenario"] = sc;
  json algs = json::array();
  for (Algorithm alg : algorithms) algs.push_back(to_string(alg));
  j["algorithms"] = algs;
  j["sweep"] = {{"axis", to_string(axis)}, {"values", sweep_values}};
  j["spread_kind"] = spread_kind == SpreadKind::aod ? "aod" : "range";
  j["seeds"] = seeds;
  j["output_dir"] = output_dir;
  j["threads"] = threads;
  j["timing"] = timing == TimingMode::none ? "none" : "wall";
  j["export_traces"] = export_traces;
  j["export_selection"] = export_selection;
  j["debug_power_residual"] = debug_power_residual;
  j["fp"] = {{"max_outer_iters", fp_settings.max_outer_iters},
             {"rel_tol", fp_settings.rel_tol},
             {"switch_mode", fp_settings.switch_mode == fp::SwitchMode::exact_enumeration
                                 ? "exact_enumeration"
                                 : "row_coordinate_descent"},
             {"switch_max_sweeps", fp_settings.switch_max_sweeps},
             {"rcg_max_iters", fp_settings.rcg.max_iters},
             {"rcg_grad_tol", fp_settings.rcg.grad_tol}};
  j["two_timescale"] = {{"t_frames", schedule.t_frames},
                        {"ts_slots", schedule.ts_slots},
                        {"tau", tts_params.tau},
                        {"rho_exponent", tts_params.rho_exponent},
                        {"varrho1", tts_params.varrho1},
                        {"varrho2", tts_params.varrho2},
                        {"c1", tts_params.c1},
                        {"c2", tts_params.c2},
                        {"epsilon", tts_params.epsilon},
                        {"n_max_inner", tts_params.n_max_inner},
                        {"activation_threshold", tts_params.activation_threshold}};
  j["power_model"] = {{"p_bb_w", power_model.p_bb_w},
                      {"p_rf_w", power_model.p_rf_w},
                      {"p_ps_w", power_model.p_ps_w},
                      {"p_sw_w", power_model.p_sw_w}};
  return j;
}

std::string ExperimentConfig::config_hash() const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical_json().dump())));
  return buf;
}

namespace {

struct SweptPoint {
  ScenarioTemplate scenario;
  tts::FrameSchedule schedule;
};

SweptPoint apply_sweep(const ExperimentConfig& cfg, double value) {
  SweptPoint pt{cfg.scenario, cfg.schedule};
  switch (cfg.axis) {
    case SweepAxis::power:
      pt.scenario.p_t_dbm = value;
      break;
    case SweepAxis::n_antennas:
      pt.scenario.n_antennas = static_cast<int>(value);
      break;
    case SweepAxis::distance:
      if (pt.scenario.explicit_centers)
        for (auto& c : pt.scenario.centers) c.range_m = value;
      else {
        pt.scenario.center_range_m_lo = value;
        pt.scenario.center_range_m_hi = value;
      }
      break;
    case SweepAxis::spread:
      if (cfg.spread_kind == SpreadKind::aod) {
        pt.scenario.aod_spread_rad = value;
        pt.scenario.range_spread_m = 0.0;
      } else {
        pt.scenario.range_spread_m = value;
        pt.scenario.aod_spread_rad = 0.0;
      }
      break;
    case SweepAxis::frames: {
      const long total = static_cast<long>(cfg.schedule.t_frames) * cfg.schedule.ts_slots;
      pt.schedule.t_frames = static_cast<int>(value);
      pt.schedule.ts_slots =
          std::max(1, static_cast<int>(std::lround(static_cast<double>(total) / value)));
      break;
    }
  }
  return pt;
}

Scenario build_scenario(const ScenarioTemplate& tpl, Rng& rng) {
  std::vector<UePolar> centers;
  if (tpl.explicit_centers) {
    centers = tpl.centers;
  } else {
    centers.reserve(tpl.n_ues);
    for (int k = 0; k < tpl.n_ues; ++k) {
      UePolar c;
      c.aod_rad = rng.uniform(tpl.center_aod_deg_lo, tpl.center_aod_deg_hi) * kPi / 180.0;
      c.range_m = rng.uniform(tpl.center_range_m_lo, tpl.center_range_m_hi);
      centers.push_back(c);
    }
  }
  Scenario s;
  s.geometry = ArrayGeometry::from_carrier(tpl.n_antennas, tpl.carrier_freq_hz);
  s.path_loss = tpl.path_loss;
  s.mobility = MobilityModel(std::move(centers), tpl.aod_spread_rad, tpl.range_spread_m);
  s.n_rf = tpl.n_rf;
  s.noise_dbm = tpl.noise_dbm;
  s.p_t_w = dbm_to_watt(tpl.p_t_dbm);
  return s;
}

std::vector<int> selection_of(const AnalogBeamformer& analog) {
  std::vector<int> sel(analog.switches.rows(), 0);
  for (int n = 0; n < analog.switches.rows(); ++n)
    for (int l = 0; l < analog.switches.cols(); ++l)
      if (analog.switches(n, l) != 0) sel[n] = l + 1;
  return sel;
}

RunRecord run_task(const ExperimentConfig& cfg, int point_index, Algorithm alg, int seed_index) {
  const auto t0 = std::chrono::steady_clock::now();
  const double value = cfg.sweep_values[point_index];
  const std::uint64_t seed = cfg.seeds[seed_index];
  const SweptPoint pt = apply_sweep(cfg, value);

  Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(point_index));
  const Scenario scn = build_scenario(pt.scenario, rng);
  const RVec sigma2 = scn.sigma2();

  RunRecord rec;
  rec.point_index = point_index;
  rec.sweep_value = value;
  rec.algorithm = alg;
  rec.seed = seed;

  int m_active = scn.geometry.n_antennas;
  CMat f_rf, f_bb;

  if (!is_two_timescale(alg)) {
    const std::vector<UePolar> ues = sample_ue_locations(scn.mobility, rng);
    const CMat h = channel_matrix(scn.geometry, ues, scn.path_loss);
    switch (alg) {
      case Algorithm::fd_r: {
        const auto r = baselines::fully_digital_realtime(h, sigma2, scn.p_t_w, cfg.fp_settings);
        rec.sum_rate = r.final_rate();
        rec.trace.assign(r.trace.data(), r.trace.data() + r.trace.size());
        f_rf = r.f_rf;
        f_bb = r.f_bb;
        break;
      }
      case Algorithm::fc_r: {
        const auto r =
            baselines::fully_connected_realtime(h, sigma2, scn.p_t_w, scn.n_rf, cfg.fp_settings);
        rec.sum_rate = r.final_rate();
        rec.trace.assign(r.trace.data(), r.trace.data() + r.trace.size());
        f_rf = r.f_rf;
        f_bb = r.f_bb;
        break;
      }
      case Algorithm::fs_r: {
        const auto r =
            baselines::fixed_subarray_realtime(h, sigma2, scn.p_t_w, scn.n_rf, cfg.fp_settings);
        rec.sum_rate = r.final_rate();
        rec.trace.assign(r.trace.data(), r.trace.data() + r.trace.size());
        f_rf = r.f_rf;
        f_bb = r.f_bb;
        rec.selection = std::vector<int>(scn.geometry.n_antennas, 0);
        {
          const IMat pat = baselines::fixed_subarray_pattern(scn.geometry.n_antennas, scn.n_rf);
          for (int n = 0; n < pat.rows(); ++n)
            for (int l = 0; l < pat.cols(); ++l)
              if (pat(n, l) != 0) rec.selection[n] = l + 1;
        }
        break;
      }
      case Algorithm::ds_r: {
        const auto r = fp::run(h, sigma2, scn.p_t_w, scn.n_rf, cfg.fp_settings);
        rec.sum_rate = r.trace(r.trace.size() - 1);
        rec.trace.assign(r.trace.data(), r.trace.data() + r.trace.size());
        f_rf = compose(r.analog);
        f_bb = r.f_bb;
        m_active = r.analog.n_active();
        rec.active_fraction = static_cast<double>(m_active) / scn.geometry.n_antennas;
        rec.selection = selection_of(r.analog);
        break;
      }
      default:
        fail("unreachable algorithm branch");
    }
  } else {
    tts::TtsRunResult r = baselines::two_timescale_variant(architecture_of(alg), scn,
                                                           cfg.tts_params, pt.schedule, rng);
    rec.sum_rate = r.plateau_rate;
    rec.trace.assign(r.frame_rates.data(), r.frame_rates.data() + r.frame_rates.size());
    f_bb = r.f_bb;
    if (alg == Algorithm::ds_t) {
      m_active = r.analog.n_active();
      rec.active_fraction = static_cast<double>(m_active) / scn.geometry.n_antennas;
      rec.selection = selection_of(r.analog);
      f_rf = compose(r.analog);
    } else if (alg == Algorithm::fs_t) {
      rec.selection = selection_of(r.analog);
      f_rf = compose(r.analog);
    } else {
      f_rf = baselines::compose_fully_connected(r.analog.theta, scn.geometry.n_antennas,
                                                scn.n_rf);
    }
  }

  PowerModel pm = cfg.power_model;
  pm.p_t_w = scn.p_t_w;
  rec.energy_eff = energy_efficiency(
      rec.sum_rate,
      total_power(architecture_of(alg), pm, scn.geometry.n_antennas, scn.n_rf, m_active));
  rec.overhead = estimation_overhead(
      is_two_timescale(alg) ? EstimationScheme::two_timescale : EstimationScheme::real_time,
      scn.geometry.n_antennas, scn.n_rf, scn.n_ues(), pt.schedule.t_frames,
      pt.schedule.ts_slots);
  if (cfg.debug_power_residual && f_rf.size() > 0 && f_bb.size() > 0)
    rec.power_residual = std::abs((f_rf * f_bb).squaredNorm() - scn.p_t_w);

  if (cfg.timing == TimingMode::wall) {
    const auto t1 = std::chrono::steady_clock::now();
    rec.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  }
  return rec;
}

}  // namespace

RunManifest run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();

  struct Task {
    int point;
    int alg;
    int seed;
  };
  std::vector<Task> tasks;
  for (int p = 0; p < static_cast<int>(config.sweep_values.size()); ++p)
    for (int a = 0; a < static_cast<int>(config.algorithms.size()); ++a)
      for (int s = 0; s < static_cast<int>(config.seeds.size()); ++s)
        tasks.push_back({p, a, s});

  std::vector<RunRecord> records(tasks.size());
  std::atomic<std::size_t> cursor{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&] {
    while (true) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= tasks.size()) break;
      try {
        records[i] =
            run_task(config, tasks[i].point, config.algorithms[tasks[i].alg], tasks[i].seed);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };

  unsigned n_threads = config.threads > 0 ? static_cast<unsigned>(config.threads)
                                          : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<std::size_t>(n_threads, tasks.size());
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);

  RunManifest manifest;
  manifest.name = config.name;
  manifest.config_hash = config.config_hash();
  manifest.software_version = kVersion;
  manifest.axis = to_string(config.axis);
  manifest.seeds = config.seeds;
  manifest.records = std::move(records);

  for (int p = 0; p < static_cast<int>(config.sweep_values.size()); ++p)
    for (int a = 0; a < static_cast<int>(config.algorithms.size()); ++a) {
      SummaryRow row;
      row.sweep_value = config.sweep_values[p];
      row.algorithm = to_string(config.algorithms[a]);
      double sum = 0, sum2 = 0, eff = 0, act = 0;
      int n = 0;
      for (const auto& rec : manifest.records)
        if (rec.point_index == p && rec.algorithm == config.algorithms[a]) {
          sum += rec.sum_rate;
          sum2 += rec.sum_rate * rec.sum_rate;
          eff += rec.energy_eff;
          act += rec.active_fraction;
          row.overhead = rec.overhead;
          ++n;
        }
      row.n_seeds = n;
      row.mean_sum_rate = sum / n;
      row.std_sum_rate = n > 1 ? std::sqrt(std::max(0.0, (sum2 - sum * sum / n) / (n - 1))) : 0.0;
      row.mean_energy_eff = eff / n;
      row.mean_active_fraction = act / n;
      manifest.rows.push_back(row);
    }

  if (config.timing == TimingMode::wall) {
    const auto t1 = std::chrono::steady_clock::now();
    manifest.wall_clock_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  }
  return manifest;
}

namespace {

json manifest_base_json(const RunManifest& m) {
  json j;
  j["name"] = m.name;
  j["config_hash"] = m.config_hash;
  j["software_version"] = m.software_version;
  j["axis"] = m.axis;
  j["seeds"] = m.seeds;
  json rows_json = json::array();
  for (const auto& row : m.rows)
    rows_json.push_back({{"sweep_value", row.sweep_value},
                         {"algorithm", row.algorithm},
                         {"mean_sum_rate", row.mean_sum_rate},
                         {"std_sum_rate", row.std_sum_rate},
                         {"mean_energy_eff", row.mean_energy_eff},
                         {"mean_active_fraction", row.mean_active_fraction},
                         {"overhead", row.overhead},
                         {"n_seeds", row.n_seeds}});
  j["rows"] = rows_json;
  return j;
}

}  // namespace

nlohmann::json RunManifest::to_json() const {
  json j = manifest_base_json(*this);
  j["manifest_hash"] = manifest_hash();
  j["wall_clock_ms"] = wall_clock_ms;
  return j;
}

std::string RunManifest::manifest_hash() const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx",
                static_cast<unsigned long long>(fnv1a64(manifest_base_json(*this).dump())));
  return buf;
}

void emit_csv(const RunManifest& manifest, const ExperimentConfig& config,
              const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("emit_csv: cannot create output directory " + out_dir);

  auto open = [&](const std::string& file) {
    std::ofstream out(fs::path(out_dir) / file, std::ios::binary);
    if (!out) throw IoError("emit_csv: cannot write " + file + " under " + out_dir);
    return out;
  };

  {
    std::ofstream out = open("results.csv");
    out << "sweep_value,algorithm,seed,sum_rate,energy_eff,active_fraction,overhead,wall_ms";
    if (config.debug_power_residual) out << ",power_residual";
    out << "\n";
    for (const auto& rec : manifest.records) {
      out << fmt(rec.sweep_value) << ',' << to_string(rec.algorithm) << ',' << rec.seed << ','
          << fmt(rec.sum_rate) << ',' << fmt(rec.energy_eff) << ',' << fmt(rec.active_fraction)
          << ',' << fmt(rec.overhead) << ',' << fmt(rec.wall_ms);
      if (config.debug_power_residual) out << ',' << fmt(rec.power_residual);
      out << "\n";
    }
  }

  if (config.export_traces) {
    std::ofstream out = open("traces.csv");
    out << "sweep_value,algorithm,seed,step,sum_rate\n";
    for (const auto& rec : manifest.records)
      for (std::size_t i = 0; i < rec.trace.size(); ++i)
        out << fmt(rec.sweep_value) << ',' << to_string(rec.algorithm) << ',' << rec.seed << ','
            << i << ',' << fmt(rec.trace[i]) << "\n";
  }

  if (config.export_selection) {
    std::ofstream out = open("selection.csv");
    out << "sweep_value,algorithm,seed,antenna,rf_chain\n";
    for (const auto& rec : manifest.records)
      for (std::size_t n = 0; n < rec.selection.size(); ++n)
        out << fmt(rec.sweep_value) << ',' << to_string(rec.algorithm) << ',' << rec.seed << ','
            << (n + 1) << ',' << rec.selection[n] << "\n";
  }

  {
    std::ofstream out = open("manifest.json");
    out << manifest.to_json().dump(2) << "\n";
  }
}

std::string list_experiments() {
  std::ostringstream out;
  out << "Sweep axes (sweep.axis):\n"
      << "  power       sum-rate and energy efficiency vs transmit power; values in dBm\n"
      << "  n_antennas  sum-rate and energy efficiency vs array size; integer values\n"
      << "  distance    sum-rate vs BS-UE center distance; values in metres\n"
      << "  spread      sum-rate vs UE mobility spread; spread_kind picks aod (rad) or range (m),\n"
      << "              the other spread is held at zero\n"
      << "  frames      sum-rate and estimation overhead vs frames per super-frame; the\n"
      << "              super-frame length T*T_s is held fixed\n"
      << "Algorithms: FD-R, FC-R, FS-R, DS-R (real-time), FC-T, FS-T, DS-T (two-timescale)\n"
      << "Optional outputs: export_traces (per-iteration / per-frame sum-rate traces),\n"
      << "  export_selection (antenna-to-chain maps), debug_power_residual (extra CSV column)\n";
  return out.str();
}

}  // namespace nfbf::harness
