#ifndef NFBF_HARNESS_HPP
#define NFBF_HARNESS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "nfbf/baselines.hpp"
#include "nfbf/fp_realtime.hpp"
#include "nfbf/scenario.hpp"
#include "nfbf/two_timescale.hpp"

namespace nfbf::harness {

inline constexpr const char* kVersion = "0.1.0";

enum class SweepAxis { power, n_antennas, distance, spread, frames };
enum class SpreadKind { aod, range };
enum class TimingMode { none, wall };

/// Algorithm tags name the architecture plus the framework:
/// -R (real-time) or -T (two-timescale).
enum class Algorithm { fd_r, fc_r, fs_r, ds_r, fc_t, fs_t, ds_t };

Algorithm algorithm_from_string(const std::string& tag);
std::string to_string(Algorithm alg);
Architecture architecture_of(Algorithm alg);
bool is_two_timescale(Algorithm alg);

SweepAxis axis_from_string(const std::string& tag);
std::string to_string(SweepAxis axis);

/// Scenario template before sweep substitution. UE centers are either given
/// explicitly or drawn per seed from the configured uniform boxes.
struct ScenarioTemplate {
  int n_antennas = 64;
  double carrier_freq_hz = 28e9;
  int n_rf = 3;
  int n_ues = 3;
  double noise_dbm = -80.0;
  double p_t_dbm = 30.0;
  PathLossModel path_loss;
  bool explicit_centers = false;
  std::vector<UePolar> centers;
  double center_aod_deg_lo = -60.0, center_aod_deg_hi = 60.0;
  double center_range_m_lo = 2.0, center_range_m_hi = 5.0;
  double aod_spread_rad = kPi / 48.0;
  double range_spread_m = 1.0;
};

struct ExperimentConfig {
  std::string name = "experiment";
  ScenarioTemplate scenario;
  std::vector<Algorithm> algorithms;
  SweepAxis axis = SweepAxis::power;
  std::vector<double> sweep_values;
  SpreadKind spread_kind = SpreadKind::aod;
  std::vector<std::uint64_t> seeds;
  std::string output_dir = "out";
  int threads = 0;  // 0 -> hardware concurrency
  TimingMode timing = TimingMode::none;
  bool export_traces = false;
  bool export_selection = false;
  bool debug_power_residual = false;
  fp::FpSettings fp_settings;
  tts::SscaParams tts_params;
  tts::FrameSchedule schedule{40, 50};
  PowerModel power_model;

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load_file(const std::string& path);
  static ExperimentConfig load_string(const std::string& text);

  /// Full semantic validation; throws ConfigError with a descriptive message.
  void validate() const;

  nlohmann::json canonical_json() const;
  std::string config_hash() const;
};

/// One (sweep point, algorithm, seed) result.
struct RunRecord {
  int point_index = 0;
  double sweep_value = 0.0;
  Algorithm algorithm = Algorithm::ds_r;
  std::uint64_t seed = 0;
  double sum_rate = 0.0;
  double energy_eff = 0.0;
  double active_fraction = 1.0;
  double overhead = 0.0;
  double wall_ms = 0.0;
  double power_residual = 0.0;
  std::vector<double> trace;    // per outer iteration (-R) / per frame (-T)
  std::vector<int> selection;   // per antenna: 0 = off, else 1-based chain
};

struct SummaryRow {
  double sweep_value = 0.0;
  std::string algorithm;
  double mean_sum_rate = 0.0;
  double std_sum_rate = 0.0;
  double mean_energy_eff = 0.0;
  double mean_active_fraction = 0.0;
  double overhead = 0.0;
  int n_seeds = 0;
};

struct RunManifest {
  std::string name;
  std::string config_hash;
  std::string software_version;
  std::string axis;
  std::vector<std::uint64_t> seeds;
  std::vector<RunRecord> records;   // ordered (point, algorithm, seed)
  std::vector<SummaryRow> rows;     // one per (point, algorithm)
  double wall_clock_ms = 0.0;       // informational, outside the hash

  /// FNV-1a over the canonical dump with wall clock excluded.
  std::string manifest_hash() const;
  nlohmann::json to_json() const;
};

/// Deterministic given the config: every record's stream is derived from
/// (seed, point index), so algorithms at the same point and seed see the same
/// channel realizations (paired comparisons).
RunManifest run_experiment(const ExperimentConfig& config);

/// Writes results.csv and manifest.json (plus traces.csv / selection.csv when
/// enabled) under out_dir, creating it if needed.
void emit_csv(const RunManifest& manifest, const ExperimentConfig& config,
              const std::string& out_dir);

/// Human-readable catalogue of the supported sweep axes and exports.
std::string list_experiments();

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace nfbf::harness

#endif
