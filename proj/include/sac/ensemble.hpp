#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "sac/config.hpp"
#include "sac/diagnostics.hpp"

namespace sac {

inline constexpr const char* kSchemaVersion = "1";

struct TrajectorySummary {
  std::uint64_t trajectory_id = 0;
  std::uint64_t seed = 0;
  double delta_min = 0.0;
  double delta_min_steps = 0.0;
  double max_g_mass = 0.0;
  double max_holder = 0.0;
  std::uint64_t clamp_count = 0;
  double g_mass_s0p1_integral = 0.0;

  bool operator==(const TrajectorySummary&) const = default;
};

TrajectorySummary summarize(const TrajectoryRecord& rec);

struct Aggregate {
  double delta_min_min = 0.0;
  double delta_min_q05 = 0.0;
  double delta_min_q25 = 0.0;
  double delta_min_median = 0.0;
  double delta_min_q75 = 0.0;
  double delta_min_q95 = 0.0;
  double delta_min_max = 0.0;
  double fraction_separated_half_delta0 = 0.0;  // delta_min >= delta0 / 2
  std::uint64_t total_clamp_count = 0;
  std::map<int, MomentEstimate> exp_moments;     // keyed by q in {1, 2, 4}

  bool operator==(const Aggregate&) const = default;
};

/// Recomputes every aggregate from the per-trajectory summaries.
Aggregate aggregate(const std::vector<TrajectorySummary>& per_trajectory, double delta0);

/// Linear-interpolation quantile of a sample (q in [0, 1]).
double quantile(std::vector<double> values, double q);

struct EnsembleReport {
  std::string schema_version = kSchemaVersion;
  nlohmann::json config;  // effective config
  std::string config_fingerprint;
  bool hypotheses_unverified = false;
  std::vector<TrajectorySummary> per_trajectory;
  Aggregate aggregate;

  bool operator==(const EnsembleReport&) const = default;
};

struct EnsembleResult {
  EnsembleReport report;
  std::vector<TrajectoryRecord> records;
};

/// Runs cfg.ensemble.n_traj trajectories on `workers` threads. Trajectory i
/// uses seed trajectory_seed(master_seed, i); output does not depend on the
/// worker count. A failing trajectory raises TrajectoryError with the
/// lowest failing id and its seed.
EnsembleResult run_ensemble(const RunConfig& cfg, unsigned workers = 1,
                            bool hypotheses_unverified = false);

/// Runs task(i) for i < count on up to `workers` threads; rethrows the
/// exception of the lowest failing index.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& task);

nlohmann::json to_json(const EnsembleReport& r);
EnsembleReport report_from_json(const nlohmann::json& j);

/// Writes the report JSON (pretty-printed, LF endings).
void persist(const EnsembleReport& r, const std::string& path);
EnsembleReport load(const std::string& path);

inline constexpr const char* kCsvHeader =
    "traj_id,t,delta,energy,g_mass_s0,g_mass_s0p1,l2,h1,h2_proxy,sup_u,holder_alpha";

/// One row per (trajectory, snapshot), 17 significant digits.
void write_timeseries_csv(const std::vector<TrajectoryRecord>& records, const std::string& path);

/// Snapshots grouped by trajectory id, in file order.
std::map<std::uint64_t, std::vector<Snapshot>> read_timeseries_csv(const std::string& path);

struct StudyReport {
  StudyKind kind = StudyKind::dt_refine;
  std::vector<double> levels;
  /// dt/lambda: RMS over trajectories of the L2 distance at T between
  /// consecutive levels (dt) or to the split-implicit reference (lambda).
  /// grid: relative error of the first-mode decay against exp(-d pi^2 T / L^2).
  /// noise: median delta_min per level.
  std::vector<double> distances;
  bool monotone_decrease = false;
  nlohmann::json details;
};

/// Runs the refinement study named in cfg.study with coupled Brownian paths.
StudyReport convergence_study(const RunConfig& cfg, unsigned workers = 1);

nlohmann::json to_json(const StudyReport& s);

}  // namespace sac
