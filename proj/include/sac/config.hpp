#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sac/discretization.hpp"
#include "sac/noise.hpp"
#include "sac/potential.hpp"
#include "sac/solver.hpp"

namespace sac {

enum class InitKind { constant, eigen_bump, file };
enum class StudyKind { dt_refine, grid_refine, lambda_refine, noise_scale };

const char* to_string(InitKind k);
const char* to_string(StudyKind k);

struct DomainSection {
  int d = 1;
  int n = 63;
  double L = 1.0;
};

struct TimeSection {
  double T = 1.0;
  double dt = 1e-3;
  std::uint64_t stride = 10;
};

struct PotentialSection {
  double theta = 1.0;
  double theta0 = 2.0;
  std::optional<double> c_f;  // default theta0 - theta
  double s_f = 1.0;
};

struct NoiseSection {
  int s0 = 3;
  int K = 16;
  double sigma0 = 0.1;
  double gamma = 1.0;
};

struct SchemeSection {
  SchemeKind kind = SchemeKind::split_implicit;
  double lambda = 1e-2;
  std::size_t n_modes = 0;
  double newton_tol = 1e-12;
  int max_newton = 100;
};

struct EnsembleSection {
  std::uint64_t master_seed = 20240101;
  std::uint64_t n_traj = 1;
};

struct InitSection {
  InitKind kind = InitKind::eigen_bump;
  double amplitude = 1.0;
  double delta0 = 0.5;
  std::string file;
};

struct OutputSection {
  std::string dir = "out";
};

struct DiagnosticsSection {
  std::optional<double> alpha;  // default_alpha(d)
};

struct StudySection {
  StudyKind kind = StudyKind::dt_refine;
  std::vector<double> levels;
  double T = 0.0;  // 0 uses time.T
};

/// Effective run configuration. Every field has a default; parsing rejects
/// unknown keys and out-of-range values.
struct RunConfig {
  DomainSection domain;
  TimeSection time;
  PotentialSection potential;
  NoiseSection noise;
  SchemeSection scheme;
  EnsembleSection ensemble;
  InitSection init;
  OutputSection output;
  DiagnosticsSection diagnostics;
  std::optional<StudySection> study;

  Grid grid() const;
  LogPotential make_potential() const;
  PotentialConstants constants() const;
  NoiseFamily make_noise() const;
  SchemeConfig scheme_config() const;
  double alpha() const;
};

RunConfig parse_config(const nlohmann::json& doc);
nlohmann::json to_json(const RunConfig& cfg);

/// Reads a JSON config file; ConfigError on malformed content, IoError if unreadable.
nlohmann::json read_config_file(const std::string& path);

/// Applies "a.b.c=value"; value parsed as JSON when possible, else as a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// 16 hex digits of FNV-1a over the canonical dump of the effective config.
std::string fingerprint(const RunConfig& cfg);

/// Initial datum per init section: constant c, amplitude-signed first
/// eigenvector scaled to sup = 1 - delta0, or node values from a CSV file.
Field make_initial_field(const RunConfig& cfg);

struct HypothesisEntry {
  std::string name;
  bool passed;
  double measured;
  std::string detail;
};

struct HypothesisReport {
  std::vector<HypothesisEntry> entries;
  PotentialConstants potential_constants;
  NoiseConstants noise_constants;
  bool all_passed() const;
  nlohmann::json to_json() const;
};

/// Structural potential checks, noise constants and Taylor bounds, the
/// admissibility floor s0 >= d s_F - 1 and the dimension thresholds for
/// separation (s0 > 2 for d <= 2, s0 > 6 for d = 3).
HypothesisReport check_hypotheses(const RunConfig& cfg);

}  // namespace sac
