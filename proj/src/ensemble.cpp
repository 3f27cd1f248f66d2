#include "sac/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

#include "sac/brownian.hpp"
#include "sac/errors.hpp"
#include "sac/solver.hpp"

namespace sac {

using nlohmann::json;

TrajectorySummary summarize(const TrajectoryRecord& rec) {
  TrajectorySummary s;
  s.trajectory_id = rec.trajectory_id;
  s.seed = rec.seed;
  s.delta_min = rec.delta_min;
  s.delta_min_steps = rec.delta_min_steps;
  s.max_g_mass = rec.max_g_mass();
  s.max_holder = rec.max_holder();
  s.clamp_count = rec.clamp_count;
  s.g_mass_s0p1_integral = rec.g_mass_s0p1_integral;
  return s;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw ParameterError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  double pos = q * static_cast<double>(values.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(pos));
  auto hi = std::min(lo + 1, values.size() - 1);
  double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

Aggregate aggregate(const std::vector<TrajectorySummary>& per_trajectory, double delta0) {
  if (per_trajectory.empty()) throw ParameterError("aggregate of an empty ensemble");
  Aggregate a;
  std::vector<double> deltas;
  std::vector<double> integrals;
  std::size_t separated = 0;
  for (const auto& s : per_trajectory) {
    deltas.push_back(s.delta_min);
    integrals.push_back(s.g_mass_s0p1_integral);
    if (s.delta_min >= 0.5 * delta0) ++separated;
    a.total_clamp_count += s.clamp_count;
  }
  a.delta_min_min = *std::min_element(deltas.begin(), deltas.end());
  a.delta_min_max = *std::max_element(deltas.begin(), deltas.end());
  a.delta_min_q05 = quantile(deltas, 0.05);
  a.delta_min_q25 = quantile(deltas, 0.25);
  a.delta_min_median = quantile(deltas, 0.5);
  a.delta_min_q75 = quantile(deltas, 0.75);
  a.delta_min_q95 = quantile(deltas, 0.95);
  a.fraction_separated_half_delta0 =
      static_cast<double>(separated) / static_cast<double>(per_trajectory.size());
  bool finite = std::all_of(integrals.begin(), integrals.end(),
                            [](double v) { return std::isfinite(v); });
  for (int q : {1, 2, 4}) {
    if (finite) {
      a.exp_moments[q] = exp_moment_estimate(integrals, q);
    } else {
      a.exp_moments[q] = MomentEstimate{NAN, NAN, false};
    }
  }
  return a;
}

void parallel_for(std::size_t count, unsigned workers,
                  const std::function<void(std::size_t)>& task) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(count)));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n);
    for (unsigned w = 0; w < n; ++w) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

EnsembleResult run_ensemble(const RunConfig& cfg, unsigned workers, bool hypotheses_unverified) {
  const LogPotential p = cfg.make_potential();
  const PotentialConstants c = cfg.constants();
  const NoiseFamily noise = cfg.make_noise();
  const SchemeConfig scheme = cfg.scheme_config();
  const Field u0 = make_initial_field(cfg);
  const std::string fp = fingerprint(cfg);
  const std::size_t n = cfg.ensemble.n_traj;

  EnsembleResult out;
  out.records.resize(n);
  parallel_for(n, workers, [&](std::size_t i) {
    const std::uint64_t seed = trajectory_seed(cfg.ensemble.master_seed, i);
    try {
      RecordOptions opts;
      opts.trajectory_id = i;
      opts.config_fingerprint = fp;
      opts.stride = cfg.time.stride;
      opts.alpha = cfg.alpha();
      opts.delta0 = cfg.init.delta0;
      out.records[i] = run_trajectory(u0, cfg.time.T, scheme, p, c, noise,
                                      BrownianPath(seed, cfg.time.dt), opts);
    } catch (const std::exception& e) {
      throw TrajectoryError(i, seed, e.what());
    }
  });

  EnsembleReport& r = out.report;
  r.config = to_json(cfg);
  r.config_fingerprint = fp;
  r.hypotheses_unverified = hypotheses_unverified;
  for (const auto& rec : out.records) r.per_trajectory.push_back(summarize(rec));
  r.aggregate = aggregate(r.per_trajectory, cfg.init.delta0);
  return out;
}

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& j, double if_null) {
  if (j.is_null()) return if_null;
  return j.get<double>();
}

}  // namespace

json to_json(const EnsembleReport& r) {
  json j;
  j["schema_version"] = r.schema_version;
  j["config"] = {{"effective", r.config},
                 {"fingerprint", r.config_fingerprint},
                 {"hypotheses_unverified", r.hypotheses_unverified}};
  j["per_trajectory"] = json::array();
  for (const auto& s : r.per_trajectory) {
    j["per_trajectory"].push_back({{"trajectory_id", s.trajectory_id},
                                   {"seed", s.seed},
                                   {"delta_min", number_or_null(s.delta_min)},
                                   {"delta_min_steps", number_or_null(s.delta_min_steps)},
                                   {"max_g_mass", number_or_null(s.max_g_mass)},
                                   {"max_holder", number_or_null(s.max_holder)},
                                   {"clamp_count", s.clamp_count},
                                   {"g_mass_s0p1_integral", number_or_null(s.g_mass_s0p1_integral)}});
  }
  const Aggregate& a = r.aggregate;
  json moments = json::object();
  for (const auto& [q, m] : a.exp_moments) {
    moments[std::to_string(q)] = {{"mean", number_or_null(m.mean)},
                                  {"stderr", number_or_null(m.stderr_)},
                                  {"overflow", m.overflow}};
  }
  j["aggregate"] = {{"delta_min_min", a.delta_min_min},
                    {"delta_min_q05", a.delta_min_q05},
                    {"delta_min_q25", a.delta_min_q25},
                    {"delta_min_median", a.delta_min_median},
                    {"delta_min_q75", a.delta_min_q75},
                    {"delta_min_q95", a.delta_min_q95},
                    {"delta_min_max", a.delta_min_max},
                    {"fraction_separated_half_delta0", a.fraction_separated_half_delta0},
                    {"total_clamp_count", a.total_clamp_count},
                    {"exp_moments", moments}};
  return j;
}

EnsembleReport report_from_json(const json& j) {
  if (!j.is_object() || !j.contains("schema_version")) {
    throw VersionError("report has no schema_version");
  }
  std::string version = j.at("schema_version").is_string()
                            ? j.at("schema_version").get<std::string>()
                            : j.at("schema_version").dump();
  if (version != kSchemaVersion) {
    throw VersionError("report schema version '" + version + "' is not supported (expected '" +
                       kSchemaVersion + "')");
  }
  try {
    EnsembleReport r;
    r.schema_version = version;
    const json& cfg = j.at("config");
    r.config = cfg.at("effective");
    r.config_fingerprint = cfg.at("fingerprint").get<std::string>();
    r.hypotheses_unverified = cfg.at("hypotheses_unverified").get<bool>();
    for (const auto& s : j.at("per_trajectory")) {
      TrajectorySummary t;
      t.trajectory_id = s.at("trajectory_id").get<std::uint64_t>();
      t.seed = s.at("seed").get<std::uint64_t>();
      t.delta_min = number_from(s.at("delta_min"), NAN);
      t.delta_min_steps = number_from(s.at("delta_min_steps"), NAN);
      t.max_g_mass = number_from(s.at("max_g_mass"), NAN);
      t.max_holder = number_from(s.at("max_holder"), NAN);
      t.clamp_count = s.at("clamp_count").get<std::uint64_t>();
      t.g_mass_s0p1_integral = number_from(s.at("g_mass_s0p1_integral"), NAN);
      r.per_trajectory.push_back(t);
    }
    const json& a = j.at("aggregate");
    Aggregate& g = r.aggregate;
    g.delta_min_min = a.at("delta_min_min").get<double>();
    g.delta_min_q05 = a.at("delta_min_q05").get<double>();
    g.delta_min_q25 = a.at("delta_min_q25").get<double>();
    g.delta_min_median = a.at("delta_min_median").get<double>();
    g.delta_min_q75 = a.at("delta_min_q75").get<double>();
    g.delta_min_q95 = a.at("delta_min_q95").get<double>();
    g.delta_min_max = a.at("delta_min_max").get<double>();
    g.fraction_separated_half_delta0 = a.at("fraction_separated_half_delta0").get<double>();
    g.total_clamp_count = a.at("total_clamp_count").get<std::uint64_t>();
    for (const auto& [key, m] : a.at("exp_moments").items()) {
      MomentEstimate e;
      e.overflow = m.at("overflow").get<bool>();
      e.mean = number_from(m.at("mean"), e.overflow ? INFINITY : NAN);
      e.stderr_ = number_from(m.at("stderr"), e.overflow ? INFINITY : NAN);
      g.exp_moments[std::stoi(key)] = e;
    }
    return r;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed report: ") + e.what());
  }
}

void persist(const EnsembleReport& r, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write report '" + path + "'");
  out << to_json(r).dump(2) << '\n';
  if (!out) throw IoError("write failed for '" + path + "'");
}

EnsembleReport load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read report '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return report_from_json(j);
}

void write_timeseries_csv(const std::vector<TrajectoryRecord>& records, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw IoError("cannot write time series '" + path + "'");
  std::fprintf(f, "%s\n", kCsvHeader);
  for (const auto& rec : records) {
    for (const auto& s : rec.snapshots) {
      std::fprintf(f, "%llu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                   static_cast<unsigned long long>(rec.trajectory_id), s.t, s.delta, s.energy,
                   s.g_mass_s0, s.g_mass_s0p1, s.l2, s.h1, s.h2_proxy, s.sup, s.holder_alpha);
    }
  }
  bool ok = std::ferror(f) == 0;
  ok = std::fclose(f) == 0 && ok;
  if (!ok) throw IoError("write failed for '" + path + "'");
}

std::map<std::uint64_t, std::vector<Snapshot>> read_timeseries_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read time series '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw ConfigError(path + ": unexpected CSV header");
  }
  std::map<std::uint64_t, std::vector<Snapshot>> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 11) {
      throw ConfigError(path + ": row " + std::to_string(row) + " has " +
                        std::to_string(cells.size()) + " columns");
    }
    auto num = [&](int i) { return std::strtod(cells[i].c_str(), nullptr); };
    Snapshot s;
    s.t = num(1);
    s.delta = num(2);
    s.energy = num(3);
    s.g_mass_s0 = num(4);
    s.g_mass_s0p1 = num(5);
    s.l2 = num(6);
    s.h1 = num(7);
    s.h2_proxy = num(8);
    s.sup = num(9);
    s.holder_alpha = num(10);
    out[std::stoull(cells[0])].push_back(s);
  }
  return out;
}

namespace {

double l2_distance(const Field& a, const Field& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double diff = a[i] - b[i];
    acc += diff * diff;
  }
  return std::sqrt(acc * a.grid.cell_volume());
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) return false;
  }
  return true;
}

double rms(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc / static_cast<double>(v.size()));
}

StudyReport dt_study(const RunConfig& cfg, double T, unsigned workers) {
  StudyReport rep;
  rep.kind = StudyKind::dt_refine;
  rep.levels = cfg.study->levels;
  const double fine = *std::min_element(rep.levels.begin(), rep.levels.end());
  std::vector<std::uint64_t> substeps;
  for (double dt : rep.levels) {
    double ratio = dt / fine;
    double r = std::round(ratio);
    if (std::abs(ratio - r) > 1e-9 * r) {
      throw ConfigError("study.levels: every dt must be an integer multiple of the finest");
    }
    substeps.push_back(static_cast<std::uint64_t>(r));
  }
  const LogPotential p = cfg.make_potential();
  const PotentialConstants c = cfg.constants();
  const NoiseFamily noise = cfg.make_noise();
  const Field u0 = make_initial_field(cfg);
  const std::size_t n = cfg.ensemble.n_traj;
  const std::size_t L = rep.levels.size();

  std::vector<std::vector<double>> dist(L - 1, std::vector<double>(n));
  parallel_for(n, workers, [&](std::size_t i) {
    const std::uint64_t seed = trajectory_seed(cfg.ensemble.master_seed, i);
    std::vector<Field> finals;
    for (std::size_t l = 0; l < L; ++l) {
      SchemeConfig s = cfg.scheme_config();
      s.dt = rep.levels[l];
      finals.push_back(integrate_to(u0, T, s, p, c, noise, BrownianPath(seed, fine, substeps[l])));
    }
    for (std::size_t l = 0; l + 1 < L; ++l) dist[l][i] = l2_distance(finals[l], finals[l + 1]);
  });
  for (const auto& d : dist) rep.distances.push_back(rms(d));
  rep.monotone_decrease = strictly_decreasing(rep.distances);
  rep.details = {{"T", T}, {"finest_dt", fine}, {"n_traj", n}, {"pairs", "consecutive levels"}};
  return rep;
}

StudyReport lambda_study(const RunConfig& cfg, double T, unsigned workers) {
  StudyReport rep;
  rep.kind = StudyKind::lambda_refine;
  rep.levels = cfg.study->levels;
  const LogPotential p = cfg.make_potential();
  const PotentialConstants c = cfg.constants();
  const NoiseFamily noise = cfg.make_noise();
  const Field u0 = make_initial_field(cfg);
  const std::size_t n = cfg.ensemble.n_traj;
  const std::size_t L = rep.levels.size();

  std::vector<std::vector<double>> dist(L, std::vector<double>(n));
  parallel_for(n, workers, [&](std::size_t i) {
    const std::uint64_t seed = trajectory_seed(cfg.ensemble.master_seed, i);
    const BrownianPath path(seed, cfg.time.dt);
    SchemeConfig ref = cfg.scheme_config();
    ref.kind = SchemeKind::split_implicit;
    Field reference = integrate_to(u0, T, ref, p, c, noise, path);
    for (std::size_t l = 0; l < L; ++l) {
      SchemeConfig s = cfg.scheme_config();
      s.kind = SchemeKind::yosida_galerkin;
      s.lambda = rep.levels[l];
      dist[l][i] = l2_distance(integrate_to(u0, T, s, p, c, noise, path), reference);
    }
  });
  for (const auto& d : dist) rep.distances.push_back(rms(d));
  rep.monotone_decrease = strictly_decreasing(rep.distances);
  rep.details = {{"T", T}, {"dt", cfg.time.dt}, {"n_traj", n}, {"reference", "split_implicit"}};
  return rep;
}

StudyReport grid_study(const RunConfig& cfg, double T) {
  StudyReport rep;
  rep.kind = StudyKind::grid_refine;
  rep.levels = cfg.study->levels;
  const LogPotential p = cfg.make_potential();
  const PotentialConstants c = cfg.constants();
  const NoiseFamily silent = make_polynomial_family(cfg.noise.s0, 1, 0.0, cfg.noise.gamma);
  const int d = cfg.domain.d;
  const double L = cfg.domain.L;
  const double exact = std::exp(-d * std::numbers::pi * std::numbers::pi * T / (L * L));

  json per_level = json::array();
  for (double level : rep.levels) {
    int n = static_cast<int>(std::lround(level));
    Grid g(d, n, L);
    // continuous first Dirichlet mode sampled at the nodes
    Field phi(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      std::size_t idx = i;
      double v = 1.0;
      for (int a = 0; a < d; ++a) {
        int ia = static_cast<int>(idx % n);
        idx /= n;
        v *= std::sin(std::numbers::pi * (ia + 1) * g.h() / L);
      }
      phi[i] = v;
    }
    Field u0 = phi;
    double scale = (1.0 - cfg.init.delta0) / sup_norm(phi);
    for (double& v : u0.values) v *= scale;

    SchemeConfig s = cfg.scheme_config();
    s.kind = SchemeKind::split_implicit;
    s.reaction = false;
    Field uT = integrate_to(u0, T, s, p, c, silent, BrownianPath(0, s.dt));
    auto amplitude = [&](const Field& u) {
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) {
        num += u[i] * phi[i];
        den += phi[i] * phi[i];
      }
      return num / den;
    };
    double ratio = amplitude(uT) / amplitude(u0);
    double err = std::abs(ratio / exact - 1.0);
    rep.distances.push_back(err);
    per_level.push_back({{"n", n}, {"decay_ratio", ratio}, {"relative_error", err}});
  }
  rep.monotone_decrease = strictly_decreasing(rep.distances);
  json orders = json::array();
  for (std::size_t l = 0; l + 1 < rep.distances.size(); ++l) {
    double hr = (rep.levels[l + 1] + 1.0) / (rep.levels[l] + 1.0);
    orders.push_back(std::log(rep.distances[l] / rep.distances[l + 1]) / std::log(hr));
  }
  rep.details = {{"T", T},       {"dt", cfg.time.dt},         {"exact_decay", exact},
                 {"levels", per_level}, {"observed_order", orders}};
  return rep;
}

StudyReport noise_study(const RunConfig& cfg, unsigned workers) {
  StudyReport rep;
  rep.kind = StudyKind::noise_scale;
  rep.levels = cfg.study->levels;
  json per_level = json::array();
  for (double sigma : rep.levels) {
    RunConfig level = cfg;
    level.noise.sigma0 = sigma;
    level.study.reset();
    auto res = run_ensemble(level, workers);
    rep.distances.push_back(res.report.aggregate.delta_min_median);
    per_level.push_back({{"sigma0", sigma},
                         {"delta_min_median", res.report.aggregate.delta_min_median},
                         {"delta_min_min", res.report.aggregate.delta_min_min}});
  }
  // reported trend: median separation layer shrinks as the noise grows
  rep.monotone_decrease = true;
  for (std::size_t i = 1; i < rep.distances.size(); ++i) {
    if (rep.distances[i] > rep.distances[i - 1]) rep.monotone_decrease = false;
  }
  rep.details = {{"levels", per_level}, {"n_traj", cfg.ensemble.n_traj}};
  return rep;
}

}  // namespace

StudyReport convergence_study(const RunConfig& cfg, unsigned workers) {
  if (!cfg.study) throw ConfigError("study: section required for convergence studies");
  const double T = cfg.study->T > 0.0 ? cfg.study->T : cfg.time.T;
  switch (cfg.study->kind) {
    case StudyKind::dt_refine: return dt_study(cfg, T, workers);
    case StudyKind::lambda_refine: return lambda_study(cfg, T, workers);
    case StudyKind::grid_refine: return grid_study(cfg, T);
    case StudyKind::noise_scale: return noise_study(cfg, workers);
  }
  throw ConfigError("unknown study");
}

json to_json(const StudyReport& s) {
  return {{"schema_version", kSchemaVersion},
          {"study", to_string(s.kind)},
          {"levels", s.levels},
          {"distances", s.distances},
          {"monotone_decrease", s.monotone_decrease},
          {"details", s.details}};
}

}  // namespace sac
