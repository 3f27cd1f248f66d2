#include "sac/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <ostream>

#include "sac/config.hpp"
#include "sac/ensemble.hpp"
#include "sac/errors.hpp"

namespace sac {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  std::string config_path;
  std::vector<std::string> sets;
  unsigned workers = 1;
  bool force = false;
  std::string report_path;
};

RunConfig load_config(const Options& opt) {
  json doc = json::object();
  if (!opt.config_path.empty()) doc = read_config_file(opt.config_path);
  for (const auto& s : opt.sets) apply_override(doc, s);
  return parse_config(doc);
}

fs::path prepare_output(const RunConfig& cfg) {
  fs::path dir(cfg.output.dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

// Returns the watermark flag, or throws HypothesisFailure when not forced.
struct HypothesisFailure {
  json report;
};

bool gate_hypotheses(const RunConfig& cfg, const Options& opt, std::ostream& err) {
  auto rep = check_hypotheses(cfg);
  if (rep.all_passed()) return false;
  if (!opt.force) throw HypothesisFailure{rep.to_json()};
  err << "warning: hypotheses failed, continuing because of --force\n";
  return true;
}

int cmd_check(const Options& opt, std::ostream& out) {
  RunConfig cfg = load_config(opt);
  auto rep = check_hypotheses(cfg);
  out << rep.to_json().dump(2) << '\n';
  return rep.all_passed() ? kExitOk : kExitDomain;
}

int cmd_run(const Options& opt, bool single, std::ostream& out, std::ostream& err) {
  RunConfig cfg = load_config(opt);
  if (single) cfg.ensemble.n_traj = 1;
  bool unverified = gate_hypotheses(cfg, opt, err);
  fs::path dir = prepare_output(cfg);
  auto result = run_ensemble(cfg, opt.workers, unverified);
  persist(result.report, (dir / "report.json").string());
  write_timeseries_csv(result.records, (dir / "timeseries.csv").string());
  const auto& a = result.report.aggregate;
  out << "trajectories: " << result.report.per_trajectory.size()
      << "  delta_min (min/median): " << a.delta_min_min << " / " << a.delta_min_median
      << "  clamp events: " << a.total_clamp_count << '\n'
      << "wrote " << (dir / "report.json").string() << " and "
      << (dir / "timeseries.csv").string() << '\n';
  return kExitOk;
}

int cmd_converge(const Options& opt, std::ostream& out, std::ostream& err) {
  RunConfig cfg = load_config(opt);
  if (!cfg.study) throw ConfigError("study: section required by converge");
  gate_hypotheses(cfg, opt, err);
  fs::path dir = prepare_output(cfg);
  auto study = convergence_study(cfg, opt.workers);
  json j = to_json(study);
  std::ofstream f(dir / "study.json", std::ios::binary);
  if (!f) throw IoError("cannot write '" + (dir / "study.json").string() + "'");
  f << j.dump(2) << '\n';
  out << j.dump(2) << '\n';
  if (study.kind == StudyKind::noise_scale) return kExitOk;
  return study.monotone_decrease ? kExitOk : kExitDomain;
}

int cmd_certify(const Options& opt, std::ostream& out) {
  fs::path report_path = opt.report_path;
  if (report_path.empty()) report_path = fs::path(load_config(opt).output.dir) / "report.json";
  EnsembleReport report = load(report_path.string());
  RunConfig cfg = parse_config(report.config);
  auto series = read_timeseries_csv((report_path.parent_path() / "timeseries.csv").string());

  json per = json::array();
  bool all = true;
  for (const auto& summary : report.per_trajectory) {
    TrajectoryRecord rec;
    rec.trajectory_id = summary.trajectory_id;
    rec.seed = summary.seed;
    rec.meta = {cfg.domain.d, cfg.domain.L, cfg.noise.s0, cfg.alpha(), 0.25 * cfg.domain.L,
                cfg.domain.n};
    auto it = series.find(summary.trajectory_id);
    if (it == series.end()) {
      throw ConfigError("time series has no rows for trajectory " +
                        std::to_string(summary.trajectory_id));
    }
    rec.snapshots = it->second;
    auto audit = certificate_audit(rec);
    double min_slack = INFINITY;
    for (const auto& e : audit.entries) min_slack = std::min(min_slack, e.slack);
    bool ok = audit.all_passed();
    all = all && ok;
    per.push_back({{"trajectory_id", rec.trajectory_id},
                   {"epsilon_star", audit.epsilon_star},
                   {"M", audit.M},
                   {"Lambda", audit.Lambda},
                   {"snapshots", audit.entries.size()},
                   {"min_slack", std::isfinite(min_slack) ? json(min_slack) : json(nullptr)},
                   {"passed", ok}});
  }
  json j = {{"schema_version", kSchemaVersion},
            {"report", report_path.string()},
            {"all_passed", all},
            {"per_trajectory", per}};
  std::ofstream f(report_path.parent_path() / "certificate.json", std::ios::binary);
  if (f) f << j.dump(2) << '\n';
  out << "certificate audit: " << (all ? "pass" : "FAIL") << " (" << per.size()
      << " trajectories)\n";
  return all ? kExitOk : kExitDomain;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stochastic Allen-Cahn simulations with logarithmic potential"};
  app.name("sac");
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "JSON run configuration");
    sub->add_option("--set", opt.sets, "override a config key, e.g. time.dt=5e-4")
        ->expected(1)
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    sub->add_option("--workers", opt.workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--force", opt.force, "run even if hypotheses fail");
  };
  auto* check = app.add_subcommand("check-hypotheses", "validate the structural hypotheses");
  auto* simulate = app.add_subcommand("simulate", "run one trajectory");
  auto* ensemble = app.add_subcommand("ensemble", "run a Monte Carlo ensemble");
  auto* converge = app.add_subcommand("converge", "run the refinement study in study:");
  auto* certify = app.add_subcommand("certify", "audit a stored ensemble with the separation certificate");
  for (auto* sub : {check, simulate, ensemble, converge, certify}) add_common(sub);
  certify->add_option("--report", opt.report_path, "report.json to audit");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*check) return cmd_check(opt, out);
    if (*simulate) return cmd_run(opt, true, out, err);
    if (*ensemble) return cmd_run(opt, false, out, err);
    if (*converge) return cmd_converge(opt, out, err);
    if (*certify) return cmd_certify(opt, out);
  } catch (const HypothesisFailure& f) {
    err << "hypotheses failed (use --force to run anyway):\n" << f.report.dump(2) << '\n';
    return kExitDomain;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const VersionError& e) {
    err << "version error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  }
  return kExitConfig;
}

}  // namespace sac
