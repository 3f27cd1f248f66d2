// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "sac/config.hpp"
#include "sac/diagnostics.hpp"
#include "sac/ensemble.hpp"
#include "sac/errors.hpp"
#include "sac/solver.hpp"

using namespace sac;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and budgets.
constexpr double kResolventResidual = 1e-10;
constexpr double kYosidaFinal = 1e-4;
constexpr double kEnergySlack = 1e-10;
constexpr double kMomentRelStderr = 0.5;
constexpr double kClosedFormTol = 1e-8;
constexpr double kHeatDecayTol = 0.02;
constexpr double kLipschitzSpread = 2.0;
constexpr double kGoldenRel = 1e-9;

// Seed-locked fixtures of the criterion-5 ensembles (master_seed 20240101):
// E exp(q int_0^T int G_{s0+1}) for q = 1, 2.
constexpr double kGolden1dQ1 = 2.7866703189997324;
constexpr double kGolden1dQ2 = 7.7656285344110216;
constexpr double kGolden2dQ1 = 2.5812833341211543;
constexpr double kGolden2dQ2 = 6.6630282288645937;

constexpr double kBudget1 = 1.0;
constexpr double kBudget2 = 1.0;
constexpr double kBudget3 = 5.0;
constexpr double kBudget4 = 10.0;
constexpr double kBudget5 = 300.0;
constexpr double kBudget7 = 30.0;
constexpr double kBudget8 = 300.0;
constexpr double kBudget9 = 900.0;
constexpr double kBudget10 = 60.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool passed = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      passed = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

int failures = 0;

void report(int id, const std::string& name, Outcome o, double elapsed, double budget) {
  std::ostringstream t;
  t.precision(3);
  t << elapsed << " s / " << budget << " s";
  o.require(elapsed < budget, "runtime over budget");
  std::printf("%s criterion %d: %s [%s]%s%s\n", o.passed ? "PASS" : "FAIL", id, name.c_str(),
              t.str().c_str(), o.detail.empty() ? "" : " -- ", o.detail.c_str());
  std::fflush(stdout);
  if (!o.passed) ++failures;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

RunConfig config(std::initializer_list<std::string> sets) {
  json doc = json::object();
  for (const auto& s : sets) apply_override(doc, s);
  return parse_config(doc);
}

RunConfig ensemble_1d() {
  return config({"domain.d=1", "domain.n=63", "noise.s0=3", "noise.sigma0=0.1", "init.delta0=0.5",
                 "time.T=1", "time.dt=1e-3", "time.stride=10", "ensemble.n_traj=100"});
}

RunConfig ensemble_2d() {
  return config({"domain.d=2", "domain.n=31", "noise.s0=3", "noise.sigma0=0.1", "init.delta0=0.5",
                 "time.T=1", "time.dt=1e-3", "time.stride=10", "ensemble.n_traj=20"});
}

// ---------------------------------------------------------------------------

void criterion1() {
  auto t0 = Clock::now();
  Outcome o;
  LogPotential p(1.0, 2.0);
  auto c = p.default_constants();
  std::mt19937_64 rng(20240101);
  std::uniform_real_distribution<double> log_lambda(std::log(1e-3), std::log(1.0));
  std::uniform_real_distribution<double> X(-5.0, 5.0);
  double worst_res = 0.0, worst_lip = 0.0;
  for (int i = 0; i < 1000; ++i) {
    double lambda = std::exp(log_lambda(rng));
    double x1 = X(rng), x2 = X(rng);
    auto a = resolvent_point(p, c, lambda, x1);
    auto b = resolvent_point(p, c, lambda, x2);
    worst_res = std::max(worst_res, resolvent_residual(p, c, lambda, x1, a));
    if (x1 != x2) worst_lip = std::max(worst_lip, std::abs(a.y - b.y) / std::abs(x1 - x2));
    o.require(std::abs(a.y) <= 1.0, "resolvent left [-1, 1]");
  }
  o.require(worst_res <= kResolventResidual, "residual " + fmt(worst_res));
  o.require(worst_lip <= 1.0 + 1e-12, "contraction ratio " + fmt(worst_lip));
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("max residual ") + fmt(worst_res) +
              ", max |dJ|/|dx| " + fmt(worst_lip);
  report(1, "resolvent identity and contraction on 1000 random pairs", o, seconds_since(t0), kBudget1);
}

void criterion2() {
  auto t0 = Clock::now();
  Outcome o;
  LogPotential p(1.0, 2.0);
  auto c = p.default_constants();
  double worst_final = 0.0;
  for (double x : {-0.9, -0.5, 0.0, 0.5, 0.9}) {
    std::vector<double> err;
    for (int k = 1; k <= 6; ++k) {
      double lambda = std::pow(10.0, -k);
      err.push_back(std::abs(yosida_dF(p, c, lambda, x) - p.dF(x)));
    }
    if (x == 0.0) {
      // both sides vanish identically at the origin
      o.require(std::all_of(err.begin(), err.end(), [](double e) { return e == 0.0; }),
                "nonzero error at x = 0");
    } else {
      for (std::size_t i = 1; i < err.size(); ++i) {
        o.require(err[i] < err[i - 1], "not strictly decreasing at x = " + fmt(x));
      }
    }
    worst_final = std::max(worst_final, err.back());
  }
  o.require(worst_final <= kYosidaFinal, "final error " + fmt(worst_final));
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("max error at lambda=1e-6: ") + fmt(worst_final);
  report(2, "Yosida approximation converges monotonically to F'", o, seconds_since(t0), kBudget2);
}

void criterion3() {
  auto t0 = Clock::now();
  Outcome o;
  auto base = check_hypotheses(config({"potential.theta=1", "potential.theta0=2", "potential.c_f=1",
                                       "potential.s_f=1", "noise.s0=3", "domain.d=1"}));
  o.require(base.all_passed(), "reference configuration fails a hypothesis");
  auto d3 = check_hypotheses(config({"domain.d=3", "domain.n=7", "noise.s0=6"}));
  bool threshold_failed = false, others_passed = true;
  for (const auto& e : d3.entries) {
    if (e.name == "separation.s0_threshold") {
      threshold_failed = !e.passed;
    } else {
      others_passed = others_passed && e.passed;
    }
  }
  o.require(threshold_failed, "d=3, s0=6 does not fail the separation threshold");
  o.require(others_passed, "d=3, s0=6 fails a check other than the threshold");
  auto d3ok = check_hypotheses(config({"domain.d=3", "domain.n=7", "noise.s0=7"}));
  o.require(d3ok.all_passed(), "d=3, s0=7 should pass");
  report(3, "hypothesis checker", o, seconds_since(t0), kBudget3);
}

void criterion4() {
  auto t0 = Clock::now();
  Outcome o;
  RunConfig cfg = config({"domain.n=63", "noise.sigma0=0", "init.kind=eigen_bump", "init.delta0=0.1",
                          "time.dt=1e-3", "time.T=1"});
  const LogPotential p = cfg.make_potential();
  const auto c = cfg.constants();
  Stepper stepper(cfg.grid(), cfg.scheme_config(), p, c, cfg.make_noise());
  SolverState s{0.0, 0, make_initial_field(cfg), BrownianPath(1, cfg.time.dt), 0};
  double e_prev = energy(s.u, p);
  double worst = -INFINITY;
  const auto steps = step_count(cfg.time.T, cfg.time.dt);
  for (std::uint64_t k = 0; k < steps; ++k) {
    stepper.step(s);
    double e = energy(s.u, p);
    worst = std::max(worst, e - e_prev);
    e_prev = e;
  }
  o.require(worst <= kEnergySlack, "energy increased by " + fmt(worst));
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("largest step change ") + fmt(worst);
  report(4, "free energy nonincreasing without noise", o, seconds_since(t0), kBudget4);
}

struct EnsembleRuns {
  EnsembleResult one_d;
  EnsembleResult two_d;
  double seconds = 0.0;
};

void check_ensemble(Outcome& o, const EnsembleResult& r, const std::string& tag) {
  for (const auto& s : r.report.per_trajectory) {
    if (!(s.delta_min > 0.0) || !(s.delta_min_steps > 0.0)) {
      o.require(false, tag + " trajectory " + std::to_string(s.trajectory_id) + " touched the barrier");
    }
    if (s.clamp_count != 0) {
      o.require(false, tag + " trajectory " + std::to_string(s.trajectory_id) + " clamped");
    }
  }
}

void criterion5(const EnsembleRuns& runs) {
  Outcome o;
  check_ensemble(o, runs.one_d, "1D");
  check_ensemble(o, runs.two_d, "2D");
  const auto& a1 = runs.one_d.report.aggregate;
  const auto& a2 = runs.two_d.report.aggregate;
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("1D delta_min min/median ") +
              fmt(a1.delta_min_min) + "/" + fmt(a1.delta_min_median) + ", 2D " + fmt(a2.delta_min_min) +
              "/" + fmt(a2.delta_min_median);
  report(5, "every trajectory separated, no clamp events (100 x 1D, 20 x 2D)", o, runs.seconds, kBudget5);
}

void criterion6(const EnsembleRuns& runs) {
  auto t0 = Clock::now();
  Outcome o;
  for (const auto* r : {&runs.one_d, &runs.two_d}) {
    const std::string tag = r == &runs.one_d ? "1D" : "2D";
    for (const auto& s : r->report.per_trajectory) {
      if (!std::isfinite(s.max_g_mass)) o.require(false, tag + " infinite G mass");
    }
    std::vector<double> integrals;
    for (const auto& s : r->report.per_trajectory) integrals.push_back(s.g_mass_s0p1_integral);
    for (double q : {1.0, 2.0}) {
      auto m = exp_moment_estimate(integrals, q);
      bool ok = !m.overflow && std::isfinite(m.mean) && m.stderr_ / m.mean < kMomentRelStderr;
      o.require(ok, tag + " q=" + fmt(q) + " mean " + fmt(m.mean) + " stderr " + fmt(m.stderr_));
      const bool one_d = r == &runs.one_d;
      double golden = q == 1.0 ? (one_d ? kGolden1dQ1 : kGolden2dQ1) : (one_d ? kGolden1dQ2 : kGolden2dQ2);
      o.require(std::abs(m.mean - golden) <= kGoldenRel * golden,
                tag + " q=" + fmt(q) + " moment drifted from the golden value");
      if (q == 1.0) {
        o.detail += (o.detail.empty() ? "" : "; ") + tag + " E exp(int G) = " + fmt(m.mean) +
                    " +- " + fmt(m.stderr_);
      }
    }
  }
  report(6, "G masses finite, exponential moments q=1,2 finite", o,
         runs.seconds + seconds_since(t0), kBudget5);
}

void criterion7(const EnsembleRuns& runs) {
  auto t0 = Clock::now();
  Outcome o;
  std::size_t snapshots = 0;
  double min_slack = INFINITY;
  for (const auto* r : {&runs.one_d, &runs.two_d}) {
    for (const auto& rec : r->records) {
      auto audit = certificate_audit(rec);
      for (const auto& e : audit.entries) {
        ++snapshots;
        min_slack = std::min(min_slack, e.slack);
      }
      if (!audit.all_passed()) {
        o.require(false, "audit failed for trajectory " + std::to_string(rec.trajectory_id));
      }
    }
  }
  double worst_closed = 0.0;
  for (int d : {1, 2, 3}) {
    for (double M : {1.5, 8.0, 100.0}) {
      CertificateInput in;
      in.M = M;
      in.Lambda = 0.0;
      in.d = d;
      in.s0 = d == 3 ? 7 : 3;
      in.alpha = default_alpha(d);
      in.L = 1.0;
      double expected = std::pow(in.measure() / M, 1.0 / in.s0);
      worst_closed = std::max(worst_closed, std::abs(separation_certificate(in) - expected));
    }
  }
  o.require(worst_closed <= kClosedFormTol, "closed form off by " + fmt(worst_closed));
  o.detail += (o.detail.empty() ? "" : "; ") + std::to_string(snapshots) + " snapshots, min slack " +
              fmt(min_slack) + ", closed-form error " + fmt(worst_closed);
  report(7, "certificate audit on every snapshot, flat-field closed form", o, seconds_since(t0), kBudget7);
}

void criterion8() {
  auto t0 = Clock::now();
  Outcome o;
  const unsigned w = workers();

  RunConfig dt = config({"domain.n=63", "time.T=1", "time.dt=5e-4", "ensemble.n_traj=16",
                         "study.kind=dt_refine", "study.levels=[4e-3,2e-3,1e-3,5e-4]"});
  auto sd = convergence_study(dt, w);
  o.require(sd.monotone_decrease, "dt distances not strictly decreasing");

  RunConfig lam = config({"domain.n=63", "time.T=1", "time.dt=1e-4", "ensemble.n_traj=8",
                          "study.kind=lambda_refine", "study.levels=[1e-1,1e-2,1e-3]"});
  auto sl = convergence_study(lam, w);
  o.require(sl.monotone_decrease, "lambda distances not strictly decreasing");

  RunConfig grid = config({"time.T=0.1", "time.dt=1e-5", "study.kind=grid_refine",
                           "study.levels=[31,63,127]"});
  auto sg = convergence_study(grid, w);
  double err127 = sg.distances.back();
  o.require(err127 < kHeatDecayTol, "heat decay error at n=127: " + fmt(err127));

  auto list = [](const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
    return s + "]";
  };
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("dt ") + list(sd.distances) + ", lambda " +
              list(sl.distances) + ", heat error " + list(sg.distances);
  report(8, "refinement studies (dt, lambda, grid)", o, seconds_since(t0), kBudget8);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion9(const EnsembleRuns& runs, const fs::path& root) {
  auto t0 = Clock::now();
  Outcome o;
  RunConfig cfg = ensemble_1d();
  std::string ref_json, ref_csv;
  for (unsigned w : {1u, 4u, 8u}) {
    auto r = run_ensemble(cfg, w);
    fs::path dir = root / ("workers_" + std::to_string(w));
    fs::create_directories(dir);
    persist(r.report, (dir / "report.json").string());
    write_timeseries_csv(r.records, (dir / "timeseries.csv").string());
    std::string js = slurp(dir / "report.json"), csv = slurp(dir / "timeseries.csv");
    if (w == 1) {
      ref_json = js;
      ref_csv = csv;
    } else {
      o.require(js == ref_json, "report differs with " + std::to_string(w) + " workers");
      o.require(csv == ref_csv, "CSV differs with " + std::to_string(w) + " workers");
    }
  }
  o.require(to_json(runs.one_d.report).dump(2) + "\n" == ref_json,
            "report differs from the criterion-5 run");
  report(9, "byte-identical artifacts for 1, 4, 8 workers", o, seconds_since(t0), kBudget9);
}

void criterion10() {
  auto t0 = Clock::now();
  Outcome o;
  RunConfig cfg = config({"domain.n=63", "time.T=1", "time.dt=1e-3", "init.delta0=0.5"});
  const auto p = cfg.make_potential();
  const auto c = cfg.constants();
  const auto noise = cfg.make_noise();
  const auto scheme = cfg.scheme_config();
  const Field u0 = make_initial_field(cfg);
  Spectrum spec(cfg.grid());
  // Perturb along the slowest mode; faster modes decay below roundoff by T = 1.
  Field b = spec.eigenvector(0);
  double bs = sup_norm(b);
  for (double& v : b.values) v /= bs;
  const BrownianPath path(trajectory_seed(cfg.ensemble.master_seed, 0), cfg.time.dt);
  const Field base = integrate_to(u0, cfg.time.T, scheme, p, c, noise, path);

  std::vector<double> ratios;
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    Field v = u0;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += eps * b[i];
    Field w = integrate_to(v, cfg.time.T, scheme, p, c, noise, path);
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) acc += (w[i] - base[i]) * (w[i] - base[i]);
    ratios.push_back(std::sqrt(acc * cfg.grid().cell_volume()) / eps);
  }
  double hi = *std::max_element(ratios.begin(), ratios.end());
  double lo = *std::min_element(ratios.begin(), ratios.end());
  o.require(lo > 0.0 && hi / lo <= kLipschitzSpread, "ratio spread " + fmt(hi / lo));
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("ratios ") + fmt(ratios[0]) + ", " +
              fmt(ratios[1]) + ", " + fmt(ratios[2]);
  report(10, "perturbation ratios agree within a factor of 2", o, seconds_since(t0), kBudget10);
}

}  // namespace

int main() {
  const fs::path root = fs::temp_directory_path() / "sac_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);

  auto guard = [](int id, const std::function<void()>& f) {
    try {
      f();
    } catch (const std::exception& e) {
      std::printf("FAIL criterion %d: exception: %s\n", id, e.what());
      ++failures;
    }
  };

  guard(1, criterion1);
  guard(2, criterion2);
  guard(3, criterion3);
  guard(4, criterion4);

  EnsembleRuns runs;
  bool have_runs = false;
  guard(5, [&] {
    auto t0 = Clock::now();
    runs.one_d = run_ensemble(ensemble_1d(), workers());
    runs.two_d = run_ensemble(ensemble_2d(), workers());
    runs.seconds = seconds_since(t0);
    have_runs = true;
    criterion5(runs);
  });
  if (have_runs) {
    guard(6, [&] { criterion6(runs); });
    guard(7, [&] { criterion7(runs); });
  } else {
    std::printf("FAIL criterion 6: ensemble unavailable\nFAIL criterion 7: ensemble unavailable\n");
    failures += 2;
  }
  guard(8, criterion8);
  if (have_runs) {
    guard(9, [&] { criterion9(runs, root); });
  } else {
    std::printf("FAIL criterion 9: ensemble unavailable\n");
    ++failures;
  }
  guard(10, criterion10);

  fs::remove_all(root);
  std::printf("%s: %d criterion failure(s)\n", failures == 0 ? "ALL PASS" : "FAILED", failures);
  return failures == 0 ? 0 : 1;
}
