#include "sac/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "sac/errors.hpp"

namespace sac {

using nlohmann::json;

const char* to_string(InitKind k) {
  switch (k) {
    case InitKind::constant: return "constant";
    case InitKind::eigen_bump: return "eigen_bump";
    case InitKind::file: return "file";
  }
  return "?";
}

const char* to_string(StudyKind k) {
  switch (k) {
    case StudyKind::dt_refine: return "dt_refine";
    case StudyKind::grid_refine: return "grid_refine";
    case StudyKind::lambda_refine: return "lambda_refine";
    case StudyKind::noise_scale: return "noise_scale";
  }
  return "?";
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError(path + ": " + msg);
}

// Reads keys from one JSON object and rejects any key it was not asked for.
class Section {
 public:
  Section(const json& doc, std::string path) : path_(std::move(path)) {
    if (!doc.is_object()) fail(path_, "expected an object");
    obj_ = &doc;
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = obj_->find(key);
    if (it == obj_->end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      fail(path_ + "." + key, "wrong type");
    }
  }

  double number(const char* key, double def) {
    double v = def;
    seen_.insert(key);
    auto it = obj_->find(key);
    if (it == obj_->end()) return v;
    if (!it->is_number()) fail(path_ + "." + key, "expected a number");
    return it->get<double>();
  }

  template <class Int>
  Int integer(const char* key, Int def) {
    seen_.insert(key);
    auto it = obj_->find(key);
    if (it == obj_->end()) return def;
    if (!it->is_number_integer()) fail(path_ + "." + key, "expected an integer");
    if (std::is_unsigned_v<Int> && it->is_number_integer() && !it->is_number_unsigned()) {
      if (it->get<long long>() < 0) fail(path_ + "." + key, "expected a nonnegative integer");
    }
    return it->get<Int>();
  }

  bool has(const char* key) const { return obj_->contains(key); }
  const json& at(const char* key) {
    seen_.insert(key);
    return obj_->at(key);
  }

  void finish() const {
    for (auto it = obj_->begin(); it != obj_->end(); ++it) {
      if (!seen_.count(it.key())) fail(path_ + "." + it.key(), "unknown key");
    }
  }

  const std::string& path() const { return path_; }

 private:
  const json* obj_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& path, const std::string& msg) {
  if (!ok) fail(path, msg);
}

}  // namespace

Grid RunConfig::grid() const { return Grid(domain.d, domain.n, domain.L); }

LogPotential RunConfig::make_potential() const {
  return LogPotential(potential.theta, potential.theta0);
}

PotentialConstants RunConfig::constants() const {
  return {potential.c_f.value_or(potential.theta0 - potential.theta), potential.s_f};
}

NoiseFamily RunConfig::make_noise() const {
  return make_polynomial_family(noise.s0, noise.K, noise.sigma0, noise.gamma);
}

SchemeConfig RunConfig::scheme_config() const {
  SchemeConfig s;
  s.dt = time.dt;
  s.kind = scheme.kind;
  s.lambda = scheme.lambda;
  s.n_modes = scheme.n_modes;
  s.newton_tol = scheme.newton_tol;
  s.max_newton = scheme.max_newton;
  return s;
}

double RunConfig::alpha() const { return diagnostics.alpha.value_or(default_alpha(domain.d)); }

RunConfig parse_config(const json& doc) {
  RunConfig cfg;
  Section root(doc, "config");

  auto section = [&](const char* name, auto&& body) {
    if (!root.has(name)) return;
    Section s(root.at(name), name);
    body(s);
    s.finish();
  };

  section("domain", [&](Section& s) {
    cfg.domain.d = s.integer<int>("d", cfg.domain.d);
    cfg.domain.n = s.integer<int>("n", cfg.domain.n);
    cfg.domain.L = s.number("L", cfg.domain.L);
  });
  require(cfg.domain.d >= 1 && cfg.domain.d <= 3, "domain.d", "must be 1, 2 or 3");
  require(cfg.domain.n >= 3, "domain.n", "must be >= 3");
  require(cfg.domain.L > 0.0 && std::isfinite(cfg.domain.L), "domain.L", "must be positive");

  section("time", [&](Section& s) {
    cfg.time.T = s.number("T", cfg.time.T);
    cfg.time.dt = s.number("dt", cfg.time.dt);
    cfg.time.stride = s.integer<std::uint64_t>("stride", cfg.time.stride);
  });
  require(cfg.time.T > 0.0 && std::isfinite(cfg.time.T), "time.T", "must be positive");
  require(cfg.time.dt > 0.0 && cfg.time.dt <= cfg.time.T, "time.dt", "must satisfy 0 < dt <= T");
  require(cfg.time.stride >= 1, "time.stride", "must be >= 1");
  try {
    step_count(cfg.time.T, cfg.time.dt);
  } catch (const ParameterError& e) {
    fail("time", e.what());
  }

  section("potential", [&](Section& s) {
    cfg.potential.theta = s.number("theta", cfg.potential.theta);
    cfg.potential.theta0 = s.number("theta0", cfg.potential.theta0);
    if (s.has("c_f")) cfg.potential.c_f = s.number("c_f", 0.0);
    cfg.potential.s_f = s.number("s_f", cfg.potential.s_f);
  });
  require(cfg.potential.theta > 0.0, "potential.theta", "must be positive");
  require(cfg.potential.theta0 > cfg.potential.theta && std::isfinite(cfg.potential.theta0),
          "potential.theta0", "must exceed theta");
  require(!cfg.potential.c_f || *cfg.potential.c_f > 0.0, "potential.c_f", "must be positive");
  require(cfg.potential.s_f >= 1.0, "potential.s_f", "must be >= 1");

  section("noise", [&](Section& s) {
    cfg.noise.s0 = s.integer<int>("s0", cfg.noise.s0);
    cfg.noise.K = s.integer<int>("K", cfg.noise.K);
    cfg.noise.sigma0 = s.number("sigma0", cfg.noise.sigma0);
    cfg.noise.gamma = s.number("gamma", cfg.noise.gamma);
  });
  require(cfg.noise.s0 >= 1, "noise.s0", "must be >= 1");
  require(cfg.noise.K >= 1, "noise.K", "must be >= 1");
  require(cfg.noise.sigma0 >= 0.0 && std::isfinite(cfg.noise.sigma0), "noise.sigma0",
          "must be nonnegative");
  require(cfg.noise.gamma > 0.5, "noise.gamma", "must exceed 1/2");

  section("scheme", [&](Section& s) {
    std::string kind = to_string(cfg.scheme.kind);
    s.get("kind", kind);
    try {
      cfg.scheme.kind = scheme_from_string(kind);
    } catch (const ParameterError& e) {
      fail("scheme.kind", e.what());
    }
    cfg.scheme.lambda = s.number("lambda", cfg.scheme.lambda);
    cfg.scheme.n_modes = s.integer<std::size_t>("n_modes", cfg.scheme.n_modes);
    cfg.scheme.newton_tol = s.number("newton_tol", cfg.scheme.newton_tol);
    cfg.scheme.max_newton = s.integer<int>("max_newton", cfg.scheme.max_newton);
  });
  require(cfg.scheme.lambda > 0.0, "scheme.lambda", "must be positive");
  require(cfg.scheme.newton_tol > 0.0 && cfg.scheme.newton_tol <= 1e-10, "scheme.newton_tol",
          "must lie in (0, 1e-10]");
  require(cfg.scheme.max_newton >= 1, "scheme.max_newton", "must be >= 1");

  section("ensemble", [&](Section& s) {
    cfg.ensemble.master_seed = s.integer<std::uint64_t>("master_seed", cfg.ensemble.master_seed);
    cfg.ensemble.n_traj = s.integer<std::uint64_t>("n_traj", cfg.ensemble.n_traj);
  });
  require(cfg.ensemble.n_traj >= 1, "ensemble.n_traj", "must be >= 1");

  section("init", [&](Section& s) {
    std::string kind = to_string(cfg.init.kind);
    s.get("kind", kind);
    if (kind == "constant") {
      cfg.init.kind = InitKind::constant;
    } else if (kind == "eigen_bump") {
      cfg.init.kind = InitKind::eigen_bump;
    } else if (kind == "file") {
      cfg.init.kind = InitKind::file;
    } else {
      fail("init.kind", "unknown kind '" + kind + "'");
    }
    cfg.init.amplitude = s.number("amplitude", cfg.init.amplitude);
    cfg.init.delta0 = s.number("delta0", cfg.init.delta0);
    s.get("file", cfg.init.file);
  });
  require(cfg.init.delta0 > 0.0 && cfg.init.delta0 < 1.0, "init.delta0", "must lie in (0, 1)");
  if (cfg.init.kind == InitKind::constant) {
    require(std::abs(cfg.init.amplitude) <= 1.0 - cfg.init.delta0, "init.amplitude",
            "constant initial value must satisfy |c| <= 1 - delta0");
  }
  if (cfg.init.kind == InitKind::file) require(!cfg.init.file.empty(), "init.file", "required");

  section("output", [&](Section& s) { s.get("dir", cfg.output.dir); });

  section("diagnostics", [&](Section& s) {
    if (s.has("alpha")) cfg.diagnostics.alpha = s.number("alpha", 0.0);
  });
  if (cfg.diagnostics.alpha) {
    require(*cfg.diagnostics.alpha > 0.0 && *cfg.diagnostics.alpha < 1.0, "diagnostics.alpha",
            "must lie in (0, 1)");
  }

  if (root.has("study")) {
    Section s(root.at("study"), "study");
    StudySection st;
    std::string kind;
    s.get("kind", kind);
    if (kind == "dt_refine") {
      st.kind = StudyKind::dt_refine;
    } else if (kind == "grid_refine") {
      st.kind = StudyKind::grid_refine;
    } else if (kind == "lambda_refine") {
      st.kind = StudyKind::lambda_refine;
    } else if (kind == "noise_scale") {
      st.kind = StudyKind::noise_scale;
    } else {
      fail("study.kind", "unknown study '" + kind + "'");
    }
    s.get("levels", st.levels);
    st.T = s.number("T", 0.0);
    s.finish();
    require(st.levels.size() >= 3, "study.levels", "need at least 3 refinement levels");
    for (double v : st.levels) require(std::isfinite(v) && v >= 0.0, "study.levels", "bad level");
    require(st.T >= 0.0, "study.T", "must be nonnegative");
    cfg.study = st;
  }
  root.finish();

  // cross-section constraints
  require(cfg.scheme.n_modes <= cfg.grid().size(), "scheme.n_modes",
          "exceeds the number of grid modes");
  if (cfg.scheme.kind == SchemeKind::yosida_galerkin) {
    double guard = cfg.time.dt * (cfg.constants().c_f + 1.0 / cfg.scheme.lambda);
    require(guard < 1.0, "scheme.lambda", "stability guard dt (C_F + 1/lambda) < 1 violated");
  }
  return cfg;
}

json to_json(const RunConfig& cfg) {
  json j;
  j["domain"] = {{"d", cfg.domain.d}, {"n", cfg.domain.n}, {"L", cfg.domain.L}};
  j["time"] = {{"T", cfg.time.T}, {"dt", cfg.time.dt}, {"stride", cfg.time.stride}};
  j["potential"] = {{"theta", cfg.potential.theta},
                    {"theta0", cfg.potential.theta0},
                    {"s_f", cfg.potential.s_f}};
  if (cfg.potential.c_f) j["potential"]["c_f"] = *cfg.potential.c_f;
  j["noise"] = {{"s0", cfg.noise.s0},
                {"K", cfg.noise.K},
                {"sigma0", cfg.noise.sigma0},
                {"gamma", cfg.noise.gamma}};
  j["scheme"] = {{"kind", to_string(cfg.scheme.kind)},
                 {"lambda", cfg.scheme.lambda},
                 {"n_modes", cfg.scheme.n_modes},
                 {"newton_tol", cfg.scheme.newton_tol},
                 {"max_newton", cfg.scheme.max_newton}};
  j["ensemble"] = {{"master_seed", cfg.ensemble.master_seed}, {"n_traj", cfg.ensemble.n_traj}};
  j["init"] = {{"kind", to_string(cfg.init.kind)},
               {"amplitude", cfg.init.amplitude},
               {"delta0", cfg.init.delta0}};
  if (!cfg.init.file.empty()) j["init"]["file"] = cfg.init.file;
  j["output"] = {{"dir", cfg.output.dir}};
  j["diagnostics"] = json::object();
  if (cfg.diagnostics.alpha) j["diagnostics"]["alpha"] = *cfg.diagnostics.alpha;
  if (cfg.study) {
    j["study"] = {{"kind", to_string(cfg.study->kind)},
                  {"levels", cfg.study->levels},
                  {"T", cfg.study->T}};
  }
  return j;
}

json read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void apply_override(json& doc, const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  }
  std::string key = assignment.substr(0, eq);
  std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    auto dot = key.find('.', start);
    std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("override '" + assignment + "' has an empty key segment");
    if (!node->is_object()) {
      if (node->is_null()) {
        *node = json::object();
      } else {
        throw ConfigError("override '" + assignment + "' descends into a non-object");
      }
    }
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

std::string fingerprint(const RunConfig& cfg) {
  std::string text = to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Field make_initial_field(const RunConfig& cfg) {
  const Grid g = cfg.grid();
  switch (cfg.init.kind) {
    case InitKind::constant:
      return Field(g, cfg.init.amplitude);
    case InitKind::eigen_bump: {
      Spectrum spec(g);
      Field e1 = spec.eigenvector(0);
      // first eigenvector is positive; rescale to sup = 1 - delta0
      double scale = (1.0 - cfg.init.delta0) / sup_norm(e1);
      if (cfg.init.amplitude < 0.0) scale = -scale;
      for (double& v : e1.values) v *= scale;
      return e1;
    }
    case InitKind::file: {
      std::ifstream in(cfg.init.file);
      if (!in) throw IoError("cannot open initial field file '" + cfg.init.file + "'");
      std::vector<double> values;
      std::string line;
      while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
          if (cell.find_first_not_of(" \t\r") == std::string::npos) continue;
          try {
            values.push_back(std::stod(cell));
          } catch (const std::exception&) {
            throw ConfigError(cfg.init.file + ": bad value '" + cell + "'");
          }
        }
      }
      if (values.size() != g.size()) {
        std::ostringstream os;
        os << cfg.init.file << ": " << values.size() << " values for " << g.size() << " nodes";
        throw ConfigError(os.str());
      }
      Field u(g, std::move(values));
      if (sup_norm(u) > 1.0 - cfg.init.delta0) {
        throw ConfigError(cfg.init.file + ": values exceed 1 - delta0");
      }
      return u;
    }
  }
  throw ConfigError("unknown init kind");
}

bool HypothesisReport::all_passed() const {
  for (const auto& e : entries) {
    if (!e.passed) return false;
  }
  return true;
}

json HypothesisReport::to_json() const {
  json j;
  j["all_passed"] = all_passed();
  j["potential_constants"] = {{"c_f", potential_constants.c_f}, {"s_f", potential_constants.s_f}};
  j["noise_constants"] = {{"c1", noise_constants.c1}, {"c2", noise_constants.c2}};
  j["checks"] = json::array();
  for (const auto& e : entries) {
    j["checks"].push_back(
        {{"name", e.name}, {"passed", e.passed}, {"measured", e.measured}, {"detail", e.detail}});
  }
  return j;
}

HypothesisReport check_hypotheses(const RunConfig& cfg) {
  HypothesisReport rep;
  const LogPotential p = cfg.make_potential();
  const PotentialConstants c = cfg.constants();
  const NoiseFamily f = cfg.make_noise();
  const int d = cfg.domain.d;
  rep.potential_constants = c;

  for (const auto& e : check_H1(p, c, 4096).entries) {
    rep.entries.push_back({"H1." + e.name, e.passed, e.measured, e.detail});
  }

  double endpoint = 0.0;
  for (int k = 0; k < f.modes(); ++k) {
    endpoint = std::max({endpoint, std::abs(f.h(k, 1.0)), std::abs(f.h(k, -1.0))});
  }
  rep.entries.push_back({"H2.h_vanishes_at_barriers", endpoint == 0.0, endpoint,
                         "max_k |h_k(+-1)|"});
  bool finite = true;
  try {
    rep.noise_constants = constants(f, p);
  } catch (const OverflowError&) {
    finite = false;
  }
  rep.entries.push_back({"H2.C1_finite", finite && std::isfinite(rep.noise_constants.c1),
                         rep.noise_constants.c1, "C_{1,H}"});
  rep.entries.push_back({"H3.C2_finite", finite && std::isfinite(rep.noise_constants.c2),
                         rep.noise_constants.c2, "C_{2,H}"});

  double floor = d * c.s_f - 1.0;
  rep.entries.push_back({"H3.s0_floor", f.admissible(d, c.s_f), static_cast<double>(f.s0()),
                         "s0 >= d s_F - 1 = " + std::to_string(floor)});

  bool taylor_ok = true;
  double worst_ratio = 0.0;
  for (int k : {0, f.modes() - 1}) {
    auto t = taylor_bound_check(f, k, 4001);
    taylor_ok = taylor_ok && t.passed;
    worst_ratio = std::max(worst_ratio, t.max_ratio);
  }
  rep.entries.push_back({"H3.taylor_bound", taylor_ok, worst_ratio,
                         "|h_k| <= sup|h_k^(s0+2)|/(s0+2)! dist(x, +-1)^(s0+2)"});

  int threshold = d == 3 ? 6 : 2;
  rep.entries.push_back({"separation.s0_threshold", f.s0() > threshold,
                         static_cast<double>(f.s0()),
                         "s0 > " + std::to_string(threshold) + " for d = " + std::to_string(d)});
  return rep;
}

}  // namespace sac
