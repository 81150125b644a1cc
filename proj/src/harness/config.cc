#include "asid/harness/config.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "asid/explore.h"

namespace asid::harness {
namespace {

using nlohmann::json;

std::string Join(const std::vector<std::string>& items) {
  std::ostringstream os;
  os << items.size() << " config error(s):";
  for (const auto& s : items) os << "\n  " << s;
  return os.str();
}

// Collects issues instead of throwing so that one pass reports everything.
class Reader {
 public:
  explicit Reader(std::vector<std::string>& issues) : issues_(issues) {}

  void Error(const std::string& path, const std::string& what) {
    issues_.push_back(path + ": " + what);
  }

  bool Object(const json& j, const std::string& path) {
    if (j.is_object()) return true;
    Error(path, "expected an object");
    return false;
  }

  void OnlyKeys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
    if (!j.is_object()) return;
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : j.items()) {
      if (!ok.contains(key)) Error(path + "/" + key, "unknown key");
    }
  }

  const json* Find(const json& j, const char* key) {
    if (!j.is_object()) return nullptr;
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
  }

  template <typename T>
  std::optional<T> Get(const json& j, const std::string& path,
                       const char* key, bool required = false) {
    const json* v = Find(j, key);
    const std::string p = path + "/" + key;
    if (v == nullptr) {
      if (required) Error(p, "missing required key");
      return std::nullopt;
    }
    return As<T>(*v, p);
  }

  template <typename T>
  std::optional<T> As(const json& v, const std::string& p) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) return Bad<T>(p, "expected a boolean");
      return v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) return Bad<T>(p, "expected a string");
      return v.get<std::string>();
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      if (!v.is_number_integer() ||
          (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
        return Bad<T>(p, "expected a non-negative integer");
      }
      return v.get<std::uint64_t>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) return Bad<T>(p, "expected an integer");
      return v.get<T>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) return Bad<T>(p, "expected a number");
      const double d = v.get<double>();
      if (!std::isfinite(d)) return Bad<T>(p, "expected a finite number");
      return d;
    } else {
      static_assert(std::is_same_v<T, std::vector<double>>);
      if (!v.is_array()) return Bad<T>(p, "expected an array of numbers");
      std::vector<double> out;
      for (std::size_t i = 0; i < v.size(); ++i) {
        auto x = As<double>(v[i], p + "/" + std::to_string(i));
        if (!x) return std::nullopt;
        out.push_back(*x);
      }
      return out;
    }
  }

 private:
  template <typename T>
  std::optional<T> Bad(const std::string& p, const std::string& what) {
    Error(p, what);
    return std::nullopt;
  }

  std::vector<std::string>& issues_;
};

void ReadCem(Reader& r, const json& j, const std::string& path,
             CemConfig& cem) {
  if (!r.Object(j, path)) return;
  r.OnlyKeys(j, path,
             {"population", "elite_frac", "iterations", "init_std",
              "min_std", "threads"});
  if (auto v = r.Get<int>(j, path, "population")) cem.population = *v;
  if (auto v = r.Get<double>(j, path, "elite_frac")) cem.elite_frac = *v;
  if (auto v = r.Get<int>(j, path, "iterations")) cem.iterations = *v;
  if (auto v = r.Get<double>(j, path, "min_std")) cem.min_std = *v;
  if (auto v = r.Get<int>(j, path, "threads")) cem.threads = *v;
  if (const json* s = r.Find(j, "init_std")) {
    if (s->is_number()) {
      if (auto v = r.As<double>(*s, path + "/init_std")) {
        cem.init_std = Eigen::VectorXd::Constant(1, *v);
      }
    } else if (auto v = r.As<std::vector<double>>(*s, path + "/init_std")) {
      cem.init_std = Eigen::Map<const Eigen::VectorXd>(
          v->data(), static_cast<Eigen::Index>(v->size()));
    }
  }
  if (cem.population < 1) r.Error(path + "/population", "must be >= 1");
  if (!(cem.elite_frac > 0.0 && cem.elite_frac <= 1.0)) {
    r.Error(path + "/elite_frac", "must be in (0, 1]");
  }
  if (cem.iterations < 1) r.Error(path + "/iterations", "must be >= 1");
  if (!(cem.min_std >= 0.0)) r.Error(path + "/min_std", "must be >= 0");
  if (cem.threads < 1) r.Error(path + "/threads", "must be >= 1");
  if (cem.init_std.size() < 1 || !(cem.init_std.array() > 0.0).all()) {
    r.Error(path + "/init_std", "must be positive");
  }
}

void ReadEnv(Reader& r, const json& j, EnvOverrides& env) {
  const std::string path = "/env";
  if (!r.Object(j, path)) return;
  r.OnlyKeys(j, path,
             {"horizon", "task_horizon", "sigma_w", "task_sigma_w", "extras"});
  env.horizon = r.Get<int>(j, path, "horizon");
  env.task_horizon = r.Get<int>(j, path, "task_horizon");
  env.sigma_w = r.Get<double>(j, path, "sigma_w");
  env.task_sigma_w = r.Get<double>(j, path, "task_sigma_w");
  if (const json* e = r.Find(j, "extras")) {
    if (r.Object(*e, path + "/extras")) {
      for (const auto& [key, value] : e->items()) {
        if (auto v = r.As<double>(value, path + "/extras/" + key)) {
          env.extras[key] = *v;
        }
      }
    }
  }
}

void ReadSweep(Reader& r, const json& j, SweepConfig& sweep) {
  const std::string path = "/sweep";
  if (!r.Object(j, path)) return;
  r.OnlyKeys(j, path,
             {"grid", "cells", "state_index", "episodes", "histogram"});
  if (auto g = r.Get<std::string>(j, path, "grid", true)) {
    if (*g == "initial_state") {
      sweep.grid = GridKind::kInitialState;
    } else if (*g == "theta_star") {
      sweep.grid = GridKind::kThetaStar;
    } else {
      r.Error(path + "/grid", "must be \"initial_state\" or \"theta_star\"");
    }
  }
  if (const json* c = r.Find(j, "cells")) {
    if (!c->is_array() || c->empty()) {
      r.Error(path + "/cells", "expected a non-empty array");
    } else {
      for (std::size_t i = 0; i < c->size(); ++i) {
        const std::string p = path + "/cells/" + std::to_string(i);
        if ((*c)[i].is_number()) {
          if (auto v = r.As<double>((*c)[i], p)) sweep.cells.push_back({*v});
        } else if (auto v = r.As<std::vector<double>>((*c)[i], p)) {
          sweep.cells.push_back(*v);
        }
      }
    }
  } else {
    r.Error(path + "/cells", "missing required key");
  }
  if (auto v = r.Get<int>(j, path, "state_index")) sweep.state_index = *v;
  if (auto v = r.Get<int>(j, path, "episodes")) sweep.episodes = *v;
  if (sweep.episodes < 1) r.Error(path + "/episodes", "must be >= 1");
  if (const json* h = r.Find(j, "histogram")) {
    const std::string hp = path + "/histogram";
    if (r.Object(*h, hp)) {
      r.OnlyKeys(*h, hp, {"bins", "low", "high"});
      if (auto v = r.Get<int>(*h, hp, "bins")) sweep.histogram_bins = *v;
      if (auto v = r.Get<double>(*h, hp, "low")) sweep.histogram_low = *v;
      if (auto v = r.Get<double>(*h, hp, "high")) sweep.histogram_high = *v;
    }
    if (sweep.histogram_bins < 1) r.Error(hp + "/bins", "must be >= 1");
    if (!(sweep.histogram_low < sweep.histogram_high)) {
      r.Error(hp, "low must be < high");
    }
  }
}

void CheckSize(Reader& r, const std::string& path,
               const std::vector<double>& v, int d) {
  if (static_cast<int>(v.size()) != d) {
    r.Error(path, "expected " + std::to_string(d) + " entries, got " +
                      std::to_string(v.size()));
  }
}

// Cross-field checks that need the environment catalog.
void CheckAgainstEnv(Reader& r, ExperimentConfig& cfg) {
  std::shared_ptr<const Environment> env;
  try {
    env = cfg.MakeEnv();
  } catch (const ConfigError& e) {
    r.Error("/env", e.what());
    return;
  }
  const EnvSpec& spec = env->spec();
  const int d = spec.d;
  CheckSize(r, "/theta_star", cfg.theta_star, d);
  CheckSize(r, "/prior/mean", cfg.prior_mean, d);
  CheckSize(r, "/prior/std", cfg.prior_std, d);
  if (!cfg.prior_lower.empty()) CheckSize(r, "/prior/lower", cfg.prior_lower, d);
  if (!cfg.prior_upper.empty()) CheckSize(r, "/prior/upper", cfg.prior_upper, d);
  auto bound = [&](const std::vector<double>& v, int i, double fallback) {
    return v.empty() || static_cast<int>(v.size()) != d ? fallback : v[i];
  };
  if (static_cast<int>(cfg.theta_star.size()) == d) {
    for (int i = 0; i < d; ++i) {
      const double lo = bound(cfg.prior_lower, i, spec.param_lower[i]);
      const double hi = bound(cfg.prior_upper, i, spec.param_upper[i]);
      const double t = cfg.theta_star[i];
      if (t < spec.param_lower[i] || t > spec.param_upper[i]) {
        r.Error("/theta_star/" + std::to_string(i),
                "outside the parameter bounds of " + spec.param_names[i]);
      } else if (t < lo || t > hi) {
        r.Error("/theta_star/" + std::to_string(i),
                "outside the prior's truncation bounds");
      }
    }
  }
  if (static_cast<int>(cfg.prior_std.size()) == d) {
    for (int i = 0; i < d; ++i) {
      if (!(cfg.prior_std[i] > 0.0)) {
        r.Error("/prior/std/" + std::to_string(i), "must be > 0");
      }
    }
  }
  for (int i = 0; i < d; ++i) {
    const double lo = bound(cfg.prior_lower, i, spec.param_lower[i]);
    const double hi = bound(cfg.prior_upper, i, spec.param_upper[i]);
    if (!(lo < hi)) {
      r.Error("/prior", "empty truncation interval for " +
                            spec.param_names[i]);
    } else if (lo < spec.param_lower[i] || hi > spec.param_upper[i]) {
      r.Error("/prior", "truncation bounds for " + spec.param_names[i] +
                            " exceed the parameter bounds");
    }
  }
  auto check_cem = [&](const CemConfig& cem, int p, const std::string& path) {
    try {
      cem.Validate(p);
    } catch (const ConfigError& e) {
      r.Error(path, e.what());
    }
  };
  const EnvSpec& task = env->spec(Phase::kTask);
  check_cem(cfg.cem_explore,
            Policy::ParamCount(cfg.ExplorationKind(), spec.horizon, spec.n_s,
                               spec.n_a),
            "/cem/explore");
  check_cem(cfg.cem_task,
            Policy::ParamCount(cfg.TaskKind(), task.horizon, task.n_s,
                               task.n_a),
            "/cem/task");
  if (cfg.cem_sysid.init_std.size() != 1 &&
      cfg.cem_sysid.init_std.size() != d) {
    r.Error("/cem/sysid/init_std", "size must be 1 or d");
  }

  const bool fisher_used =
      cfg.exploration == Exploration::kFisher &&
      std::find(cfg.methods.begin(), cfg.methods.end(), Method::kAsid) !=
          cfg.methods.end();
  if ((fisher_used || cfg.sweep) && spec.sigma_w == 0.0 &&
      !cfg.information_scale) {
    r.Error("/fisher/information_scale",
            "required when the exploration-phase sigma_w is 0");
  }
  if (cfg.sweep) {
    const SweepConfig& s = *cfg.sweep;
    if (s.state_index < 0 || s.state_index >= spec.n_s) {
      r.Error("/sweep/state_index", "outside the state dimension");
    }
    if (s.grid == GridKind::kInitialState) {
      for (std::size_t i = 0; i < s.cells.size(); ++i) {
        if (s.cells[i].size() != 1) {
          r.Error("/sweep/cells/" + std::to_string(i),
                  "initial-state cells hold one value");
        }
      }
    } else {
      for (std::size_t i = 0; i < s.cells.size(); ++i) {
        const std::string p = "/sweep/cells/" + std::to_string(i);
        CheckSize(r, p, s.cells[i], d);
        if (static_cast<int>(s.cells[i].size()) != d) continue;
        for (int k = 0; k < d; ++k) {
          if (s.cells[i][k] < spec.param_lower[k] ||
              s.cells[i][k] > spec.param_upper[k]) {
            r.Error(p, "outside the parameter bounds");
          }
        }
      }
    }
  }
}

}  // namespace

ConfigIssues::ConfigIssues(std::vector<std::string> issues)
    : ConfigError(Join(issues)), issues_(std::move(issues)) {}

std::string ToString(Exploration e) {
  switch (e) {
    case Exploration::kFisher:
      return "fisher";
    case Exploration::kRandom:
      return "random";
    case Exploration::kNone:
      return "none";
  }
  return "?";
}

std::string ToString(Method m) {
  switch (m) {
    case Method::kAsid:
      return "asid";
    case Method::kRandom:
      return "random";
    case Method::kDr:
      return "dr";
  }
  return "?";
}

Method ParseMethod(const std::string& name) {
  if (name == "asid") return Method::kAsid;
  if (name == "random") return Method::kRandom;
  if (name == "dr") return Method::kDr;
  throw ConfigError("unknown method '" + name + "' (asid|dr|random)");
}

std::shared_ptr<const Environment> ExperimentConfig::MakeEnv() const {
  return MakeEnvironment(env_id, env);
}

ParamVector ExperimentConfig::ThetaStar(const Environment& e) const {
  return e.spec().MakeParams(Eigen::Map<const Eigen::VectorXd>(
      theta_star.data(), static_cast<Eigen::Index>(theta_star.size())));
}

ParamDistribution ExperimentConfig::Prior(const Environment& e) const {
  const EnvSpec& spec = e.spec();
  auto vec = [](const std::vector<double>& v) -> Eigen::VectorXd {
    return Eigen::Map<const Eigen::VectorXd>(
        v.data(), static_cast<Eigen::Index>(v.size()));
  };
  ParamDistribution q;
  q.mean = vec(prior_mean);
  q.std = vec(prior_std);
  q.lower = prior_lower.empty() ? spec.param_lower : vec(prior_lower);
  q.upper = prior_upper.empty() ? spec.param_upper : vec(prior_upper);
  q.Validate();
  return q;
}

PolicyKind ExperimentConfig::ExplorationKind() const {
  return exploration_kind.value_or(DefaultExplorationKind(env_id));
}

PolicyKind ExperimentConfig::TaskKind() const {
  return task_kind.value_or(DefaultTaskKind(env_id));
}

AOptimalConfig ExperimentConfig::AOptimal() const {
  AOptimalConfig a;
  a.n_rollouts = fisher_rollouts;
  a.ridge = ridge;
  a.fd = fd;
  a.information_scale = information_scale;
  return a;
}

ExperimentConfig ParseConfig(const json& doc) {
  std::vector<std::string> issues;
  Reader r(issues);
  ExperimentConfig cfg;
  cfg.source = doc;
  if (!r.Object(doc, "")) throw ConfigIssues(std::move(issues));

  r.OnlyKeys(doc, "",
             {"env_id", "env", "theta_star", "prior", "exploration",
              "policy", "cem", "fisher", "sysid_noise_draws",
              "task_rollouts", "eval_episodes", "methods", "seeds",
              "threads", "thresholds", "out", "sweep"});

  if (auto v = r.Get<std::string>(doc, "", "env_id", true)) cfg.env_id = *v;
  if (const json* e = r.Find(doc, "env")) ReadEnv(r, *e, cfg.env);
  if (auto v = r.Get<std::vector<double>>(doc, "", "theta_star", true)) {
    cfg.theta_star = *v;
  }

  if (const json* p = r.Find(doc, "prior")) {
    if (r.Object(*p, "/prior")) {
      r.OnlyKeys(*p, "/prior", {"mean", "std", "lower", "upper"});
      if (auto v = r.Get<std::vector<double>>(*p, "/prior", "mean", true)) {
        cfg.prior_mean = *v;
      }
      if (auto v = r.Get<std::vector<double>>(*p, "/prior", "std", true)) {
        cfg.prior_std = *v;
      }
      if (auto v = r.Get<std::vector<double>>(*p, "/prior", "lower")) {
        cfg.prior_lower = *v;
      }
      if (auto v = r.Get<std::vector<double>>(*p, "/prior", "upper")) {
        cfg.prior_upper = *v;
      }
    }
  } else {
    r.Error("/prior", "missing required key");
  }

  if (auto v = r.Get<std::string>(doc, "", "exploration")) {
    if (*v == "fisher") {
      cfg.exploration = Exploration::kFisher;
    } else if (*v == "random") {
      cfg.exploration = Exploration::kRandom;
    } else if (*v == "none") {
      cfg.exploration = Exploration::kNone;
    } else {
      r.Error("/exploration", "must be fisher, random or none");
    }
  }

  if (const json* p = r.Find(doc, "policy")) {
    if (r.Object(*p, "/policy")) {
      r.OnlyKeys(*p, "/policy", {"exploration", "task"});
      auto kind = [&](const char* key) -> std::optional<PolicyKind> {
        auto v = r.Get<std::string>(*p, "/policy", key);
        if (!v) return std::nullopt;
        try {
          return ParsePolicyKind(*v);
        } catch (const ConfigError& e) {
          r.Error(std::string("/policy/") + key, e.what());
          return std::nullopt;
        }
      };
      cfg.exploration_kind = kind("exploration");
      cfg.task_kind = kind("task");
    }
  }

  if (const json* c = r.Find(doc, "cem")) {
    if (r.Object(*c, "/cem")) {
      r.OnlyKeys(*c, "/cem", {"explore", "sysid", "task"});
      if (const json* b = r.Find(*c, "explore")) {
        ReadCem(r, *b, "/cem/explore", cfg.cem_explore);
      }
      if (const json* b = r.Find(*c, "sysid")) {
        ReadCem(r, *b, "/cem/sysid", cfg.cem_sysid);
      }
      if (const json* b = r.Find(*c, "task")) {
        ReadCem(r, *b, "/cem/task", cfg.cem_task);
      }
    }
  }

  if (const json* f = r.Find(doc, "fisher")) {
    if (r.Object(*f, "/fisher")) {
      r.OnlyKeys(*f, "/fisher",
                 {"fd_step", "fd_relative", "ridge", "rollouts",
                  "information_scale"});
      if (auto v = r.Get<double>(*f, "/fisher", "fd_step")) cfg.fd.step = *v;
      if (auto v = r.Get<bool>(*f, "/fisher", "fd_relative")) {
        cfg.fd.relative = *v;
      }
      if (auto v = r.Get<double>(*f, "/fisher", "ridge")) cfg.ridge = *v;
      if (auto v = r.Get<int>(*f, "/fisher", "rollouts")) {
        cfg.fisher_rollouts = *v;
      }
      cfg.information_scale =
          r.Get<double>(*f, "/fisher", "information_scale");
    }
    if (!(cfg.fd.step > 0.0)) r.Error("/fisher/fd_step", "must be > 0");
    if (!(cfg.ridge > 0.0)) r.Error("/fisher/ridge", "must be > 0");
    if (cfg.fisher_rollouts < 1) r.Error("/fisher/rollouts", "must be >= 1");
    if (cfg.information_scale && !(*cfg.information_scale > 0.0)) {
      r.Error("/fisher/information_scale", "must be > 0");
    }
  }

  if (auto v = r.Get<int>(doc, "", "sysid_noise_draws")) {
    cfg.sysid_noise_draws = *v;
    if (*v < 1) r.Error("/sysid_noise_draws", "must be >= 1");
  }
  if (auto v = r.Get<int>(doc, "", "task_rollouts")) {
    cfg.task_rollouts = *v;
    if (*v < 1) r.Error("/task_rollouts", "must be >= 1");
  }
  if (auto v = r.Get<int>(doc, "", "eval_episodes")) {
    cfg.eval_episodes = *v;
    if (*v < 1) r.Error("/eval_episodes", "must be >= 1");
  }

  if (const json* m = r.Find(doc, "methods")) {
    if (!m->is_array() || m->empty()) {
      r.Error("/methods", "expected a non-empty array");
    } else {
      cfg.methods.clear();
      for (std::size_t i = 0; i < m->size(); ++i) {
        const std::string p = "/methods/" + std::to_string(i);
        auto name = r.As<std::string>((*m)[i], p);
        if (!name) continue;
        try {
          const Method method = ParseMethod(*name);
          if (std::find(cfg.methods.begin(), cfg.methods.end(), method) !=
              cfg.methods.end()) {
            r.Error(p, "duplicate method");
          } else {
            cfg.methods.push_back(method);
          }
        } catch (const ConfigError& e) {
          r.Error(p, e.what());
        }
      }
    }
  }

  if (const json* s = r.Find(doc, "seeds")) {
    if (!s->is_array() || s->empty()) {
      r.Error("/seeds", "expected a non-empty array of seeds");
    } else {
      std::set<std::uint64_t> seen;
      for (std::size_t i = 0; i < s->size(); ++i) {
        const std::string p = "/seeds/" + std::to_string(i);
        if (auto v = r.As<std::uint64_t>((*s)[i], p)) {
          if (!seen.insert(*v).second) r.Error(p, "duplicate seed");
          cfg.seeds.push_back(*v);
        }
      }
    }
  } else {
    r.Error("/seeds", "missing required key");
  }

  if (auto v = r.Get<int>(doc, "", "threads")) {
    cfg.threads = *v;
    if (*v < 1) r.Error("/threads", "must be >= 1");
  }
  if (const json* t = r.Find(doc, "thresholds")) {
    if (r.Object(*t, "/thresholds")) {
      for (const auto& [key, value] : t->items()) {
        if (auto v = r.As<double>(value, "/thresholds/" + key)) {
          cfg.thresholds[key] = *v;
        }
      }
    }
  }
  if (auto v = r.Get<std::string>(doc, "", "out")) cfg.out = *v;
  if (const json* s = r.Find(doc, "sweep")) {
    cfg.sweep.emplace();
    ReadSweep(r, *s, *cfg.sweep);
  }

  if (!cfg.env_id.empty()) CheckAgainstEnv(r, cfg);
  if (!issues.empty()) throw ConfigIssues(std::move(issues));
  return cfg;
}

ExperimentConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return ParseConfig(doc);
}

}  // namespace asid::harness
