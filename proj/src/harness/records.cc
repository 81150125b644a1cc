#include "asid/harness/records.h"

#include <charconv>
#include <cmath>

#include "asid/error.h"

namespace asid::harness {
namespace {

using nlohmann::json;

json Vec(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd VecFrom(const json& j) {
  if (!j.is_array()) throw ConfigError("record: expected a numeric array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError("record: non-numeric entry");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

void CheckHeader(const json& j, const std::string& format) {
  if (!j.is_object() || j.value("format", "") != format) {
    throw ConfigError("record: expected format '" + format + "'");
  }
  if (j.value("version", -1) != kRecordVersion) {
    throw ConfigError("record: unsupported " + format + " version");
  }
}

json Header(const std::string& format) {
  return {{"format", format}, {"version", kRecordVersion}};
}

}  // namespace

json ToJson(const Policy& policy) {
  json j = Header("asid.policy");
  j["kind"] = std::string(ToString(policy.kind()));
  j["env_id"] = policy.env_id();
  j["horizon"] = policy.horizon();
  j["n_s"] = policy.n_s();
  j["n_a"] = policy.n_a();
  j["params"] = Vec(policy.params());
  return j;
}

Policy PolicyFromJson(const json& j) {
  CheckHeader(j, "asid.policy");
  try {
    return Policy(ParsePolicyKind(j.at("kind").get<std::string>()),
                  j.at("horizon").get<int>(), j.at("n_s").get<int>(),
                  j.at("n_a").get<int>(), VecFrom(j.at("params")),
                  j.at("env_id").get<std::string>());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("policy record: ") + e.what());
  }
}

json ToJson(const Trajectory& traj) {
  json j = Header("asid.trajectory");
  j["env_id"] = traj.env_id;
  j["phase"] = std::string(ToString(traj.phase));
  j["horizon"] = traj.horizon;
  j["seed"] = traj.seed;
  j["states"] = json::array();
  for (const auto& s : traj.states) j["states"].push_back(Vec(s));
  j["actions"] = json::array();
  for (const auto& a : traj.actions) j["actions"].push_back(Vec(a));
  return j;
}

Trajectory TrajectoryFromJson(const json& j) {
  CheckHeader(j, "asid.trajectory");
  Trajectory t;
  try {
    t.env_id = j.at("env_id").get<std::string>();
    t.phase = ParsePhase(j.at("phase").get<std::string>());
    t.horizon = j.at("horizon").get<int>();
    t.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& s : j.at("states")) t.states.push_back(VecFrom(s));
    for (const auto& a : j.at("actions")) t.actions.push_back(VecFrom(a));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("trajectory record: ") + e.what());
  }
  t.Validate();
  return t;
}

json ToJson(const EnvSpec& spec) {
  json j;
  j["env_id"] = spec.env_id;
  j["n_s"] = spec.n_s;
  j["n_a"] = spec.n_a;
  j["d"] = spec.d;
  j["horizon"] = spec.horizon;
  j["sigma_w"] = spec.sigma_w;
  j["action_low"] = Vec(spec.action_low);
  j["action_high"] = Vec(spec.action_high);
  j["init_state_sampler_id"] = spec.init_state_sampler_id;
  j["param_names"] = spec.param_names;
  j["param_lower"] = Vec(spec.param_lower);
  j["param_upper"] = Vec(spec.param_upper);
  j["extras"] = spec.extras;
  return j;
}

json ToJson(const ParamVector& theta) {
  return {{"names", theta.names},
          {"values", Vec(theta.values)},
          {"lower", Vec(theta.lower)},
          {"upper", Vec(theta.upper)}};
}

json ToJson(const IdentificationResult& id) {
  json j = Header("asid.identification");
  j["point_estimate"] = ToJson(id.point_estimate);
  j["posterior"] = {{"mean", Vec(id.posterior.mean)},
                    {"std", Vec(id.posterior.std)},
                    {"lower", Vec(id.posterior.lower)},
                    {"upper", Vec(id.posterior.upper)}};
  j["discrepancy"] = id.discrepancy;
  j["evaluations"] = id.evaluations;
  j["identifiable"] = id.identifiable;
  return j;
}

IdentificationResult IdentificationFromJson(const json& j,
                                            const Environment& env) {
  CheckHeader(j, "asid.identification");
  IdentificationResult id;
  try {
    const json& p = j.at("point_estimate");
    if (p.at("names").get<std::vector<std::string>>() !=
        env.spec().param_names) {
      throw ConfigError("identification record: parameter names do not "
                        "match env " + env.id());
    }
    id.point_estimate = env.spec().MakeParams(VecFrom(p.at("values")));
    const json& q = j.at("posterior");
    id.posterior.mean = VecFrom(q.at("mean"));
    id.posterior.std = VecFrom(q.at("std"));
    id.posterior.lower = VecFrom(q.at("lower"));
    id.posterior.upper = VecFrom(q.at("upper"));
    id.discrepancy = j.at("discrepancy").get<double>();
    id.evaluations = j.at("evaluations").get<int>();
    id.identifiable = j.at("identifiable").get<bool>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("identification record: ") + e.what());
  }
  id.posterior.Validate();
  return id;
}

json ToJson(const TaskReport& r) {
  return {{"value_real", r.value_real},
          {"value_oracle", r.value_oracle},
          {"suboptimality", r.suboptimality},
          {"suboptimality_se", r.suboptimality_se},
          {"success_rate", r.success_rate},
          {"task_error", r.task_error},
          {"episodes", r.episodes},
          {"policy", ToJson(r.policy)}};
}

std::string FormatNumber(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

void WriteJsonFile(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

json ReadJsonFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

OrderedSink::OrderedSink(const std::filesystem::path& path,
                         std::size_t n_jobs)
    : out_(path, std::ios::app), n_jobs_(n_jobs) {
  if (!out_) throw std::runtime_error("cannot open " + path.string());
}

void OrderedSink::Submit(std::size_t job, std::vector<std::string> lines) {
  std::lock_guard lock(mu_);
  if (job >= n_jobs_ || job < next_ || pending_.contains(job)) {
    throw ProtocolError("record sink: job submitted twice or out of range");
  }
  pending_.emplace(job, std::move(lines));
  FlushReady();
}

std::size_t OrderedSink::written() const {
  std::lock_guard lock(mu_);
  return next_;
}

void OrderedSink::FlushReady() {
  for (auto it = pending_.find(next_); it != pending_.end();
       it = pending_.find(next_)) {
    for (const auto& line : it->second) out_ << line << "\n";
    out_.flush();
    if (!out_) throw std::runtime_error("record sink: write failed");
    pending_.erase(it);
    ++next_;
  }
}

}  // namespace asid::harness
