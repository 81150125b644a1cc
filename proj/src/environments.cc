// Catalog of toy dynamical systems.
//
//   linear1d            s' = s + theta a
//   rod-pivot           impulse J at position x spins a rod whose centre of
//                       mass sits at offset c: omega += J (x - c) / I(c),
//                       I(c) = m L^2 / 12 + m c^2. Task: place the rod on a
//                       ledge at p; it tilts by k (c - p) degrees.
//   pointmass-friction  kinematic striker hits a ball that decelerates under
//                       rolling friction mu. Task: stop the ball in a goal.
//   multi-region        as pointmass-friction, but the friction coefficient
//                       depends on which of three patches the ball is on.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <utility>

#include "asid/envlab.h"
#include "asid/error.h"
#include "asid/random.h"

namespace asid {
namespace {

Eigen::VectorXd Vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// ---------------------------------------------------------------------------
// linear1d

EnvSpec Linear1dSpec(Phase /*phase*/) {
  EnvSpec s;
  s.env_id = "linear1d";
  s.n_s = 1;
  s.n_a = 1;
  s.d = 1;
  s.horizon = 3;
  s.sigma_w = 0.05;
  s.action_low = Vec({-1.0});
  s.action_high = Vec({1.0});
  s.init_state_sampler_id = "fixed_zero";
  s.param_names = {"gain"};
  s.param_lower = Vec({0.1});
  s.param_upper = Vec({3.0});
  s.param_default = Vec({1.0});
  s.extras = {{"goal", 3.0}, {"terminal_tolerance", 0.05}};
  return s;
}

class Linear1d final : public Environment {
 public:
  Linear1d(EnvSpec e, EnvSpec t)
      : Environment(std::move(e), std::move(t)),
        goal_(spec(Phase::kTask).Extra("goal")),
        tolerance_(spec(Phase::kTask).Extra("terminal_tolerance")) {}

  Eigen::VectorXd Nominal(Phase, const Eigen::VectorXd& s,
                          const Eigen::VectorXd& a,
                          const Eigen::VectorXd& theta) const override {
    return s + theta[0] * a;
  }

  double TaskReturn(const Trajectory& traj) const override {
    const double e = traj.states.back()[0] - goal_;
    return -e * e;
  }
  double TaskError(const Trajectory& traj) const override {
    return std::abs(traj.states.back()[0] - goal_);
  }
  bool TaskSuccess(const Trajectory& traj) const override {
    return TaskError(traj) <= tolerance_;
  }

 private:
  double goal_;
  double tolerance_;
};

// ---------------------------------------------------------------------------
// rod-pivot

EnvSpec RodSpec(Phase phase) {
  EnvSpec s;
  s.env_id = "rod-pivot";
  s.n_s = 2;  // (angle [rad], angular velocity [rad/s])
  s.d = 1;
  // The placement outcome is static: no process noise in the task phase.
  s.sigma_w = phase == Phase::kExplore ? 0.01 : 0.0;
  if (phase == Phase::kExplore) {
    s.n_a = 2;  // (impulse J [N s], application point x [m])
    s.horizon = 3;
    s.action_low = Vec({-1.0, -0.5});
    s.action_high = Vec({1.0, 0.5});
  } else {
    s.n_a = 1;  // placement point p [m]
    s.horizon = 1;
    s.action_low = Vec({-0.5});
    s.action_high = Vec({0.5});
  }
  s.init_state_sampler_id = "fixed_zero";
  s.param_names = {"com_offset"};
  s.param_lower = Vec({-0.5});
  s.param_upper = Vec({0.5});
  s.param_default = Vec({0.0});
  s.normalize_discrepancy = true;
  s.extras = {{"dt", 0.1},
              {"mass", 1.0},
              {"length", 1.0},
              {"tilt_gain_deg", 60.0},
              {"tilt_tolerance_deg", 2.0}};
  return s;
}

class RodPivot final : public Environment {
 public:
  RodPivot(EnvSpec e, EnvSpec t)
      : Environment(std::move(e), std::move(t)),
        dt_(spec().Extra("dt")),
        mass_(spec().Extra("mass")),
        length_(spec().Extra("length")),
        tilt_gain_deg_(spec(Phase::kTask).Extra("tilt_gain_deg")),
        tolerance_deg_(spec(Phase::kTask).Extra("tilt_tolerance_deg")) {
    if (!(mass_ > 0.0) || !(length_ > 0.0) || !(dt_ > 0.0)) {
      throw ConfigError("rod-pivot: mass, length and dt must be positive");
    }
  }

  double Inertia(double c) const {
    return mass_ * length_ * length_ / 12.0 + mass_ * c * c;
  }

  Eigen::VectorXd Nominal(Phase phase, const Eigen::VectorXd& s,
                          const Eigen::VectorXd& a,
                          const Eigen::VectorXd& theta) const override {
    const double c = theta[0];
    Eigen::VectorXd next(2);
    if (phase == Phase::kExplore) {
      const double omega = s[1] + a[0] * (a[1] - c) / Inertia(c);
      next << s[0] + dt_ * omega, omega;
    } else {
      const double tilt_deg = tilt_gain_deg_ * (c - a[0]);
      next << tilt_deg * std::numbers::pi / 180.0, 0.0;
    }
    return next;
  }

  double TiltDeg(const Trajectory& traj) const {
    return traj.states.back()[0] * 180.0 / std::numbers::pi;
  }
  double TaskReturn(const Trajectory& traj) const override {
    const double t = TiltDeg(traj);
    return -t * t;
  }
  double TaskError(const Trajectory& traj) const override {
    return std::abs(TiltDeg(traj));
  }
  bool TaskSuccess(const Trajectory& traj) const override {
    return TaskError(traj) <= tolerance_deg_;
  }

 private:
  double dt_;
  double mass_;
  double length_;
  double tilt_gain_deg_;
  double tolerance_deg_;
};

// ---------------------------------------------------------------------------
// Striker/ball family. State (striker x, ball x, ball v); action = striker
// velocity command.

void StrikerExtras(EnvSpec& s) {
  s.extras.insert({{"dt", 0.05},
                   {"gravity", 9.81},
                   {"restitution", 0.8},
                   {"contact_gap", 0.05},
                   {"striker_start", 0.0},
                   {"striker_min", -0.2},
                   {"striker_max", 0.8},
                   {"ball_start_low", 0.5},
                   {"ball_start_high", 0.65}});
}

EnvSpec PointmassSpec(Phase /*phase*/) {
  EnvSpec s;
  s.env_id = "pointmass-friction";
  s.n_s = 3;
  s.n_a = 1;
  s.d = 1;
  s.horizon = 50;
  s.sigma_w = 0.0005;
  s.action_low = Vec({-1.5});
  s.action_high = Vec({1.5});
  s.init_state_sampler_id = "ball_uniform";
  s.param_names = {"friction"};
  s.param_lower = Vec({0.1});
  s.param_upper = Vec({0.4});
  s.param_default = Vec({0.25});
  s.extras = {{"goal", 1.5},
              {"goal_radius", 0.05},
              {"ball_start_low", 0.55},
              {"ball_start_high", 0.6}};
  StrikerExtras(s);
  return s;
}

EnvSpec MultiRegionSpec(Phase /*phase*/) {
  EnvSpec s;
  s.env_id = "multi-region";
  s.n_s = 3;
  s.n_a = 1;
  s.d = 3;
  s.horizon = 60;
  s.sigma_w = 0.0005;
  s.action_low = Vec({-2.0});
  s.action_high = Vec({2.0});
  s.init_state_sampler_id = "ball_uniform";
  s.param_names = {"friction_1", "friction_2", "friction_3"};
  s.param_lower = Vec({0.1, 0.1, 0.1});
  s.param_upper = Vec({0.4, 0.4, 0.4});
  s.param_default = Vec({0.25, 0.25, 0.25});
  s.extras = {{"goal", 2.2},
              {"goal_radius", 0.1},
              {"patch2_start", 1.2},
              {"patch3_start", 1.8},
              {"striker_max", 1.0},
              {"ball_start_low", 0.7},
              {"ball_start_high", 0.85}};
  StrikerExtras(s);
  return s;
}

class StrikerBall : public Environment {
 public:
  StrikerBall(EnvSpec e, EnvSpec t)
      : Environment(std::move(e), std::move(t)) {
    const EnvSpec& s = spec();
    dt_ = s.Extra("dt");
    gravity_ = s.Extra("gravity");
    restitution_ = s.Extra("restitution");
    gap_ = s.Extra("contact_gap");
    striker_start_ = s.Extra("striker_start");
    striker_min_ = s.Extra("striker_min");
    striker_max_ = s.Extra("striker_max");
    ball_low_ = s.Extra("ball_start_low");
    ball_high_ = s.Extra("ball_start_high");
    goal_ = spec(Phase::kTask).Extra("goal");
    goal_radius_ = spec(Phase::kTask).Extra("goal_radius");
    if (!(dt_ > 0.0) || !(gravity_ > 0.0) || restitution_ < 0.0 ||
        !(striker_min_ < striker_max_) || !(ball_low_ <= ball_high_)) {
      throw ConfigError(s.env_id + ": inconsistent striker/ball constants");
    }
  }

  Eigen::VectorXd InitialState(Phase /*phase*/,
                               std::uint64_t seed) const override {
    Rng rng(DeriveSeed(seed, Stream::kInitialState));
    Eigen::VectorXd s(3);
    s << striker_start_, rng.Uniform(ball_low_, ball_high_), 0.0;
    return s;
  }

  Eigen::VectorXd Nominal(Phase, const Eigen::VectorXd& s,
                          const Eigen::VectorXd& a,
                          const Eigen::VectorXd& theta) const override {
    const double striker =
        std::clamp(s[0] + a[0] * dt_, striker_min_, striker_max_);
    const double striker_v = (striker - s[0]) / dt_;
    double x = s[1];
    double v = s[2];
    if (striker >= x - gap_ && striker_v > v) {
      v = (1.0 + restitution_) * striker_v - restitution_ * v;
    }
    // Rolling friction removes up to mu g dt of speed and never reverses the
    // ball.
    const double decel = Friction(x, theta) * gravity_ * dt_;
    const double speed = std::max(0.0, std::abs(v) - decel);
    v = std::copysign(speed, v);
    Eigen::VectorXd next(3);
    next << striker, x + v * dt_, v;
    return next;
  }

  double TaskReturn(const Trajectory& traj) const override {
    const double e = traj.states.back()[1] - goal_;
    return -e * e;
  }
  double TaskError(const Trajectory& traj) const override {
    return std::abs(traj.states.back()[1] - goal_);
  }
  bool TaskSuccess(const Trajectory& traj) const override {
    return TaskError(traj) <= goal_radius_;
  }

  EpisodeSummary Summarize(const Trajectory& traj) const override {
    EpisodeSummary out;
    for (int h = 0; h < traj.horizon; ++h) {
      if (traj.states[h + 1][0] >= traj.states[h][1] - gap_) {
        out.contact = true;
        break;
      }
    }
    out.displacement =
        std::abs(traj.states.back()[1] - traj.states.front()[1]);
    const int start = Region(traj.states.front()[1]);
    std::set<int> visited;
    for (const auto& s : traj.states) {
      const int r = Region(s[1]);
      if (r != start) visited.insert(r);
    }
    out.regions_visited = static_cast<int>(visited.size());
    return out;
  }

 protected:
  virtual double Friction(double x, const Eigen::VectorXd& theta) const = 0;
  virtual int Region(double /*x*/) const { return 0; }

 private:
  double dt_, gravity_, restitution_, gap_;
  double striker_start_, striker_min_, striker_max_;
  double ball_low_, ball_high_;
  double goal_, goal_radius_;
};

class PointmassFriction final : public StrikerBall {
 public:
  using StrikerBall::StrikerBall;

 protected:
  double Friction(double, const Eigen::VectorXd& theta) const override {
    return theta[0];
  }
};

class MultiRegion final : public StrikerBall {
 public:
  MultiRegion(EnvSpec e, EnvSpec t)
      : StrikerBall(std::move(e), std::move(t)),
        patch2_(spec().Extra("patch2_start")),
        patch3_(spec().Extra("patch3_start")) {
    if (!(patch2_ < patch3_)) {
      throw ConfigError("multi-region: patch boundaries must increase");
    }
  }

 protected:
  double Friction(double x, const Eigen::VectorXd& theta) const override {
    return theta[Region(x)];
  }
  int Region(double x) const override {
    if (x < patch2_) return 0;
    return x < patch3_ ? 1 : 2;
  }

 private:
  double patch2_;
  double patch3_;
};

using SpecFn = EnvSpec (*)(Phase);

SpecFn LookupSpec(std::string_view env_id) {
  if (env_id == "linear1d") return &Linear1dSpec;
  if (env_id == "rod-pivot") return &RodSpec;
  if (env_id == "pointmass-friction") return &PointmassSpec;
  if (env_id == "multi-region") return &MultiRegionSpec;
  throw ConfigError("unknown env_id '" + std::string(env_id) + "'");
}

void ApplyOverrides(EnvSpec& s, Phase phase, const EnvOverrides& o) {
  // Envs whose task reuses the exploration dynamics share horizon and noise
  // unless the task values are given explicitly.
  const bool shared = s.env_id != "rod-pivot";
  if (phase == Phase::kExplore) {
    if (o.horizon) s.horizon = *o.horizon;
    if (o.sigma_w) s.sigma_w = *o.sigma_w;
  } else {
    if (o.task_horizon) {
      s.horizon = *o.task_horizon;
    } else if (o.horizon && shared) {
      s.horizon = *o.horizon;
    }
    if (o.task_sigma_w) {
      s.sigma_w = *o.task_sigma_w;
    } else if (o.sigma_w && shared) {
      s.sigma_w = *o.sigma_w;
    }
  }
  for (const auto& [key, value] : o.extras) {
    if (!s.extras.contains(key)) {
      throw ConfigError(s.env_id + ": unknown extra '" + key + "'");
    }
    s.extras[key] = value;
  }
}

}  // namespace

std::vector<std::string> EnvironmentIds() {
  return {"linear1d", "rod-pivot", "pointmass-friction", "multi-region"};
}

EnvSpec DefaultSpec(std::string_view env_id, Phase phase) {
  return LookupSpec(env_id)(phase);
}

std::shared_ptr<const Environment> MakeEnvironment(
    std::string_view env_id, const EnvOverrides& overrides) {
  SpecFn fn = LookupSpec(env_id);
  EnvSpec explore = fn(Phase::kExplore);
  EnvSpec task = fn(Phase::kTask);
  ApplyOverrides(explore, Phase::kExplore, overrides);
  ApplyOverrides(task, Phase::kTask, overrides);
  if (env_id == "linear1d") {
    return std::make_shared<Linear1d>(std::move(explore), std::move(task));
  }
  if (env_id == "rod-pivot") {
    return std::make_shared<RodPivot>(std::move(explore), std::move(task));
  }
  if (env_id == "pointmass-friction") {
    return std::make_shared<PointmassFriction>(std::move(explore),
                                               std::move(task));
  }
  return std::make_shared<MultiRegion>(std::move(explore), std::move(task));
}

}  // namespace asid
