#pragma once
// MDP layer over the door world: observations, clamped position-offset
// actions, the shaped five-term reward, episode collection and the PPO
// training loop with per-episode dynamics sampling.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "droid/errors.hpp"
#include "droid/identify.hpp"
#include "droid/policy.hpp"
#include "droid/rng.hpp"
#include "droid/simenv.hpp"
#include "droid/util.hpp"

namespace droid {

constexpr int kObsDim = 8;
constexpr int kActionDim = 2;
constexpr double kActionLimit = 0.05;       // rad per control step
constexpr int kControlDecimation = 20;      // physics steps per control step
constexpr double kDoorOpenAngle = 85.0 * 3.14159265358979323846 / 180.0;
constexpr double kSuccessAngle = 30.0 * 3.14159265358979323846 / 180.0;
constexpr double kSlipTerminalReward = -5.0;

struct RewardWeights {
  double w_door = 30.0;
  double w_ori = 0.1;
  double w_dist = 1.0;
  double w_log_dist = 0.01;
  double w_slip = 2.0;
  double switch_angle = 30.0 * 3.14159265358979323846 / 180.0;
};

inline void validate_reward_weights(const RewardWeights& w) {
  const double vals[] = {w.w_door, w.w_ori, w.w_dist, w.w_log_dist, w.w_slip, w.switch_angle};
  for (double v : vals)
    if (!std::isfinite(v)) throw InvalidConfigError("reward weights must be finite");
  if (w.switch_angle <= 0.0 || w.switch_angle >= 3.14159265358979323846 / 2.0)
    throw InvalidConfigError("reward switch_angle must lie in (0, pi/2)");
}

struct MdpObservation {
  Eigen::Vector2d q{0.0, 0.0};
  Eigen::Vector2d qdot{0.0, 0.0};
  Eigen::Vector2d knob_rel{0.0, 0.0};  // knob position minus end effector
  double door_angle = 0.0;
  double door_rate = 0.0;

  Eigen::VectorXd to_vector() const {
    Eigen::VectorXd v(kObsDim);
    v << q[0], q[1], qdot[0], qdot[1], knob_rel[0], knob_rel[1], door_angle, door_rate;
    return v;
  }
};

inline MdpObservation observe(const SimState& s, const WorldConfig& world) {
  MdpObservation obs;
  obs.q = s.q;
  obs.qdot = s.qdot;
  obs.knob_rel = knob_position(s.door_angle, world) - forward_kinematics(s.q, world).position;
  obs.door_angle = s.door_angle;
  obs.door_rate = s.door_rate;
  return obs;
}

inline Eigen::Vector2d clamp_action(const Eigen::Vector2d& action) {
  return action.cwiseMax(-kActionLimit).cwiseMin(kActionLimit);
}

// ---------------------------------------------------------------------------
// Reward
// ---------------------------------------------------------------------------

/// Shaped door reward over one control-step transition. `coupling_force` is
/// the largest grasp-force magnitude seen during the transition. Above the
/// switch angle the two distance terms drop out.
inline double reward(const SimState& prev, const SimState& curr, double coupling_force,
                     const DynParams& phi, const WorldConfig& world, const RewardWeights& w) {
  const double r_door = curr.door_angle - prev.door_angle;

  const FkResult fk = forward_kinematics(curr.q, world);
  const Eigen::Vector2d tangent = knob_tangent(curr.door_angle);
  const double tangent_dir = std::atan2(tangent[1], tangent[0]);
  const double r_ori = -std::abs(std::cos(fk.heading - tangent_dir));

  const double slip_limit = phi.slide_friction * world.grip_force;
  const double r_slip =
      slip_limit > 0.0 ? -std::max(0.0, coupling_force / slip_limit - 0.8) : -1.0;

  if (curr.door_angle >= w.switch_angle)
    return w.w_door * r_door + w.w_ori * r_ori + w.w_slip * r_slip;

  const double d = (knob_position(curr.door_angle, world) - fk.position).norm();
  const double r_dist = -d;
  const double r_log_dist = -std::log(d + 1e-4);
  return w.w_door * r_door + w.w_ori * r_ori + w.w_dist * r_dist + w.w_log_dist * r_log_dist +
         w.w_slip * r_slip;
}

// ---------------------------------------------------------------------------
// Dynamics-parameter sampling
// ---------------------------------------------------------------------------

/// Draws one parameter vector from a Gaussian ParamDistribution, redrawing
/// until every positivity-masked coordinate is strictly positive.
inline DynParams sample_dyn_params(const ParamDistribution& dist, Rng& rng) {
  validate_param_distribution(dist);
  const int n = static_cast<int>(dist.mean.size());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dist.covariance);
  if (eig.info() != Eigen::Success)
    throw InfeasibleDistributionError("sample_dyn_params: covariance factorization failed");
  const Eigen::MatrixXd transform =
      eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) z[i] = rng.gaussian();
    const Eigen::VectorXd x = dist.mean + transform * z;
    bool ok = true;
    for (int i = 0; i < n; ++i)
      if (dist.positivity[static_cast<std::size_t>(i)] && x[i] <= 0.0) ok = false;
    if (ok) return dyn_params_from_vector(x);
  }
  throw InfeasibleDistributionError("sample_dyn_params: positivity resampling exhausted");
}

// ---------------------------------------------------------------------------
// Environment
// ---------------------------------------------------------------------------

using PhiSource = std::variant<DynParams, ParamDistribution>;

struct EnvResetResult {
  SimState state;
  MdpObservation obs;
  DynParams phi;
};

/// Fresh episode: dynamics fixed or drawn from the source distribution, arm
/// grasping the knob with +-0.02 rad joint jitter. The jittered end effector
/// is re-projected onto the knob arc (door angle follows it) so the grasp
/// spring starts unloaded.
inline EnvResetResult env_reset(const PhiSource& source, const WorldConfig& world,
                                std::uint64_t seed) {
  validate_world(world);
  Rng rng(seed);
  EnvResetResult out;
  if (const auto* fixed = std::get_if<DynParams>(&source)) {
    out.phi = *fixed;
  } else {
    out.phi = sample_dyn_params(std::get<ParamDistribution>(source), rng);
  }
  validate_dyn_params(out.phi);

  const Eigen::Vector2d q_home = grasp_pose(world);
  Eigen::Vector2d q_jittered;
  q_jittered[0] = q_home[0] + rng.uniform(-0.02, 0.02);
  q_jittered[1] = q_home[1] + rng.uniform(-0.02, 0.02);
  double angle = door_angle_of_point(forward_kinematics(q_jittered, world).position, world);
  angle = std::clamp(angle, kDoorAngleMin, kDoorAngleMax);

  out.state = SimState{};
  out.state.door_angle = angle;
  out.state.q = inverse_kinematics(knob_position(angle, world), 1, world);
  out.obs = observe(out.state, world);
  return out;
}

struct EnvStepResult {
  SimState state;
  MdpObservation obs;
  double reward = 0.0;
  bool done = false;
  bool opened = false;      // door reached the open threshold
  bool grasp_lost = false;  // slipped or simulation diverged
  double coupling_force = 0.0;
};

/// One control step: the clamped action offsets the joint target, held for
/// kControlDecimation physics steps. Slip and divergence terminate with an
/// extra -5; reaching the open threshold terminates normally.
inline EnvStepResult env_step(const SimState& state, const DynParams& phi,
                              const Eigen::Vector2d& action, const WorldConfig& world,
                              const RewardWeights& w) {
  const Eigen::Vector2d q_des = state.q + clamp_action(action);
  const Eigen::Vector2d qdot_des = Eigen::Vector2d::Zero();

  EnvStepResult out;
  SimState curr = state;
  double force_max = 0.0;
  bool diverged = false;
  for (int k = 0; k < kControlDecimation; ++k) {
    try {
      StepResult sr = step(curr, q_des, qdot_des, phi, world);
      force_max = std::max(force_max, sr.coupling_force);
      curr = sr.state;
    } catch (const SimulationDivergedError&) {
      diverged = true;
      break;
    }
    if (!curr.grasped) break;
  }

  out.state = curr;
  out.coupling_force = force_max;
  if (diverged) {
    out.reward = kSlipTerminalReward;
    out.done = true;
    out.grasp_lost = true;
    out.obs = observe(state, world);  // last finite state
    out.state = state;
    return out;
  }

  out.reward = reward(state, curr, force_max, phi, world, w);
  if (!curr.grasped) {
    out.reward += kSlipTerminalReward;
    out.done = true;
    out.grasp_lost = true;
  }
  if (curr.door_angle >= kDoorOpenAngle) {
    out.done = true;
    out.opened = true;
  }
  out.obs = observe(curr, world);
  return out;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct CurvePoint {
  int update = 0;
  double mean_return = 0.0;
  double success_rate = 0.0;  // fraction of episodes passing kSuccessAngle
  double clip_frac = 0.0;
};

struct TrainResult {
  PolicyNet net;
  std::vector<CurvePoint> curve;
};

namespace detail {

struct EpisodeData {
  std::vector<Eigen::VectorXd> obs;
  std::vector<Eigen::Vector2d> actions;
  std::vector<double> log_probs;
  std::vector<double> rewards;
  std::vector<double> values;
  double terminal_value = 0.0;
  double total_reward = 0.0;
  bool success = false;
};

/// Rolls one stochastic episode with the current policy.
inline EpisodeData collect_episode(const PolicyNet& net, const PhiSource& source,
                                   const WorldConfig& world, const RewardWeights& w,
                                   const PpoConfig& cfg, std::uint64_t reset_seed,
                                   std::uint64_t action_seed) {
  EpisodeData ep;
  Rng rng(action_seed);
  EnvResetResult env = env_reset(source, world, reset_seed);
  SimState state = env.state;
  Eigen::VectorXd x = env.obs.to_vector();
  double max_angle = state.door_angle;

  for (int t = 0; t < cfg.horizon; ++t) {
    const PolicyEvalResult head = policy_eval(net, x);
    Eigen::Vector2d action;
    for (int i = 0; i < kActionDim; ++i)
      action[i] = head.mean[i] + std::exp(head.log_std[i]) * rng.gaussian();

    const EnvStepResult sr = env_step(state, env.phi, action, world, w);

    ep.obs.push_back(x);
    ep.actions.push_back(action);
    ep.log_probs.push_back(log_prob(head.mean, head.log_std, action));
    ep.rewards.push_back(sr.reward);
    ep.values.push_back(head.value);
    ep.total_reward += sr.reward;

    state = sr.state;
    x = sr.obs.to_vector();
    max_angle = std::max(max_angle, state.door_angle);
    if (sr.done) {
      ep.terminal_value = 0.0;
      break;
    }
    if (t == cfg.horizon - 1) ep.terminal_value = policy_eval(net, x).value;
  }
  ep.success = max_angle >= kSuccessAngle;
  return ep;
}

}  // namespace detail

/// PPO training: per update, collect rollout_episodes_per_update episodes
/// (fresh dynamics each reset), estimate advantages, run one clipped update.
/// Observation normalization constants refresh after each update from running
/// moments, so they stay frozen within an update.
inline TrainResult train_policy(const PhiSource& source, const WorldConfig& world,
                                const RewardWeights& w, const PpoConfig& cfg) {
  validate_world(world);
  validate_reward_weights(w);
  if (cfg.horizon < 1 || cfg.rollout_episodes_per_update < 1 || cfg.total_updates < 0 ||
      cfg.minibatch < 1)
    throw InvalidConfigError("train_policy: horizon, episodes, updates, minibatch must be valid");

  TrainResult out;
  out.net = make_policy(kObsDim, kActionDim, mix_seed(cfg.seed, 0x11u));
  AdamState adam = AdamState::zeros_like(out.net);

  long welford_count = 0;
  Eigen::VectorXd welford_mean = Eigen::VectorXd::Zero(kObsDim);
  Eigen::VectorXd welford_m2 = Eigen::VectorXd::Zero(kObsDim);

  for (int update = 0; update < cfg.total_updates; ++update) {
    std::vector<detail::EpisodeData> episodes;
    episodes.reserve(static_cast<std::size_t>(cfg.rollout_episodes_per_update));
    long total_steps = 0;
    for (int e = 0; e < cfg.rollout_episodes_per_update; ++e) {
      const std::uint64_t stream =
          static_cast<std::uint64_t>(update) *
              static_cast<std::uint64_t>(cfg.rollout_episodes_per_update) +
          static_cast<std::uint64_t>(e);
      episodes.push_back(detail::collect_episode(out.net, source, world, w, cfg,
                                                 mix_seed(mix_seed(cfg.seed, 0x12u), stream),
                                                 mix_seed(mix_seed(cfg.seed, 0x13u), stream)));
      total_steps += static_cast<long>(episodes.back().obs.size());
    }

    PpoBatch batch;
    batch.obs.resize(kObsDim, total_steps);
    batch.actions.resize(kActionDim, total_steps);
    batch.old_log_prob.resize(total_steps);
    batch.advantages.resize(total_steps);
    batch.returns.resize(total_steps);
    Eigen::Index col = 0;
    for (const auto& ep : episodes) {
      const auto [adv, ret] =
          gae(ep.rewards, ep.values, ep.terminal_value, cfg.discount, cfg.gae_lambda);
      for (std::size_t t = 0; t < ep.obs.size(); ++t, ++col) {
        batch.obs.col(col) = ep.obs[t];
        batch.actions.col(col) = ep.actions[t];
        batch.old_log_prob[col] = ep.log_probs[t];
        batch.advantages[col] = adv[t];
        batch.returns[col] = ret[t];
      }
    }

    PpoConfig update_cfg = cfg;
    update_cfg.seed = mix_seed(mix_seed(cfg.seed, 0x14u), static_cast<std::uint64_t>(update));
    auto [next_net, diag] = ppo_update(out.net, batch, update_cfg, &adam);
    out.net = std::move(next_net);

    for (Eigen::Index c = 0; c < batch.obs.cols(); ++c) {
      ++welford_count;
      const Eigen::VectorXd delta = batch.obs.col(c) - welford_mean;
      welford_mean += delta / static_cast<double>(welford_count);
      welford_m2 += delta.cwiseProduct(batch.obs.col(c) - welford_mean);
    }
    if (welford_count >= 2) {
      out.net.obs_mean = welford_mean;
      out.net.obs_std = (welford_m2 / static_cast<double>(welford_count))
                            .cwiseSqrt()
                            .cwiseMax(1e-6);
    }

    CurvePoint point;
    point.update = update;
    for (const auto& ep : episodes) {
      point.mean_return += ep.total_reward;
      point.success_rate += ep.success ? 1.0 : 0.0;
    }
    point.mean_return /= static_cast<double>(episodes.size());
    point.success_rate /= static_cast<double>(episodes.size());
    point.clip_frac = diag.clip_fraction;
    out.curve.push_back(point);
  }
  return out;
}

inline std::string curve_to_csv(const std::vector<CurvePoint>& curve) {
  std::ostringstream os;
  os << "update,mean_return,success_rate,clip_frac\n";
  for (const auto& p : curve)
    os << p.update << ',' << format_double(p.mean_return) << ','
       << format_double(p.success_rate) << ',' << format_double(p.clip_frac) << '\n';
  return os.str();
}

}  // namespace droid
