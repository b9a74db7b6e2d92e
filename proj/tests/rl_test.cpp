#include "droid/rl.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "droid/errors.hpp"
#include "droid/policy.hpp"
#include "droid/rng.hpp"
#include "droid/simenv.hpp"

namespace droid {
namespace {

PolicyNet zero_policy() {
  PolicyNet net = make_policy(kObsDim, kActionDim, 0);
  for (auto& w : net.actor.weights) w.setZero();
  for (auto& b : net.actor.biases) b.setZero();
  for (auto& w : net.critic.weights) w.setZero();
  for (auto& b : net.critic.biases) b.setZero();
  net.log_std.setZero();
  return net;
}

bool nets_identical(const PolicyNet& a, const PolicyNet& b) {
  for (std::size_t l = 0; l < a.actor.weights.size(); ++l)
    if (a.actor.weights[l] != b.actor.weights[l] || a.actor.biases[l] != b.actor.biases[l])
      return false;
  for (std::size_t l = 0; l < a.critic.weights.size(); ++l)
    if (a.critic.weights[l] != b.critic.weights[l] || a.critic.biases[l] != b.critic.biases[l])
      return false;
  return a.log_std == b.log_std && a.obs_mean == b.obs_mean && a.obs_std == b.obs_std;
}

// Flat indexing over every trainable block: actor weights/biases, critic
// weights/biases, then log_std.
struct ParamRef {
  double* value = nullptr;
  double grad = 0.0;
};

std::vector<ParamRef> collect_params(PolicyNet& net, const detail::PolicyGrads& grads) {
  std::vector<ParamRef> out;
  auto add_matrix = [&](Eigen::MatrixXd& p, const Eigen::MatrixXd& g) {
    for (Eigen::Index i = 0; i < p.size(); ++i) out.push_back({p.data() + i, g.data()[i]});
  };
  auto add_vector = [&](Eigen::VectorXd& p, const Eigen::VectorXd& g) {
    for (Eigen::Index i = 0; i < p.size(); ++i) out.push_back({p.data() + i, g.data()[i]});
  };
  for (std::size_t l = 0; l < net.actor.weights.size(); ++l)
    add_matrix(net.actor.weights[l], grads.actor.weights[l]);
  for (std::size_t l = 0; l < net.actor.biases.size(); ++l)
    add_vector(net.actor.biases[l], grads.actor.biases[l]);
  for (std::size_t l = 0; l < net.critic.weights.size(); ++l)
    add_matrix(net.critic.weights[l], grads.critic.weights[l]);
  for (std::size_t l = 0; l < net.critic.biases.size(); ++l)
    add_vector(net.critic.biases[l], grads.critic.biases[l]);
  add_vector(net.log_std, grads.log_std);
  return out;
}

// Batch whose old log probs match the network exactly, so ratios start at 1.
PpoBatch consistent_batch(const PolicyNet& net, int n, std::uint64_t seed) {
  Rng rng(seed);
  PpoBatch batch;
  batch.obs.resize(kObsDim, n);
  batch.actions.resize(kActionDim, n);
  batch.old_log_prob.resize(n);
  batch.advantages.resize(n);
  batch.returns.resize(n);
  for (int c = 0; c < n; ++c) {
    for (int i = 0; i < kObsDim; ++i) batch.obs(i, c) = rng.gaussian();
    const PolicyEvalResult head = policy_eval(net, batch.obs.col(c));
    Eigen::VectorXd action(kActionDim);
    for (int i = 0; i < kActionDim; ++i)
      action[i] = head.mean[i] + std::exp(head.log_std[i]) * rng.gaussian();
    batch.actions.col(c) = action;
    batch.old_log_prob[c] = log_prob(head.mean, head.log_std, action);
    batch.advantages[c] = rng.gaussian();
    batch.returns[c] = rng.gaussian();
  }
  return batch;
}

// ---------------------------------------------------------------------------
// Policy evaluation and log probabilities
// ---------------------------------------------------------------------------

TEST(PolicyEval, ZeroNetworkGivesZeroOutputs) {
  const PolicyNet net = zero_policy();
  Eigen::VectorXd obs(kObsDim);
  obs << 0.3, -0.2, 1.0, 0.5, -0.7, 0.1, 0.4, -1.2;
  const PolicyEvalResult r = policy_eval(net, obs);
  EXPECT_EQ(r.mean[0], 0.0);
  EXPECT_EQ(r.mean[1], 0.0);
  EXPECT_EQ(r.value, 0.0);
}

TEST(PolicyEval, DeterministicForward) {
  const PolicyNet net = make_policy(kObsDim, kActionDim, 42);
  Eigen::VectorXd obs(kObsDim);
  obs << 0.3, -0.2, 1.0, 0.5, -0.7, 0.1, 0.4, -1.2;
  const PolicyEvalResult a = policy_eval(net, obs);
  const PolicyEvalResult b = policy_eval(net, obs);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.value, b.value);
}

TEST(PolicyEval, RejectsNonFiniteObservation) {
  const PolicyNet net = make_policy(kObsDim, kActionDim, 42);
  Eigen::VectorXd obs = Eigen::VectorXd::Zero(kObsDim);
  obs[3] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(policy_eval(net, obs), InvalidInputError);
}

TEST(LogProb, ModeOfStandardGaussian2d) {
  const Eigen::VectorXd mean = Eigen::VectorXd::Zero(2);
  const Eigen::VectorXd log_std = Eigen::VectorXd::Zero(2);
  // -(d/2) log(2 pi) with d = 2.
  EXPECT_NEAR(log_prob(mean, log_std, mean), -1.8378770664093455, 1e-14);
}

TEST(LogProb, TranslationInvariant) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd mean(2), ls(2), action(2), shift(2);
    for (int i = 0; i < 2; ++i) {
      mean[i] = rng.gaussian();
      ls[i] = rng.uniform(-1.0, 1.0);
      action[i] = rng.gaussian();
      shift[i] = rng.gaussian();
    }
    const double a = log_prob(mean, ls, action);
    const double b = log_prob(mean + shift, ls, action + shift);
    EXPECT_NEAR(a, b, 1e-12);
  }
}

TEST(LogProb, UnitLogStdShiftDropsModeDensityByTwo) {
  Eigen::VectorXd mean(2), ls(2);
  mean << 0.4, -1.1;
  ls << 0.3, -0.2;
  const double at_mode = log_prob(mean, ls, mean);
  const double wider = log_prob(mean, (ls.array() + 1.0).matrix(), mean);
  EXPECT_NEAR(at_mode - wider, 2.0, 1e-12);
}

TEST(LogProb, MatchesAnalyticNormalizationConstant) {
  // exp(log_prob at the mode) must equal the Gaussian peak density
  // 1 / ((2 pi)^(d/2) prod sigma), so the density integrates to one.
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd mean(2), ls(2);
    for (int i = 0; i < 2; ++i) {
      mean[i] = rng.gaussian();
      ls[i] = rng.uniform(-1.5, 1.5);
    }
    const double peak = std::exp(log_prob(mean, ls, mean));
    const double norm = std::pow(2.0 * 3.14159265358979323846, 1.0) * std::exp(ls.sum());
    EXPECT_NEAR(peak * norm, 1.0, 1e-12);
  }
}

// ---------------------------------------------------------------------------
// Generalized advantage estimation
// ---------------------------------------------------------------------------

TEST(Gae, HandRolledRecursionOracle) {
  const std::vector<double> rewards{1.0, 1.0, 1.0};
  const std::vector<double> values{0.0, 0.0, 0.0};
  const auto [adv, ret] = gae(rewards, values, 0.0, 0.9, 0.95);
  EXPECT_NEAR(adv[2], 1.0, 1e-12);
  EXPECT_NEAR(adv[1], 1.855, 1e-12);
  EXPECT_NEAR(adv[0], 2.586025, 1e-12);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(ret[static_cast<std::size_t>(i)],
                                          adv[static_cast<std::size_t>(i)], 1e-12);
}

TEST(Gae, TelescopesToMonteCarloWhenLambdaAndGammaAreOne) {
  Rng rng(3);
  std::vector<double> rewards(8), values(8);
  for (int i = 0; i < 8; ++i) {
    rewards[static_cast<std::size_t>(i)] = rng.gaussian();
    values[static_cast<std::size_t>(i)] = rng.gaussian();
  }
  const auto [adv, ret] = gae(rewards, values, 0.0, 1.0, 1.0);
  for (std::size_t t = 0; t < rewards.size(); ++t) {
    double tail = 0.0;
    for (std::size_t k = t; k < rewards.size(); ++k) tail += rewards[k];
    EXPECT_NEAR(adv[t], tail - values[t], 1e-12);
    EXPECT_NEAR(ret[t], tail, 1e-12);
  }
}

TEST(Gae, LambdaZeroIsOneStepTemporalDifference) {
  Rng rng(4);
  std::vector<double> rewards(6), values(6);
  for (int i = 0; i < 6; ++i) {
    rewards[static_cast<std::size_t>(i)] = rng.gaussian();
    values[static_cast<std::size_t>(i)] = rng.gaussian();
  }
  const double terminal = 0.25;
  const double gamma = 0.97;
  const auto [adv, ret] = gae(rewards, values, terminal, gamma, 0.0);
  for (std::size_t t = 0; t < rewards.size(); ++t) {
    const double next = t + 1 < values.size() ? values[t + 1] : terminal;
    EXPECT_NEAR(adv[t], rewards[t] + gamma * next - values[t], 1e-12);
  }
}

TEST(Gae, RejectsLengthMismatch) {
  EXPECT_THROW(gae({1.0, 2.0}, {0.0}, 0.0, 0.99, 0.95), InvalidInputError);
}

// ---------------------------------------------------------------------------
// PPO update mechanics
// ---------------------------------------------------------------------------

TEST(PpoUpdate, ZeroEpochsLeavesNetUntouched) {
  const PolicyNet net = make_policy(kObsDim, kActionDim, 9);
  const PpoBatch batch = consistent_batch(net, 16, 100);
  PpoConfig cfg;
  cfg.epochs_per_update = 0;
  const auto [next, diag] = ppo_update(net, batch, cfg);
  EXPECT_TRUE(nets_identical(net, next));
  EXPECT_EQ(diag.mean_ratio, 1.0);
}

TEST(PpoUpdate, InitialRatioIdentityHolds) {
  const PolicyNet net = make_policy(kObsDim, kActionDim, 9);
  const PpoBatch batch = consistent_batch(net, 64, 101);
  PpoConfig cfg;
  cfg.epochs_per_update = 1;
  cfg.minibatch = 16;
  const auto [next, diag] = ppo_update(net, batch, cfg);
  EXPECT_LE(diag.initial_ratio_error, 1e-10);
  EXPECT_FALSE(nets_identical(net, next));
}

TEST(PpoUpdate, InconsistentOldLogProbsAreRejected) {
  const PolicyNet net = make_policy(kObsDim, kActionDim, 9);
  PpoBatch batch = consistent_batch(net, 16, 102);
  batch.old_log_prob.array() += 0.5;
  PpoConfig cfg;
  EXPECT_THROW(ppo_update(net, batch, cfg), DivergedUpdateError);
}

TEST(PpoUpdate, NonFiniteAdvantageRaisesDivergedUpdate) {
  const PolicyNet net = make_policy(kObsDim, kActionDim, 9);
  PpoBatch batch = consistent_batch(net, 16, 103);
  batch.advantages[3] = std::numeric_limits<double>::quiet_NaN();
  PpoConfig cfg;
  EXPECT_THROW(ppo_update(net, batch, cfg), DivergedUpdateError);
}

TEST(PpoUpdate, DeterministicGivenSeed) {
  const PolicyNet net = make_policy(kObsDim, kActionDim, 9);
  const PpoBatch batch = consistent_batch(net, 48, 104);
  PpoConfig cfg;
  cfg.epochs_per_update = 3;
  cfg.minibatch = 16;
  const auto [a, da] = ppo_update(net, batch, cfg);
  const auto [b, db] = ppo_update(net, batch, cfg);
  EXPECT_TRUE(nets_identical(a, b));
  EXPECT_EQ(da.policy_loss, db.policy_loss);
}

TEST(PpoSurrogate, ClipBranchSemantics) {
  const PolicyNet net = make_policy(kObsDim, kActionDim, 21);
  const double eps = 0.2;

  auto single = [&](double ratio, double advantage) {
    PpoBatch batch;
    batch.obs = Eigen::MatrixXd::Zero(kObsDim, 1);
    batch.obs(0, 0) = 0.37;
    const PolicyEvalResult head = policy_eval(net, batch.obs.col(0));
    batch.actions = head.mean;
    const double lp = log_prob(head.mean, head.log_std, head.mean);
    batch.old_log_prob = Eigen::VectorXd::Constant(1, lp - std::log(ratio));
    batch.advantages = Eigen::VectorXd::Constant(1, advantage);
    batch.returns = Eigen::VectorXd::Zero(1);
    PpoDiagnostics diag;
    detail::ppo_loss_and_grads(net, batch, eps, nullptr, &diag);
    return diag;
  };

  // Ratio forced above the band with positive advantage: clipped at (1+eps)A.
  const PpoDiagnostics high = single(1.0 + 2.0 * eps, 1.5);
  EXPECT_NEAR(high.surrogate_mean, (1.0 + eps) * 1.5, 1e-12);
  EXPECT_EQ(high.clip_fraction, 1.0);

  // Ratio below the band with negative advantage: pessimistic (1-eps)A.
  const PpoDiagnostics low = single(1.0 - 2.0 * eps, -1.0);
  EXPECT_NEAR(low.surrogate_mean, (1.0 - eps) * -1.0, 1e-12);
  EXPECT_EQ(low.clip_fraction, 1.0);

  // Ratio inside the band: surrogate is the raw ratio * advantage.
  const PpoDiagnostics mid = single(1.05, 0.7);
  EXPECT_NEAR(mid.surrogate_mean, 1.05 * 0.7, 1e-12);
  EXPECT_EQ(mid.clip_fraction, 0.0);
}

TEST(PpoGradients, MatchCentralFiniteDifferences) {
  PolicyNet net = make_policy(kObsDim, kActionDim, 31);
  PpoBatch batch = consistent_batch(net, 6, 300);
  // Nudge old log probs slightly so ratios sit strictly inside the clip band
  // but gradients are non-trivial.
  Rng noise(301);
  for (int i = 0; i < batch.old_log_prob.size(); ++i)
    batch.old_log_prob[i] += noise.uniform(-1e-3, 1e-3);

  detail::PolicyGrads grads{MlpGrads::zeros_like(net.actor), MlpGrads::zeros_like(net.critic),
                            Eigen::VectorXd::Zero(kActionDim)};
  detail::ppo_loss_and_grads(net, batch, 0.2, &grads, nullptr);
  std::vector<ParamRef> params = collect_params(net, grads);

  Rng pick(302);
  int checked = 0;
  int attempts = 0;
  while (checked < 12 && attempts < 4000) {
    ++attempts;
    ParamRef& p = params[static_cast<std::size_t>(pick.uniform_int(
        static_cast<int>(params.size())))];
    if (std::abs(p.grad) < 1e-3) continue;
    const double saved = *p.value;
    const double h = 1e-5;
    *p.value = saved + h;
    const double up = detail::ppo_loss_and_grads(net, batch, 0.2, nullptr, nullptr);
    *p.value = saved - h;
    const double down = detail::ppo_loss_and_grads(net, batch, 0.2, nullptr, nullptr);
    *p.value = saved;
    const double fd = (up - down) / (2.0 * h);
    const double rel = std::abs(fd - p.grad) / std::max(std::abs(fd), std::abs(p.grad));
    EXPECT_LT(rel, 1e-4) << "analytic " << p.grad << " vs fd " << fd;
    ++checked;
  }
  EXPECT_GE(checked, 10);
}

TEST(PolicyJson, RoundTripIsBitExact) {
  PolicyNet net = make_policy(kObsDim, kActionDim, 77);
  net.obs_mean = Eigen::VectorXd::LinSpaced(kObsDim, -0.4, 1.3);
  net.obs_std = Eigen::VectorXd::LinSpaced(kObsDim, 0.5, 2.0);
  const std::filesystem::path path =
      std::filesystem::temp_directory_path() / "droid_rl_policy_roundtrip.json";
  save_policy(net, path);
  const PolicyNet loaded = load_policy(path);
  std::filesystem::remove(path);
  EXPECT_TRUE(nets_identical(net, loaded));
  Eigen::VectorXd obs(kObsDim);
  obs << 1.0, -0.5, 0.2, 0.0, 0.3, -0.1, 0.7, 0.9;
  const PolicyEvalResult a = policy_eval(net, obs);
  const PolicyEvalResult b = policy_eval(loaded, obs);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.value, b.value);
}

// ---------------------------------------------------------------------------
// Reward
// ---------------------------------------------------------------------------

RewardWeights only(int term) {
  RewardWeights w;
  w.w_door = term == 0 ? 1.0 : 0.0;
  w.w_ori = term == 1 ? 1.0 : 0.0;
  w.w_dist = term == 2 ? 1.0 : 0.0;
  w.w_log_dist = term == 3 ? 1.0 : 0.0;
  w.w_slip = term == 4 ? 1.0 : 0.0;
  return w;
}

TEST(Reward, DoorTermIsAngleDelta) {
  const WorldConfig world;
  const DynParams phi;
  SimState prev, curr;
  prev.door_angle = 0.10;
  curr.door_angle = 0.11;
  curr.q = grasp_pose(world);
  prev.q = curr.q;
  EXPECT_NEAR(reward(prev, curr, 0.0, phi, world, only(0)), 0.01, 1e-15);

  RewardWeights scaled = only(0);
  scaled.w_door = 30.0;
  EXPECT_NEAR(reward(prev, curr, 0.0, phi, world, scaled), 0.3, 1e-13);
}

TEST(Reward, OrientationTermMeasuresTangentAlignment) {
  const WorldConfig world;
  const DynParams phi;
  SimState state;
  state.q = {0.3, 0.4};
  state.door_angle = 0.0;
  // Tangent direction at a closed door is -pi/2; heading is q1 + q2.
  const double expect = -std::abs(std::cos(0.7 + 3.14159265358979323846 / 2.0));
  EXPECT_NEAR(reward(state, state, 0.0, phi, world, only(1)), expect, 1e-15);
}

TEST(Reward, DistanceTermIsNegativeKnobDistance) {
  const WorldConfig world;
  const DynParams phi;
  SimState state;
  state.q = grasp_pose(world) + Eigen::Vector2d(0.1, -0.05);
  state.door_angle = 0.2;
  const double d =
      (knob_position(0.2, world) - forward_kinematics(state.q, world).position).norm();
  EXPECT_NEAR(reward(state, state, 0.0, phi, world, only(2)), -d, 1e-14);
}

TEST(Reward, LogDistanceTermAtContact) {
  const WorldConfig world;
  const DynParams phi;
  SimState state;
  state.q = grasp_pose(world);
  state.door_angle = 0.0;
  // d is numerically zero at the grasp pose, so the term is -log(1e-4).
  EXPECT_NEAR(reward(state, state, 0.0, phi, world, only(3)), 9.210340371976184, 1e-8);
}

TEST(Reward, SlipTermKicksInAboveEightyPercentOfTheCone) {
  const WorldConfig world;
  const DynParams phi;  // slide_friction 1.2, grip 20 N -> limit 24 N
  SimState state;
  state.q = grasp_pose(world);
  const double limit = phi.slide_friction * world.grip_force;
  EXPECT_EQ(reward(state, state, 0.5 * limit, phi, world, only(4)), 0.0);
  EXPECT_NEAR(reward(state, state, 0.9 * limit, phi, world, only(4)), -0.1, 1e-12);
  EXPECT_NEAR(reward(state, state, 1.2 * limit, phi, world, only(4)), -0.4, 1e-12);
}

TEST(Reward, DistanceTermsDropAboveSwitchAngle) {
  const WorldConfig world;
  const DynParams phi;
  const RewardWeights w;  // defaults
  SimState prev;
  prev.door_angle = 0.69;
  prev.q = grasp_pose(world);

  // Vary q1 holding q1 + q2: heading (and so r_ori) is fixed while the end
  // effector sweeps a circle, changing the knob distance.
  Rng rng(11);
  const double heading = 0.9;
  auto state_at = [&](double q1) {
    SimState s;
    s.q = {q1, heading - q1};
    s.door_angle = 0.70;  // above the 30 degree switch
    return s;
  };
  const double base = reward(prev, state_at(0.2), 5.0, phi, world, w);
  for (int i = 0; i < 200; ++i) {
    const double q1 = rng.uniform(-1.0, 1.0);
    EXPECT_NEAR(reward(prev, state_at(q1), 5.0, phi, world, w), base, 1e-12);
  }

  // Below the switch the same sweep has to move the reward.
  auto low_state_at = [&](double q1) {
    SimState s;
    s.q = {q1, heading - q1};
    s.door_angle = 0.20;
    return s;
  };
  double lo = 1e300, hi = -1e300;
  for (int i = 0; i < 200; ++i) {
    const double r = reward(prev, low_state_at(rng.uniform(-1.0, 1.0)), 5.0, phi, world, w);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  EXPECT_GT(hi - lo, 1e-6);
}

TEST(Reward, WeightValidation) {
  RewardWeights w;
  w.switch_angle = 3.2;
  EXPECT_THROW(validate_reward_weights(w), InvalidConfigError);
  w = RewardWeights{};
  w.w_slip = std::numeric_limits<double>::infinity();
  EXPECT_THROW(validate_reward_weights(w), InvalidConfigError);
}

// ---------------------------------------------------------------------------
// Environment reset and step
// ---------------------------------------------------------------------------

TEST(EnvReset, FixedParamsPassThroughExactly) {
  const WorldConfig world;
  DynParams phi;
  phi.door_damping = 0.77;
  const EnvResetResult r = env_reset(phi, world, 5);
  EXPECT_EQ(dyn_params_to_vector(r.phi), dyn_params_to_vector(phi));
}

TEST(EnvReset, DeterministicGivenSeed) {
  const WorldConfig world;
  const ParamDistribution dist = default_init_distribution();
  const EnvResetResult a = env_reset(dist, world, 99);
  const EnvResetResult b = env_reset(dist, world, 99);
  EXPECT_EQ(a.state.q, b.state.q);
  EXPECT_EQ(a.state.door_angle, b.state.door_angle);
  EXPECT_EQ(dyn_params_to_vector(a.phi), dyn_params_to_vector(b.phi));
  EXPECT_EQ(a.obs.to_vector(), b.obs.to_vector());
}

TEST(EnvReset, SeedsChangeTheJitter) {
  const WorldConfig world;
  const DynParams phi;
  const EnvResetResult a = env_reset(phi, world, 1);
  const EnvResetResult b = env_reset(phi, world, 2);
  EXPECT_NE(a.state.q, b.state.q);
}

TEST(EnvReset, NearZeroCovarianceRecoversTheMean) {
  const WorldConfig world;
  ParamDistribution dist = default_init_distribution();
  dist.covariance = 1e-16 * Eigen::MatrixXd::Identity(kNumDynParams, kNumDynParams);
  const EnvResetResult r = env_reset(dist, world, 7);
  EXPECT_LT((dyn_params_to_vector(r.phi) - dist.mean).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(EnvReset, HopelessPositivityThrows) {
  const WorldConfig world;
  ParamDistribution dist = default_init_distribution();
  dist.mean[0] = -10.0;
  dist.covariance = 1e-12 * Eigen::MatrixXd::Identity(kNumDynParams, kNumDynParams);
  EXPECT_THROW(env_reset(dist, world, 7), InfeasibleDistributionError);
}

TEST(EnvReset, GraspSpringStartsUnloaded) {
  const WorldConfig world;
  const DynParams phi;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const EnvResetResult r = env_reset(phi, world, seed);
    ASSERT_TRUE(r.state.grasped);
    const StepResult sr = step(r.state, r.state.q, Eigen::Vector2d::Zero(), phi, world);
    EXPECT_LT(sr.coupling_force, 1e-6) << "seed " << seed;
    EXPECT_GE(r.state.door_angle, kDoorAngleMin);
    EXPECT_LE(r.state.door_angle, kDoorAngleMax);
  }
}

TEST(EnvReset, ObservationMatchesState) {
  const WorldConfig world;
  const DynParams phi;
  const EnvResetResult r = env_reset(phi, world, 12);
  const Eigen::VectorXd v = r.obs.to_vector();
  EXPECT_EQ(v[0], r.state.q[0]);
  EXPECT_EQ(v[1], r.state.q[1]);
  EXPECT_EQ(v[6], r.state.door_angle);
  const Eigen::Vector2d knob_rel = knob_position(r.state.door_angle, world) -
                                   forward_kinematics(r.state.q, world).position;
  EXPECT_NEAR(v[4], knob_rel[0], 1e-15);
  EXPECT_NEAR(v[5], knob_rel[1], 1e-15);
}

TEST(EnvStep, ZeroActionAtEquilibriumHoldsStill) {
  const WorldConfig world;
  DynParams phi;
  phi.door_stiffness = 0.0;
  const RewardWeights w;
  const EnvResetResult r = env_reset(phi, world, 4);
  const EnvStepResult sr = env_step(r.state, phi, Eigen::Vector2d::Zero(), world, w);
  EXPECT_NEAR(sr.state.door_angle, r.state.door_angle, 1e-9);
  EXPECT_FALSE(sr.done);
}

TEST(EnvStep, ReturnedRewardMatchesTheRewardFunction) {
  const WorldConfig world;
  const DynParams phi;
  const RewardWeights w;
  const EnvResetResult r = env_reset(phi, world, 8);
  const Eigen::Vector2d action(0.03, -0.02);
  const EnvStepResult sr = env_step(r.state, phi, action, world, w);
  ASSERT_FALSE(sr.done);
  EXPECT_EQ(sr.reward, reward(r.state, sr.state, sr.coupling_force, phi, world, w));
}

TEST(EnvStep, ActionsAreClampedOnEntry) {
  const WorldConfig world;
  const DynParams phi;
  const RewardWeights w;
  const EnvResetResult r = env_reset(phi, world, 8);
  const EnvStepResult big = env_step(r.state, phi, Eigen::Vector2d(10.0, -10.0), world, w);
  const EnvStepResult clamped =
      env_step(r.state, phi, Eigen::Vector2d(kActionLimit, -kActionLimit), world, w);
  EXPECT_EQ(big.state.q, clamped.state.q);
  EXPECT_EQ(big.reward, clamped.reward);
}

TEST(EnvStep, SlipTerminatesWithPenalty) {
  const WorldConfig world;
  DynParams phi;
  phi.slide_friction = 0.01;  // 0.2 N cone, any brisk pull slips
  const RewardWeights w;
  const EnvResetResult r = env_reset(phi, world, 8);
  const EnvStepResult sr = env_step(r.state, phi, Eigen::Vector2d(-0.05, 0.05), world, w);
  ASSERT_TRUE(sr.done);
  EXPECT_TRUE(sr.grasp_lost);
  EXPECT_FALSE(sr.state.grasped);
  EXPECT_EQ(sr.reward,
            reward(r.state, sr.state, sr.coupling_force, phi, world, w) + kSlipTerminalReward);
}

TEST(EnvStep, ScriptedArcPullOpensTheDoorMonotonically) {
  const WorldConfig world;
  DynParams phi;
  phi.slide_friction = 3.0;
  phi.door_damping = 0.1;
  phi.door_stiffness = 0.0;
  const RewardWeights w;
  const EnvResetResult r = env_reset(phi, world, 3);
  SimState s = r.state;
  std::vector<double> angles{s.door_angle};
  for (int t = 0; t < 10; ++t) {
    const double target = s.door_angle + 0.02;
    const Eigen::Vector2d q_want = inverse_kinematics(knob_position(target, world), 1, world);
    const EnvStepResult sr = env_step(s, phi, q_want - s.q, world, w);
    ASSERT_FALSE(sr.grasp_lost) << "slipped at control step " << t;
    s = sr.state;
    angles.push_back(s.door_angle);
  }
  for (std::size_t t = 0; t + 1 < angles.size(); ++t)
    EXPECT_GT(angles[t + 1], angles[t]) << "stalled at control step " << t;
}

TEST(EnvStep, OpeningPastThresholdEndsTheEpisode) {
  const WorldConfig world;
  DynParams phi;
  phi.slide_friction = 3.0;
  phi.door_damping = 0.1;
  phi.door_stiffness = 0.0;
  const RewardWeights w;
  const EnvResetResult r = env_reset(phi, world, 3);
  SimState s = r.state;
  bool opened = false;
  for (int t = 0; t < 900 && !opened; ++t) {
    const double target = s.door_angle + 0.02;
    const Eigen::Vector2d q_want = inverse_kinematics(knob_position(target, world), 1, world);
    const EnvStepResult sr = env_step(s, phi, q_want - s.q, world, w);
    ASSERT_FALSE(sr.grasp_lost);
    s = sr.state;
    opened = sr.opened;
    if (sr.opened) EXPECT_TRUE(sr.done);
  }
  EXPECT_TRUE(opened);
  EXPECT_GE(s.door_angle, kDoorOpenAngle);
}

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

TEST(TrainPolicy, ZeroUpdatesReturnsInitialNet) {
  const WorldConfig world;
  const DynParams phi;
  const RewardWeights w;
  PpoConfig cfg;
  cfg.total_updates = 0;
  const TrainResult r = train_policy(phi, world, w, cfg);
  EXPECT_TRUE(r.curve.empty());
  EXPECT_EQ(r.net.obs_mean, Eigen::VectorXd::Zero(kObsDim));
  EXPECT_EQ(r.net.obs_std, Eigen::VectorXd::Ones(kObsDim));
  EXPECT_GT(r.net.actor.weights[0].cwiseAbs().maxCoeff(), 0.0);
}

TEST(TrainPolicy, ShortRunIsBitwiseReproducible) {
  const WorldConfig world;
  const DynParams phi;
  const RewardWeights w;
  PpoConfig cfg;
  cfg.total_updates = 2;
  cfg.rollout_episodes_per_update = 2;
  cfg.horizon = 24;
  cfg.minibatch = 16;
  cfg.epochs_per_update = 2;
  cfg.seed = 123;
  const TrainResult a = train_policy(phi, world, w, cfg);
  const TrainResult b = train_policy(phi, world, w, cfg);
  ASSERT_EQ(a.curve.size(), b.curve.size());
  for (std::size_t i = 0; i < a.curve.size(); ++i) {
    EXPECT_EQ(a.curve[i].mean_return, b.curve[i].mean_return);
    EXPECT_EQ(a.curve[i].success_rate, b.curve[i].success_rate);
    EXPECT_EQ(a.curve[i].clip_frac, b.curve[i].clip_frac);
  }
  EXPECT_TRUE(nets_identical(a.net, b.net));
}

TEST(TrainPolicy, SeedChangesTheRun) {
  const WorldConfig world;
  const DynParams phi;
  const RewardWeights w;
  PpoConfig cfg;
  cfg.total_updates = 1;
  cfg.rollout_episodes_per_update = 2;
  cfg.horizon = 16;
  cfg.minibatch = 16;
  cfg.epochs_per_update = 1;
  cfg.seed = 1;
  const TrainResult a = train_policy(phi, world, w, cfg);
  cfg.seed = 2;
  const TrainResult b = train_policy(phi, world, w, cfg);
  EXPECT_FALSE(nets_identical(a.net, b.net));
}

TEST(TrainPolicy, DistributionSourceSamplesFreshDynamics) {
  const WorldConfig world;
  const RewardWeights w;
  PpoConfig cfg;
  cfg.total_updates = 1;
  cfg.rollout_episodes_per_update = 2;
  cfg.horizon = 8;
  cfg.minibatch = 8;
  cfg.epochs_per_update = 1;
  const TrainResult r = train_policy(default_init_distribution(), world, w, cfg);
  EXPECT_EQ(r.curve.size(), 1u);
  EXPECT_TRUE(std::isfinite(r.curve[0].mean_return));
}

TEST(TrainPolicy, ObservationStatsAreUpdatedFromRollouts) {
  const WorldConfig world;
  const DynParams phi;
  const RewardWeights w;
  PpoConfig cfg;
  cfg.total_updates = 1;
  cfg.rollout_episodes_per_update = 2;
  cfg.horizon = 16;
  cfg.minibatch = 16;
  cfg.epochs_per_update = 1;
  const TrainResult r = train_policy(phi, world, w, cfg);
  EXPECT_NE(r.net.obs_mean, Eigen::VectorXd::Zero(kObsDim));
  EXPECT_TRUE((r.net.obs_std.array() > 0.0).all());
}

TEST(CurveCsv, HeaderAndRows) {
  std::vector<CurvePoint> curve(2);
  curve[0] = {0, -1.5, 0.0, 0.25};
  curve[1] = {1, 2.0, 0.5, 0.125};
  const std::string csv = curve_to_csv(curve);
  EXPECT_EQ(csv, "update,mean_return,success_rate,clip_frac\n0,-1.5,0,0.25\n1,2,0.5,0.125\n");
}

}  // namespace
}  // namespace droid
