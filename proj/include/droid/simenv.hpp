#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "droid/errors.hpp"
#include "droid/rng.hpp"
#include "droid/util.hpp"

namespace droid {

/// Dynamics parameters of the door + arm joints: the vector phi that
/// identification estimates (8 scalars; joint_damping has one entry per arm joint).
struct DynParams {
  double door_mass = 1.5;           // kg
  double knob_mass = 0.3;           // kg
  double door_friction_loss = 0.1;  // N*m, Coulomb
  double door_stiffness = 0.02;     // N*m/rad
  double door_damping = 0.5;        // N*m*s/rad
  Eigen::Vector2d joint_damping{12.0, 0.6};  // N*m*s/rad
  double slide_friction = 1.2;      // dimensionless
};

constexpr int kNumDynParams = 8;

inline const std::array<const char*, kNumDynParams>& dyn_param_names() {
  static const std::array<const char*, kNumDynParams> names = {
      "door_mass",     "knob_mass",       "door_friction_loss", "door_stiffness",
      "door_damping",  "joint_damping_1", "joint_damping_2",    "slide_friction"};
  return names;
}

inline Eigen::VectorXd dyn_params_to_vector(const DynParams& p) {
  Eigen::VectorXd v(kNumDynParams);
  v << p.door_mass, p.knob_mass, p.door_friction_loss, p.door_stiffness, p.door_damping,
      p.joint_damping[0], p.joint_damping[1], p.slide_friction;
  return v;
}

inline DynParams dyn_params_from_vector(const Eigen::VectorXd& v) {
  if (v.size() != kNumDynParams)
    throw InvalidInputError("dyn_params_from_vector: expected 8 entries");
  DynParams p;
  p.door_mass = v[0];
  p.knob_mass = v[1];
  p.door_friction_loss = v[2];
  p.door_stiffness = v[3];
  p.door_damping = v[4];
  p.joint_damping = {v[5], v[6]};
  p.slide_friction = v[7];
  return p;
}

/// Fixed world: geometry, controller gains, grasp model, integration step.
struct WorldConfig {
  Eigen::Vector2d link_lengths{0.5, 0.5};   // m
  Eigen::Vector2d link_masses{1.0, 1.0};    // kg, point masses at link tips
  Eigen::Vector2d hinge_position{0.8, 0.3}; // m, door hinge in the arm base frame
  double knob_radius = 0.4;                 // m, lever arm r
  Eigen::Vector2d pd_kp{200.0, 200.0};      // N*m/rad
  Eigen::Vector2d pd_kd{20.0, 20.0};        // N*m*s/rad
  double grip_force = 20.0;                 // N
  double coupling_stiffness = 5000.0;       // N/m
  double coupling_damping = 50.0;           // N*s/m
  double dt = 0.001;                        // s
  double noise_std = 0.05;                  // N*m, torque sensor noise ("real" rollouts only)
};

/// Bearing from hinge to knob at door_angle = 0; the knob sweeps
/// hinge + r*(cos(pi + lambda), sin(pi + lambda)) as the door opens.
constexpr double kKnobHomeBearing = 3.14159265358979323846;

struct SimState {
  Eigen::Vector2d q{0.0, 0.0};
  Eigen::Vector2d qdot{0.0, 0.0};
  double door_angle = 0.0;  // lambda, rad
  double door_rate = 0.0;   // rad/s
  bool grasped = true;
  double time = 0.0;
};

constexpr double kDoorAngleMin = -0.1;
constexpr double kDoorAngleMax = 3.14159265358979323846 / 2.0 + 0.1;

struct Trajectory {
  double dt = 0.0;
  std::vector<Eigen::Vector2d> q_desired;
  std::vector<Eigen::Vector2d> q_actual;
  std::vector<Eigen::Vector2d> torque;
  std::vector<double> door_angle;
  bool failed = false;
  std::uint64_t seed = 0;  // noise seed used, 0 if noise-free
};

inline void validate_dyn_params(const DynParams& p) {
  const Eigen::VectorXd v = dyn_params_to_vector(p);
  for (int i = 0; i < kNumDynParams; ++i) {
    if (!std::isfinite(v[i]) || v[i] < 0.0)
      throw InvalidConfigError(std::string("phi.") + dyn_param_names()[static_cast<std::size_t>(i)] +
                               " must be finite and >= 0");
  }
  if (p.door_mass <= 0.0) throw InvalidConfigError("phi.door_mass must be > 0");
}

inline void validate_world(const WorldConfig& w) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw InvalidConfigError(std::string("world.") + what);
  };
  require(w.link_lengths.minCoeff() > 0.0, "link_lengths must be > 0");
  require(w.link_masses.minCoeff() > 0.0, "link_masses must be > 0");
  require(w.knob_radius > 0.0, "knob_radius must be > 0");
  require(w.pd_kp.minCoeff() >= 0.0, "pd_kp must be >= 0");
  require(w.pd_kd.minCoeff() >= 0.0, "pd_kd must be >= 0");
  require(w.grip_force >= 0.0, "grip_force must be >= 0");
  require(w.coupling_stiffness >= 0.0, "coupling_stiffness must be >= 0");
  require(w.coupling_damping >= 0.0, "coupling_damping must be >= 0");
  require(w.dt > 0.0, "dt must be > 0");
  require(w.noise_std >= 0.0, "noise_std must be >= 0");
  require(w.hinge_position.allFinite(), "hinge_position must be finite");
}

// ---------------------------------------------------------------------------
// Kinematics
// ---------------------------------------------------------------------------

struct FkResult {
  Eigen::Vector2d position;
  double heading;
};

inline FkResult forward_kinematics(const Eigen::Vector2d& q, const WorldConfig& world) {
  const double l1 = world.link_lengths[0], l2 = world.link_lengths[1];
  const double c1 = std::cos(q[0]), s1 = std::sin(q[0]);
  const double c12 = std::cos(q[0] + q[1]), s12 = std::sin(q[0] + q[1]);
  return {Eigen::Vector2d(l1 * c1 + l2 * c12, l1 * s1 + l2 * s12), q[0] + q[1]};
}

inline Eigen::Matrix2d jacobian(const Eigen::Vector2d& q, const WorldConfig& world) {
  const double l1 = world.link_lengths[0], l2 = world.link_lengths[1];
  const double s1 = std::sin(q[0]), c1 = std::cos(q[0]);
  const double s12 = std::sin(q[0] + q[1]), c12 = std::cos(q[0] + q[1]);
  Eigen::Matrix2d j;
  j << -l1 * s1 - l2 * s12, -l2 * s12, l1 * c1 + l2 * c12, l2 * c12;
  return j;
}

inline Eigen::Vector2d inverse_kinematics(const Eigen::Vector2d& target, int elbow_sign,
                                          const WorldConfig& world) {
  const double l1 = world.link_lengths[0], l2 = world.link_lengths[1];
  const double r2 = target.squaredNorm();
  const double reach = l1 + l2, inner = std::abs(l1 - l2);
  double c2 = (r2 - l1 * l1 - l2 * l2) / (2.0 * l1 * l2);
  if (c2 > 1.0 + 1e-9 || c2 < -1.0 - 1e-9 || r2 > reach * reach + 1e-9 ||
      r2 < inner * inner - 1e-9)
    throw OutOfWorkspaceError("inverse_kinematics: target out of reach");
  c2 = std::clamp(c2, -1.0, 1.0);
  const double s2 = (elbow_sign >= 0 ? 1.0 : -1.0) * std::sqrt(std::max(0.0, 1.0 - c2 * c2));
  const double q2 = std::atan2(s2, c2);
  const double q1 =
      std::atan2(target[1], target[0]) - std::atan2(l2 * s2, l1 + l2 * c2);
  return {q1, q2};
}

// ---------------------------------------------------------------------------
// Door geometry
// ---------------------------------------------------------------------------

inline Eigen::Vector2d knob_position(double door_angle, const WorldConfig& world) {
  const double a = kKnobHomeBearing + door_angle;
  return world.hinge_position + world.knob_radius * Eigen::Vector2d(std::cos(a), std::sin(a));
}

/// Unit tangent of the knob arc (direction of knob motion for increasing angle).
inline Eigen::Vector2d knob_tangent(double door_angle) {
  const double a = kKnobHomeBearing + door_angle;
  return {-std::sin(a), std::cos(a)};
}

inline Eigen::Vector2d knob_velocity(double door_angle, double door_rate,
                                     const WorldConfig& world) {
  return world.knob_radius * door_rate * knob_tangent(door_angle);
}

/// Inverts knob_position: the door angle whose knob sits at `p` (arc-projected).
inline double door_angle_of_point(const Eigen::Vector2d& p, const WorldConfig& world) {
  const Eigen::Vector2d rel = p - world.hinge_position;
  double a = std::atan2(rel[1], rel[0]) - kKnobHomeBearing;
  while (a > 3.14159265358979323846) a -= 2.0 * 3.14159265358979323846;
  while (a < -3.14159265358979323846) a += 2.0 * 3.14159265358979323846;
  return a;
}

inline double door_inertia(const DynParams& p, const WorldConfig& world) {
  const double r = world.knob_radius;
  return p.door_mass * r * r / 3.0 + p.knob_mass * r * r;
}

/// Initial grasp pose: end effector on the closed-door knob.
inline Eigen::Vector2d grasp_pose(const WorldConfig& world, int elbow_sign = 1) {
  return inverse_kinematics(knob_position(0.0, world), elbow_sign, world);
}

// ---------------------------------------------------------------------------
// Arm dynamics (point masses at link tips, horizontal plane, no gravity)
// ---------------------------------------------------------------------------

inline Eigen::Matrix2d mass_matrix(const Eigen::Vector2d& q, const WorldConfig& world) {
  const double l1 = world.link_lengths[0], l2 = world.link_lengths[1];
  const double m1 = world.link_masses[0], m2 = world.link_masses[1];
  const double c2 = std::cos(q[1]);
  Eigen::Matrix2d m;
  const double m12 = m2 * (l2 * l2 + l1 * l2 * c2);
  m << m1 * l1 * l1 + m2 * (l1 * l1 + l2 * l2 + 2.0 * l1 * l2 * c2), m12, m12, m2 * l2 * l2;
  return m;
}

/// Coriolis/centrifugal torque vector c(q, qdot).
inline Eigen::Vector2d coriolis_vector(const Eigen::Vector2d& q, const Eigen::Vector2d& qdot,
                                       const WorldConfig& world) {
  const double h =
      world.link_masses[1] * world.link_lengths[0] * world.link_lengths[1] * std::sin(q[1]);
  return {-h * qdot[1] * (2.0 * qdot[0] + qdot[1]), h * qdot[0] * qdot[0]};
}

/// Arm kinetic + door kinetic energy (no spring/potential terms).
inline double kinetic_energy(const SimState& s, const DynParams& p, const WorldConfig& world) {
  const double arm = 0.5 * s.qdot.dot(mass_matrix(s.q, world) * s.qdot);
  const double door = 0.5 * door_inertia(p, world) * s.door_rate * s.door_rate;
  return arm + door;
}

// ---------------------------------------------------------------------------
// Stepping
// ---------------------------------------------------------------------------

struct StepResult {
  SimState state;
  Eigen::Vector2d torque;       // commanded PD torque = sensed torque
  double coupling_force = 0.0;  // |F_c| before any slip this step
};

/// One semi-implicit Euler step at world.dt. The grasp is a penalty
/// spring-damper between the end effector and the knob; slipping (|F_c|
/// beyond the friction cone) drops the grasp permanently after the force has
/// acted for this step.
inline StepResult step(const SimState& state, const Eigen::Vector2d& q_des,
                       const Eigen::Vector2d& qdot_des, const DynParams& phi,
                       const WorldConfig& world) {
  const double dt = world.dt;
  const Eigen::Vector2d tau_cmd = world.pd_kp.cwiseProduct(q_des - state.q) +
                                  world.pd_kd.cwiseProduct(qdot_des - state.qdot);

  const Eigen::Matrix2d jac = jacobian(state.q, world);
  Eigen::Vector2d coupling_force = Eigen::Vector2d::Zero();
  bool slipped = false;
  if (state.grasped) {
    const Eigen::Vector2d p_ee = forward_kinematics(state.q, world).position;
    const Eigen::Vector2d v_ee = jac * state.qdot;
    const Eigen::Vector2d p_knob = knob_position(state.door_angle, world);
    const Eigen::Vector2d v_knob = knob_velocity(state.door_angle, state.door_rate, world);
    coupling_force = world.coupling_stiffness * (p_knob - p_ee) +
                     world.coupling_damping * (v_knob - v_ee);
    slipped = coupling_force.norm() > phi.slide_friction * world.grip_force;
  }

  const Eigen::Vector2d rhs = tau_cmd - coriolis_vector(state.q, state.qdot, world) -
                              phi.joint_damping.cwiseProduct(state.qdot) +
                              jac.transpose() * coupling_force;
  const Eigen::Vector2d qddot = mass_matrix(state.q, world).ldlt().solve(rhs);

  SimState next = state;
  next.qdot = state.qdot + dt * qddot;
  next.q = state.q + dt * next.qdot;

  double door_torque = 0.0;
  if (state.grasped) {
    // Reaction -F_c acts on the knob; tangential component times lever arm.
    door_torque = world.knob_radius * knob_tangent(state.door_angle).dot(-coupling_force);
  }
  const double ddot =
      (door_torque - phi.door_damping * state.door_rate - phi.door_stiffness * state.door_angle -
       phi.door_friction_loss * std::tanh(state.door_rate / 0.01)) /
      door_inertia(phi, world);
  next.door_rate = state.door_rate + dt * ddot;
  next.door_angle = state.door_angle + dt * next.door_rate;
  if (next.door_angle < kDoorAngleMin) {
    next.door_angle = kDoorAngleMin;
    next.door_rate = 0.0;
  } else if (next.door_angle > kDoorAngleMax) {
    next.door_angle = kDoorAngleMax;
    next.door_rate = 0.0;
  }

  next.grasped = state.grasped && !slipped;
  next.time = state.time + dt;

  if (!next.q.allFinite() || !next.qdot.allFinite() || !std::isfinite(next.door_angle) ||
      !std::isfinite(next.door_rate))
    throw SimulationDivergedError("step: non-finite state");
  return {next, tau_cmd, coupling_force.norm()};
}

// ---------------------------------------------------------------------------
// Demonstration synthesis
// ---------------------------------------------------------------------------

/// Minimum-jerk time scaling s(u) = 10u^3 - 15u^4 + 6u^5.
inline double min_jerk(double u) {
  const double u3 = u * u * u;
  return 10.0 * u3 - 15.0 * u3 * u + 6.0 * u3 * u * u;
}

/// Joint-space demonstration: knob-arc waypoints for the door swinging 0 ->
/// angle_target under a minimum-jerk profile, converted through IK on a fixed
/// elbow branch.
inline std::vector<Eigen::Vector2d> synth_demo(const WorldConfig& world, double angle_target,
                                               double duration, int elbow_sign = 1) {
  if (duration <= 0.0) throw InvalidConfigError("synth_demo: duration must be > 0");
  const int n = static_cast<int>(std::lround(duration / world.dt));
  if (n < 2) throw InvalidConfigError("synth_demo: duration too short for dt");
  std::vector<Eigen::Vector2d> waypoints;
  waypoints.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double u = static_cast<double>(k) / static_cast<double>(n - 1);
    const double angle = angle_target * min_jerk(u);
    waypoints.push_back(inverse_kinematics(knob_position(angle, world), elbow_sign, world));
  }
  return waypoints;
}

// ---------------------------------------------------------------------------
// Playback
// ---------------------------------------------------------------------------

/// Replays a desired joint trajectory from the closed-door grasp pose.
/// failed = grasp lost, or the door reached less than half of the demanded
/// final angle. With a noise seed, Gaussian noise (world.noise_std) is added
/// to the recorded torques only; the dynamics stay deterministic.
inline Trajectory playback(const std::vector<Eigen::Vector2d>& q_desired, const DynParams& phi,
                           const WorldConfig& world,
                           std::optional<std::uint64_t> noise_seed = std::nullopt) {
  if (q_desired.empty()) throw InvalidInputError("playback: q_desired must be non-empty");
  const std::size_t n = q_desired.size();
  const double dt = world.dt;

  SimState state;
  state.q = q_desired.front();
  state.grasped = true;

  Trajectory traj;
  traj.dt = dt;
  traj.q_desired = q_desired;
  traj.q_actual.reserve(n);
  traj.torque.reserve(n);
  traj.door_angle.reserve(n);
  traj.seed = noise_seed.value_or(0);

  std::optional<Rng> noise;
  if (noise_seed) noise.emplace(*noise_seed);

  bool grasp_lost = false;
  for (std::size_t k = 0; k < n; ++k) {
    const Eigen::Vector2d qdot_des =
        k + 1 < n ? ((q_desired[k + 1] - q_desired[k]) / dt).eval() : Eigen::Vector2d::Zero().eval();
    StepResult res = step(state, q_desired[k], qdot_des, phi, world);
    state = res.state;
    if (!state.grasped) grasp_lost = true;
    Eigen::Vector2d tau = res.torque;
    if (noise) {
      tau[0] += noise->gaussian(0.0, world.noise_std);
      tau[1] += noise->gaussian(0.0, world.noise_std);
    }
    traj.q_actual.push_back(state.q);
    traj.torque.push_back(tau);
    traj.door_angle.push_back(state.door_angle);
  }

  const double target_angle =
      door_angle_of_point(forward_kinematics(q_desired.back(), world).position, world);
  traj.failed = grasp_lost || traj.door_angle.back() < 0.5 * target_angle;
  return traj;
}

/// `count` noisy reference rollouts sharing one underlying torque signal,
/// with noise seeds base_seed .. base_seed+count-1.
inline std::vector<Trajectory> gen_real_rollouts(const std::vector<Eigen::Vector2d>& q_desired,
                                                 const DynParams& phi_true,
                                                 const WorldConfig& world, int count,
                                                 std::uint64_t base_seed) {
  if (count < 1) throw InvalidInputError("gen_real_rollouts: count must be >= 1");
  std::vector<Trajectory> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    out.push_back(playback(q_desired, phi_true, world, base_seed + static_cast<std::uint64_t>(i)));
  return out;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline json dyn_params_to_json(const DynParams& p) {
  return json{{"door_mass_kg", p.door_mass},
              {"knob_mass_kg", p.knob_mass},
              {"door_friction_loss_Nm", p.door_friction_loss},
              {"door_stiffness_Nm_per_rad", p.door_stiffness},
              {"door_damping_Nms_per_rad", p.door_damping},
              {"joint_damping_Nms_per_rad", {p.joint_damping[0], p.joint_damping[1]}},
              {"slide_friction_coeff", p.slide_friction}};
}

inline DynParams dyn_params_from_json(const json& j) {
  DynParams p;
  p.door_mass = j.at("door_mass_kg").get<double>();
  p.knob_mass = j.at("knob_mass_kg").get<double>();
  p.door_friction_loss = j.at("door_friction_loss_Nm").get<double>();
  p.door_stiffness = j.at("door_stiffness_Nm_per_rad").get<double>();
  p.door_damping = j.at("door_damping_Nms_per_rad").get<double>();
  const auto jd = j.at("joint_damping_Nms_per_rad").get<std::vector<double>>();
  if (jd.size() != 2) throw InvalidInputError("joint_damping_Nms_per_rad must have 2 entries");
  p.joint_damping = {jd[0], jd[1]};
  p.slide_friction = j.at("slide_friction_coeff").get<double>();
  return p;
}

inline json world_to_json(const WorldConfig& w) {
  return json{{"link_lengths_m", {w.link_lengths[0], w.link_lengths[1]}},
              {"link_masses_kg", {w.link_masses[0], w.link_masses[1]}},
              {"hinge_position_m", {w.hinge_position[0], w.hinge_position[1]}},
              {"knob_radius_m", w.knob_radius},
              {"pd_kp_Nm_per_rad", {w.pd_kp[0], w.pd_kp[1]}},
              {"pd_kd_Nms_per_rad", {w.pd_kd[0], w.pd_kd[1]}},
              {"grip_force_N", w.grip_force},
              {"coupling_stiffness_N_per_m", w.coupling_stiffness},
              {"coupling_damping_Ns_per_m", w.coupling_damping},
              {"dt_s", w.dt},
              {"noise_std_Nm", w.noise_std}};
}

inline WorldConfig world_from_json(const json& j) {
  WorldConfig w;
  auto vec2 = [&](const char* key) {
    const auto v = j.at(key).get<std::vector<double>>();
    if (v.size() != 2) throw InvalidInputError(std::string(key) + " must have 2 entries");
    return Eigen::Vector2d(v[0], v[1]);
  };
  w.link_lengths = vec2("link_lengths_m");
  w.link_masses = vec2("link_masses_kg");
  w.hinge_position = vec2("hinge_position_m");
  w.knob_radius = j.at("knob_radius_m").get<double>();
  w.pd_kp = vec2("pd_kp_Nm_per_rad");
  w.pd_kd = vec2("pd_kd_Nms_per_rad");
  w.grip_force = j.at("grip_force_N").get<double>();
  w.coupling_stiffness = j.at("coupling_stiffness_N_per_m").get<double>();
  w.coupling_damping = j.at("coupling_damping_Ns_per_m").get<double>();
  w.dt = j.at("dt_s").get<double>();
  w.noise_std = j.at("noise_std_Nm").get<double>();
  return w;
}

inline std::string world_hash(const WorldConfig& w) { return fnv1a64_hex(world_to_json(w).dump()); }

inline std::string dyn_params_hash(const DynParams& p) {
  return fnv1a64_hex(dyn_params_to_json(p).dump());
}

/// CSV (t,qd1,qd2,q1,q2,tau1,tau2,lambda) plus a sidecar JSON next to it with
/// {dt, failed, seed, world_hash, params_hash}.
inline void save_trajectory(const Trajectory& traj, const WorldConfig& world,
                            const DynParams& phi, const std::filesystem::path& csv_path) {
  std::string out = "t,qd1,qd2,q1,q2,tau1,tau2,lambda\n";
  for (std::size_t k = 0; k < traj.q_desired.size(); ++k) {
    out += format_double(static_cast<double>(k) * traj.dt);
    out += ',';
    out += format_double(traj.q_desired[k][0]);
    out += ',';
    out += format_double(traj.q_desired[k][1]);
    out += ',';
    out += format_double(traj.q_actual[k][0]);
    out += ',';
    out += format_double(traj.q_actual[k][1]);
    out += ',';
    out += format_double(traj.torque[k][0]);
    out += ',';
    out += format_double(traj.torque[k][1]);
    out += ',';
    out += format_double(traj.door_angle[k]);
    out += '\n';
  }
  write_text_file(csv_path, out);
  json sidecar{{"dt", traj.dt},
               {"failed", traj.failed},
               {"seed", traj.seed},
               {"world_hash", world_hash(world)},
               {"params_hash", dyn_params_hash(phi)}};
  std::filesystem::path json_path = csv_path;
  json_path.replace_extension(".json");
  write_json_file(json_path, sidecar);
}

inline Trajectory load_trajectory(const std::filesystem::path& csv_path) {
  const std::string text = read_text_file(csv_path);
  std::filesystem::path json_path = csv_path;
  json_path.replace_extension(".json");
  const json sidecar = read_json_file(json_path);

  Trajectory traj;
  traj.dt = sidecar.at("dt").get<double>();
  traj.failed = sidecar.at("failed").get<bool>();
  traj.seed = sidecar.at("seed").get<std::uint64_t>();

  std::size_t pos = text.find('\n');
  if (pos == std::string::npos) throw InvalidInputError("trajectory csv: missing header");
  if (text.substr(0, pos) != "t,qd1,qd2,q1,q2,tau1,tau2,lambda")
    throw InvalidInputError("trajectory csv: unexpected header");
  ++pos;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const auto fields = split_csv_line(std::string_view(text).substr(pos, end - pos));
    if (fields.size() != 8) throw InvalidInputError("trajectory csv: expected 8 columns");
    traj.q_desired.emplace_back(parse_double(fields[1]), parse_double(fields[2]));
    traj.q_actual.emplace_back(parse_double(fields[3]), parse_double(fields[4]));
    traj.torque.emplace_back(parse_double(fields[5]), parse_double(fields[6]));
    traj.door_angle.push_back(parse_double(fields[7]));
    pos = end + 1;
  }
  if (traj.q_desired.size() < 2) throw InvalidInputError("trajectory csv: too few rows");
  return traj;
}

}  // namespace droid
