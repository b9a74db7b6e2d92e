#pragma once
// Experiment orchestration: strict JSON config with defaults, the staged
// demo -> real -> identify -> train -> eval pipeline with an artifact
// manifest and directory lock, and the spring/pose variant study.

#include <array>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "droid/errors.hpp"
#include "droid/eval.hpp"
#include "droid/identify.hpp"
#include "droid/policy.hpp"
#include "droid/rl.hpp"
#include "droid/rng.hpp"
#include "droid/simenv.hpp"
#include "droid/util.hpp"

namespace droid {

// ---------------------------------------------------------------------------
// Experiment configuration
// ---------------------------------------------------------------------------

struct DemoConfig {
  double angle_target = 85.0 * 3.14159265358979323846 / 180.0;  // rad
  double duration = 8.0;                                        // s
  std::string pose = "A";  // "B" = opposite elbow branch

  int elbow_sign() const { return pose == "B" ? -1 : 1; }
};

struct EvalStageConfig {
  int episodes = 30;
  std::vector<double> offsets{0.0, 0.05, 0.10, 0.15};  // m on knob_radius
};

struct StageSeeds {
  std::uint64_t demo = 1;
  std::uint64_t real = 2;
  std::uint64_t identify = 3;
  std::uint64_t train = 4;
  std::uint64_t eval = 5;
};

inline std::vector<std::pair<std::string, DynParams>> default_variants(const DynParams& base) {
  DynParams spring1 = base;
  spring1.door_stiffness = base.door_stiffness + 0.4;
  DynParams spring2 = base;
  spring2.door_stiffness = base.door_stiffness + 0.8;
  return {{"spring1", spring1}, {"spring2", spring2}};
}

struct ExperimentConfig {
  WorldConfig world;
  DynParams phi_true;
  std::vector<std::pair<std::string, DynParams>> variants = default_variants(phi_true);
  ParamDistribution phi_init = default_init_distribution();
  IdentifyConfig identify;
  PpoConfig ppo;
  RewardWeights reward;
  DemoConfig demo;
  EvalStageConfig eval;
  StageSeeds seeds;
};

namespace detail {

inline void require_known_keys(const json& j, const std::string& scope,
                               std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : allowed)
      if (item.key() == key) known = true;
    if (!known) throw InvalidConfigError("unknown key " + scope + "." + item.key());
  }
}

inline const json& require_object(const json& j, const std::string& scope) {
  if (!j.is_object()) throw InvalidConfigError(scope + " must be a JSON object");
  return j;
}

inline double get_number(const json& j, const std::string& scope, const char* key,
                         double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number())
    throw InvalidConfigError(scope + "." + key + " must be a number");
  return j.at(key).get<double>();
}

inline int get_integer(const json& j, const std::string& scope, const char* key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer())
    throw InvalidConfigError(scope + "." + key + " must be an integer");
  return j.at(key).get<int>();
}

inline std::uint64_t get_seed(const json& j, const std::string& scope, const char* key,
                              std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<long long>() < 0))
    throw InvalidConfigError(scope + "." + key + " must be a non-negative integer");
  return v.get<std::uint64_t>();
}

inline Eigen::Vector2d get_vec2(const json& j, const std::string& scope, const char* key,
                                const Eigen::Vector2d& fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw InvalidConfigError(scope + "." + key + " must be an array of 2 numbers");
  return {v[0].get<double>(), v[1].get<double>()};
}

inline void check_field(bool ok, const std::string& scope, const char* key, const char* what) {
  if (!ok) throw InvalidConfigError(scope + "." + key + " " + what);
}

inline WorldConfig parse_world(const json& j, const std::string& scope) {
  require_object(j, scope);
  require_known_keys(j, scope,
                     {"link_lengths", "link_masses", "hinge_position", "knob_radius", "pd_kp",
                      "pd_kd", "grip_force", "coupling_stiffness", "coupling_damping", "dt",
                      "noise_std"});
  WorldConfig w;
  w.link_lengths = get_vec2(j, scope, "link_lengths", w.link_lengths);
  w.link_masses = get_vec2(j, scope, "link_masses", w.link_masses);
  w.hinge_position = get_vec2(j, scope, "hinge_position", w.hinge_position);
  w.knob_radius = get_number(j, scope, "knob_radius", w.knob_radius);
  w.pd_kp = get_vec2(j, scope, "pd_kp", w.pd_kp);
  w.pd_kd = get_vec2(j, scope, "pd_kd", w.pd_kd);
  w.grip_force = get_number(j, scope, "grip_force", w.grip_force);
  w.coupling_stiffness = get_number(j, scope, "coupling_stiffness", w.coupling_stiffness);
  w.coupling_damping = get_number(j, scope, "coupling_damping", w.coupling_damping);
  w.dt = get_number(j, scope, "dt", w.dt);
  w.noise_std = get_number(j, scope, "noise_std", w.noise_std);
  validate_world(w);  // messages already carry the world. prefix
  return w;
}

inline DynParams parse_phi(const json& j, const std::string& scope, const DynParams& base) {
  require_object(j, scope);
  require_known_keys(j, scope,
                     {"door_mass", "knob_mass", "door_friction_loss", "door_stiffness",
                      "door_damping", "joint_damping", "slide_friction"});
  DynParams p = base;
  p.door_mass = get_number(j, scope, "door_mass", p.door_mass);
  p.knob_mass = get_number(j, scope, "knob_mass", p.knob_mass);
  p.door_friction_loss = get_number(j, scope, "door_friction_loss", p.door_friction_loss);
  p.door_stiffness = get_number(j, scope, "door_stiffness", p.door_stiffness);
  p.door_damping = get_number(j, scope, "door_damping", p.door_damping);
  p.joint_damping = get_vec2(j, scope, "joint_damping", p.joint_damping);
  p.slide_friction = get_number(j, scope, "slide_friction", p.slide_friction);

  const Eigen::VectorXd v = dyn_params_to_vector(p);
  for (int i = 0; i < kNumDynParams; ++i)
    check_field(std::isfinite(v[i]) && v[i] >= 0.0, scope,
                dyn_param_names()[static_cast<std::size_t>(i)], "must be finite and >= 0");
  check_field(p.door_mass > 0.0, scope, "door_mass", "must be > 0");
  return p;
}

inline ParamDistribution parse_phi_init(const json& j, const std::string& scope) {
  require_object(j, scope);
  require_known_keys(j, scope, {"mean", "std"});
  ParamDistribution d = default_init_distribution();
  Eigen::VectorXd std_dev = d.covariance.diagonal().cwiseSqrt();
  if (j.contains("mean"))
    d.mean = dyn_params_to_vector(
        parse_phi(j.at("mean"), scope + ".mean", dyn_params_from_vector(d.mean)));
  if (j.contains("std")) {
    const json& s = require_object(j.at("std"), scope + ".std");
    require_known_keys(s, scope + ".std",
                       {"door_mass", "knob_mass", "door_friction_loss", "door_stiffness",
                        "door_damping", "joint_damping", "slide_friction"});
    DynParams as_params = dyn_params_from_vector(std_dev);
    as_params = parse_phi(s, scope + ".std", as_params);
    std_dev = dyn_params_to_vector(as_params);
    for (int i = 0; i < kNumDynParams; ++i)
      check_field(std_dev[i] > 0.0, scope + ".std",
                  dyn_param_names()[static_cast<std::size_t>(i)], "must be > 0");
  }
  d.covariance = std_dev.cwiseAbs2().asDiagonal();
  validate_param_distribution(d);
  return d;
}

inline IdentifyConfig parse_identify(const json& j, const std::string& scope) {
  require_object(j, scope);
  require_known_keys(j, scope,
                     {"population", "parents", "n_real", "failure_penalty", "sigma0",
                      "max_generations", "fitness_tolerance"});
  IdentifyConfig c;
  c.population = get_integer(j, scope, "population", c.population);
  c.parents = get_integer(j, scope, "parents", c.parents);
  c.n_real = get_integer(j, scope, "n_real", c.n_real);
  c.failure_penalty = get_number(j, scope, "failure_penalty", c.failure_penalty);
  c.sigma0 = get_number(j, scope, "sigma0", c.sigma0);
  c.max_generations = get_integer(j, scope, "max_generations", c.max_generations);
  c.fitness_tolerance = get_number(j, scope, "fitness_tolerance", c.fitness_tolerance);
  check_field(c.parents >= 1, scope, "parents", "must be >= 1");
  check_field(c.population >= c.parents, scope, "population", "must be >= parents");
  check_field(c.n_real >= 1, scope, "n_real", "must be >= 1");
  check_field(c.failure_penalty >= 0.0, scope, "failure_penalty", "must be >= 0");
  check_field(c.sigma0 > 0.0, scope, "sigma0", "must be > 0");
  check_field(c.max_generations >= 1, scope, "max_generations", "must be >= 1");
  check_field(c.fitness_tolerance >= 0.0, scope, "fitness_tolerance", "must be >= 0");
  return c;
}

inline PpoConfig parse_ppo(const json& j, const std::string& scope) {
  require_object(j, scope);
  require_known_keys(j, scope,
                     {"clip", "discount", "gae_lambda", "learn_rate", "minibatch",
                      "epochs_per_update", "horizon", "rollout_episodes_per_update",
                      "total_updates"});
  PpoConfig c;
  c.clip = get_number(j, scope, "clip", c.clip);
  c.discount = get_number(j, scope, "discount", c.discount);
  c.gae_lambda = get_number(j, scope, "gae_lambda", c.gae_lambda);
  c.learn_rate = get_number(j, scope, "learn_rate", c.learn_rate);
  c.minibatch = get_integer(j, scope, "minibatch", c.minibatch);
  c.epochs_per_update = get_integer(j, scope, "epochs_per_update", c.epochs_per_update);
  c.horizon = get_integer(j, scope, "horizon", c.horizon);
  c.rollout_episodes_per_update =
      get_integer(j, scope, "rollout_episodes_per_update", c.rollout_episodes_per_update);
  c.total_updates = get_integer(j, scope, "total_updates", c.total_updates);
  check_field(c.clip > 0.0, scope, "clip", "must be > 0");
  check_field(c.discount > 0.0 && c.discount <= 1.0, scope, "discount", "must be in (0, 1]");
  check_field(c.gae_lambda >= 0.0 && c.gae_lambda <= 1.0, scope, "gae_lambda",
              "must be in [0, 1]");
  check_field(c.learn_rate > 0.0, scope, "learn_rate", "must be > 0");
  check_field(c.minibatch >= 1, scope, "minibatch", "must be >= 1");
  check_field(c.epochs_per_update >= 0, scope, "epochs_per_update", "must be >= 0");
  check_field(c.horizon >= 1, scope, "horizon", "must be >= 1");
  check_field(c.rollout_episodes_per_update >= 1, scope, "rollout_episodes_per_update",
              "must be >= 1");
  check_field(c.total_updates >= 0, scope, "total_updates", "must be >= 0");
  return c;
}

inline RewardWeights parse_reward(const json& j, const std::string& scope) {
  require_object(j, scope);
  require_known_keys(j, scope,
                     {"w_door", "w_ori", "w_dist", "w_log_dist", "w_slip", "switch_angle_deg"});
  RewardWeights w;
  w.w_door = get_number(j, scope, "w_door", w.w_door);
  w.w_ori = get_number(j, scope, "w_ori", w.w_ori);
  w.w_dist = get_number(j, scope, "w_dist", w.w_dist);
  w.w_log_dist = get_number(j, scope, "w_log_dist", w.w_log_dist);
  w.w_slip = get_number(j, scope, "w_slip", w.w_slip);
  const double deg =
      get_number(j, scope, "switch_angle_deg", w.switch_angle * 180.0 / 3.14159265358979323846);
  w.switch_angle = deg * 3.14159265358979323846 / 180.0;
  check_field(w.switch_angle > 0.0 && w.switch_angle < 3.14159265358979323846 / 2.0, scope,
              "switch_angle_deg", "must be in (0, 90)");
  validate_reward_weights(w);
  return w;
}

inline DemoConfig parse_demo(const json& j, const std::string& scope) {
  require_object(j, scope);
  require_known_keys(j, scope, {"angle_target_deg", "duration_s", "pose"});
  DemoConfig d;
  const double deg = get_number(j, scope, "angle_target_deg",
                                d.angle_target * 180.0 / 3.14159265358979323846);
  d.angle_target = deg * 3.14159265358979323846 / 180.0;
  d.duration = get_number(j, scope, "duration_s", d.duration);
  if (j.contains("pose")) {
    if (!j.at("pose").is_string())
      throw InvalidConfigError(scope + ".pose must be a string");
    d.pose = j.at("pose").get<std::string>();
  }
  check_field(d.angle_target > 0.0 && d.angle_target <= kDoorAngleMax, scope,
              "angle_target_deg", "must be in (0, 95.7]");
  check_field(d.duration > 0.0, scope, "duration_s", "must be > 0");
  check_field(d.pose == "A" || d.pose == "B", scope, "pose", "must be \"A\" or \"B\"");
  return d;
}

inline EvalStageConfig parse_eval(const json& j, const std::string& scope) {
  require_object(j, scope);
  require_known_keys(j, scope, {"episodes", "offsets_m"});
  EvalStageConfig e;
  e.episodes = get_integer(j, scope, "episodes", e.episodes);
  if (j.contains("offsets_m")) {
    const json& v = j.at("offsets_m");
    if (!v.is_array() || v.empty())
      throw InvalidConfigError(scope + ".offsets_m must be a non-empty array");
    e.offsets.clear();
    for (const auto& item : v) {
      if (!item.is_number())
        throw InvalidConfigError(scope + ".offsets_m entries must be numbers");
      e.offsets.push_back(item.get<double>());
    }
  }
  check_field(e.episodes >= 1, scope, "episodes", "must be >= 1");
  return e;
}

inline StageSeeds parse_seeds(const json& j, const std::string& scope) {
  require_object(j, scope);
  require_known_keys(j, scope, {"demo", "real", "identify", "train", "eval"});
  StageSeeds s;
  s.demo = get_seed(j, scope, "demo", s.demo);
  s.real = get_seed(j, scope, "real", s.real);
  s.identify = get_seed(j, scope, "identify", s.identify);
  s.train = get_seed(j, scope, "train", s.train);
  s.eval = get_seed(j, scope, "eval", s.eval);
  return s;
}

inline json phi_to_config_json(const DynParams& p) {
  return json{{"door_mass", p.door_mass},
              {"knob_mass", p.knob_mass},
              {"door_friction_loss", p.door_friction_loss},
              {"door_stiffness", p.door_stiffness},
              {"door_damping", p.door_damping},
              {"joint_damping", {p.joint_damping[0], p.joint_damping[1]}},
              {"slide_friction", p.slide_friction}};
}

}  // namespace detail

inline ExperimentConfig config_from_json(const json& root) {
  detail::require_object(root, "config");
  detail::require_known_keys(root, "config",
                             {"world", "phi_true", "variants", "phi_init", "identify", "ppo",
                              "reward", "demo", "eval", "seeds"});
  ExperimentConfig cfg;
  if (root.contains("world")) cfg.world = detail::parse_world(root.at("world"), "world");
  if (root.contains("phi_true"))
    cfg.phi_true = detail::parse_phi(root.at("phi_true"), "phi_true", DynParams{});
  if (root.contains("variants")) {
    const json& v = detail::require_object(root.at("variants"), "variants");
    cfg.variants.clear();
    for (const auto& item : v.items()) {
      for (const auto& existing : cfg.variants)
        if (existing.first == item.key())
          throw InvalidConfigError("variants." + item.key() + " duplicated");
      cfg.variants.emplace_back(
          item.key(),
          detail::parse_phi(item.value(), "variants." + item.key(), cfg.phi_true));
    }
  } else {
    cfg.variants = default_variants(cfg.phi_true);
  }
  if (root.contains("phi_init"))
    cfg.phi_init = detail::parse_phi_init(root.at("phi_init"), "phi_init");
  if (root.contains("identify"))
    cfg.identify = detail::parse_identify(root.at("identify"), "identify");
  if (root.contains("ppo")) cfg.ppo = detail::parse_ppo(root.at("ppo"), "ppo");
  if (root.contains("reward")) cfg.reward = detail::parse_reward(root.at("reward"), "reward");
  if (root.contains("demo")) cfg.demo = detail::parse_demo(root.at("demo"), "demo");
  if (root.contains("eval")) cfg.eval = detail::parse_eval(root.at("eval"), "eval");
  if (root.contains("seeds")) cfg.seeds = detail::parse_seeds(root.at("seeds"), "seeds");
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  return config_from_json(read_json_file(path));
}

/// Fully resolved config, parseable by config_from_json; doubles round-trip.
inline json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["world"] = {{"link_lengths", {cfg.world.link_lengths[0], cfg.world.link_lengths[1]}},
                {"link_masses", {cfg.world.link_masses[0], cfg.world.link_masses[1]}},
                {"hinge_position", {cfg.world.hinge_position[0], cfg.world.hinge_position[1]}},
                {"knob_radius", cfg.world.knob_radius},
                {"pd_kp", {cfg.world.pd_kp[0], cfg.world.pd_kp[1]}},
                {"pd_kd", {cfg.world.pd_kd[0], cfg.world.pd_kd[1]}},
                {"grip_force", cfg.world.grip_force},
                {"coupling_stiffness", cfg.world.coupling_stiffness},
                {"coupling_damping", cfg.world.coupling_damping},
                {"dt", cfg.world.dt},
                {"noise_std", cfg.world.noise_std}};
  j["phi_true"] = detail::phi_to_config_json(cfg.phi_true);
  json variants = json::object();
  for (const auto& [name, phi] : cfg.variants) variants[name] = detail::phi_to_config_json(phi);
  j["variants"] = variants;
  const Eigen::VectorXd std_dev = cfg.phi_init.covariance.diagonal().cwiseSqrt();
  j["phi_init"] = {
      {"mean", detail::phi_to_config_json(dyn_params_from_vector(cfg.phi_init.mean))},
      {"std", detail::phi_to_config_json(dyn_params_from_vector(std_dev))}};
  j["identify"] = {{"population", cfg.identify.population},
                   {"parents", cfg.identify.parents},
                   {"n_real", cfg.identify.n_real},
                   {"failure_penalty", cfg.identify.failure_penalty},
                   {"sigma0", cfg.identify.sigma0},
                   {"max_generations", cfg.identify.max_generations},
                   {"fitness_tolerance", cfg.identify.fitness_tolerance}};
  j["ppo"] = {{"clip", cfg.ppo.clip},
              {"discount", cfg.ppo.discount},
              {"gae_lambda", cfg.ppo.gae_lambda},
              {"learn_rate", cfg.ppo.learn_rate},
              {"minibatch", cfg.ppo.minibatch},
              {"epochs_per_update", cfg.ppo.epochs_per_update},
              {"horizon", cfg.ppo.horizon},
              {"rollout_episodes_per_update", cfg.ppo.rollout_episodes_per_update},
              {"total_updates", cfg.ppo.total_updates}};
  j["reward"] = {{"w_door", cfg.reward.w_door},
                 {"w_ori", cfg.reward.w_ori},
                 {"w_dist", cfg.reward.w_dist},
                 {"w_log_dist", cfg.reward.w_log_dist},
                 {"w_slip", cfg.reward.w_slip},
                 {"switch_angle_deg", cfg.reward.switch_angle * 180.0 / 3.14159265358979323846}};
  j["demo"] = {{"angle_target_deg", cfg.demo.angle_target * 180.0 / 3.14159265358979323846},
               {"duration_s", cfg.demo.duration},
               {"pose", cfg.demo.pose}};
  json offsets = json::array();
  for (double o : cfg.eval.offsets) offsets.push_back(o);
  j["eval"] = {{"episodes", cfg.eval.episodes}, {"offsets_m", offsets}};
  j["seeds"] = {{"demo", cfg.seeds.demo},
                {"real", cfg.seeds.real},
                {"identify", cfg.seeds.identify},
                {"train", cfg.seeds.train},
                {"eval", cfg.seeds.eval}};
  return j;
}

inline std::string config_hash(const ExperimentConfig& cfg) {
  return fnv1a64_hex(config_to_json(cfg).dump());
}

/// DROID_SEED (env) beats the CLI seed, which beats the config; either
/// override replaces every stage seed with the single given value.
inline void apply_seed_overrides(ExperimentConfig& cfg, std::optional<std::uint64_t> cli_seed) {
  std::optional<std::uint64_t> seed = cli_seed;
  if (const char* env = std::getenv("DROID_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0')
      throw InvalidConfigError("DROID_SEED must be a non-negative integer");
    seed = static_cast<std::uint64_t>(v);
  }
  if (!seed) return;
  cfg.seeds = StageSeeds{*seed, *seed, *seed, *seed, *seed};
}

// ---------------------------------------------------------------------------
// Stages
// ---------------------------------------------------------------------------

enum class Stage { kDemo, kReal, kIdentify, kTrain, kEval };

inline const char* stage_name(Stage s) {
  switch (s) {
    case Stage::kDemo: return "demo";
    case Stage::kReal: return "real";
    case Stage::kIdentify: return "identify";
    case Stage::kTrain: return "train";
    case Stage::kEval: return "eval";
  }
  return "?";
}

inline Stage parse_stage(const std::string& name) {
  for (Stage s : {Stage::kDemo, Stage::kReal, Stage::kIdentify, Stage::kTrain, Stage::kEval})
    if (name == stage_name(s)) return s;
  throw InvalidInputError("unknown stage '" + name + "'");
}

/// Comma list -> canonical execution order, duplicates rejected.
inline std::vector<Stage> parse_stages(const std::string& csv) {
  std::vector<bool> seen(5, false);
  for (const auto& field : split_csv_line(csv)) {
    const Stage s = parse_stage(field);
    if (seen[static_cast<std::size_t>(s)])
      throw InvalidInputError("stage '" + field + "' listed twice");
    seen[static_cast<std::size_t>(s)] = true;
  }
  std::vector<Stage> out;
  for (Stage s : {Stage::kDemo, Stage::kReal, Stage::kIdentify, Stage::kTrain, Stage::kEval})
    if (seen[static_cast<std::size_t>(s)]) out.push_back(s);
  if (out.empty()) throw InvalidInputError("no stages given");
  return out;
}

inline const std::array<const char*, 3>& method_names() {
  static const std::array<const char*, 3> names = {"dr_init", "mu_opt", "dr_star"};
  return names;
}

/// Exclusive ownership of an output directory for the process lifetime.
class DirLock {
 public:
  explicit DirLock(const std::filesystem::path& dir) : path_(dir / ".droid.lock") {
    std::filesystem::create_directories(dir);
    std::FILE* f = std::fopen(path_.string().c_str(), "wx");
    if (!f)
      throw IoError("output dir is locked by another run (remove " + path_.string() +
                    " if stale)");
    std::fputs("locked\n", f);
    std::fclose(f);
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;
  ~DirLock() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }

 private:
  std::filesystem::path path_;
};

namespace detail {

inline void require_artifact(const std::filesystem::path& p, const char* needed_by) {
  if (!std::filesystem::exists(p))
    throw StageDependencyError(std::string(needed_by) + " requires missing artifact " +
                               p.string());
}

inline json load_manifest(const std::filesystem::path& out) {
  const std::filesystem::path p = out / "manifest.json";
  if (std::filesystem::exists(p)) return read_json_file(p);
  json j;
  j["stages"] = json::object();
  return j;
}

inline void record_stage(json& manifest, const std::string& stage, std::uint64_t seed,
                         const std::filesystem::path& out,
                         const std::vector<std::filesystem::path>& files) {
  json artifacts = json::object();
  for (const auto& f : files)
    artifacts[std::filesystem::relative(f, out).generic_string()] =
        fnv1a64_hex(read_text_file(f));
  manifest["stages"][stage] = json{{"seed", seed}, {"artifacts", artifacts}};
}

inline std::vector<std::filesystem::path> run_demo_stage(const ExperimentConfig& cfg,
                                                         const std::filesystem::path& out) {
  const auto waypoints =
      synth_demo(cfg.world, cfg.demo.angle_target, cfg.demo.duration, cfg.demo.elbow_sign());
  const Trajectory demo = playback(waypoints, cfg.phi_true, cfg.world);
  if (demo.failed)
    throw InvalidConfigError("demo: playback fails to open the door on phi_true");
  const std::filesystem::path csv = out / "demo" / "demo.csv";
  save_trajectory(demo, cfg.world, cfg.phi_true, csv);
  std::filesystem::path sidecar = csv;
  sidecar.replace_extension(".json");
  return {csv, sidecar};
}

inline std::vector<std::filesystem::path> run_real_stage(const ExperimentConfig& cfg,
                                                         const std::filesystem::path& out) {
  require_artifact(out / "demo" / "demo.csv", "real");
  const Trajectory demo = load_trajectory(out / "demo" / "demo.csv");
  const auto rollouts = gen_real_rollouts(demo.q_desired, cfg.phi_true, cfg.world,
                                          cfg.identify.n_real, cfg.seeds.real);
  std::vector<std::filesystem::path> files;
  for (std::size_t i = 0; i < rollouts.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "real_%03zu.csv", i);
    const std::filesystem::path csv = out / "real" / name;
    save_trajectory(rollouts[i], cfg.world, cfg.phi_true, csv);
    files.push_back(csv);
    std::filesystem::path sidecar = csv;
    sidecar.replace_extension(".json");
    files.push_back(sidecar);
  }
  return files;
}

inline std::vector<Trajectory> load_real_set(const ExperimentConfig& cfg,
                                             const std::filesystem::path& out,
                                             const char* needed_by) {
  std::vector<Trajectory> real_set;
  for (int i = 0; i < cfg.identify.n_real; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "real_%03d.csv", i);
    const std::filesystem::path csv = out / "real" / name;
    require_artifact(csv, needed_by);
    real_set.push_back(load_trajectory(csv));
  }
  return real_set;
}

inline std::vector<std::filesystem::path> run_identify_stage(const ExperimentConfig& cfg,
                                                             const std::filesystem::path& out) {
  require_artifact(out / "demo" / "demo.csv", "identify");
  const Trajectory demo = load_trajectory(out / "demo" / "demo.csv");
  const std::vector<Trajectory> real_set = load_real_set(cfg, out, "identify");
  IdentifyConfig id_cfg = cfg.identify;
  id_cfg.seed = cfg.seeds.identify;
  const auto [phi_star, trace] =
      optimize_distribution(cfg.phi_init, demo.q_desired, real_set, cfg.world, id_cfg);
  const std::filesystem::path dist_path = out / "identify" / "phi_star.json";
  const std::filesystem::path trace_path = out / "identify" / "trace.csv";
  save_param_distribution(phi_star, dist_path);
  write_text_file(trace_path, trace_to_csv(trace, phi_star.names));
  return {dist_path, trace_path};
}

inline std::vector<std::filesystem::path> run_train_stage(const ExperimentConfig& cfg,
                                                          const std::filesystem::path& out) {
  require_artifact(out / "identify" / "phi_star.json", "train");
  const ParamDistribution phi_star =
      load_param_distribution(out / "identify" / "phi_star.json");
  const std::array<PhiSource, 3> sources = {
      PhiSource{cfg.phi_init}, PhiSource{dyn_params_from_vector(phi_star.mean)},
      PhiSource{phi_star}};
  std::vector<std::filesystem::path> files;
  for (std::size_t k = 0; k < method_names().size(); ++k) {
    PpoConfig ppo = cfg.ppo;
    ppo.seed = mix_seed(cfg.seeds.train, static_cast<std::uint64_t>(k));
    const TrainResult result = train_policy(sources[k], cfg.world, cfg.reward, ppo);
    const std::filesystem::path dir = out / "train" / method_names()[k];
    save_policy(result.net, dir / "policy.json");
    write_text_file(dir / "curve.csv", curve_to_csv(result.curve));
    files.push_back(dir / "policy.json");
    files.push_back(dir / "curve.csv");
  }
  return files;
}

inline std::vector<std::filesystem::path> run_eval_stage(const ExperimentConfig& cfg,
                                                         const std::filesystem::path& out) {
  std::vector<EvalReport> reports;
  for (std::size_t k = 0; k < method_names().size(); ++k) {
    const std::filesystem::path policy_path =
        out / "train" / method_names()[k] / "policy.json";
    require_artifact(policy_path, "eval");
    const PolicyNet net = load_policy(policy_path);
    reports.push_back(evaluate_transfer(net, cfg.phi_true, cfg.world, cfg.reward,
                                        cfg.eval.episodes,
                                        mix_seed(cfg.seeds.eval, static_cast<std::uint64_t>(k)),
                                        method_names()[k]));
    if (std::string(method_names()[k]) == "dr_star") {
      const auto knob_reports = knob_generalization(
          net, cfg.phi_true, cfg.world, cfg.reward, cfg.eval.offsets, cfg.eval.episodes,
          mix_seed(cfg.seeds.eval, 0x100u), method_names()[k]);
      reports.insert(reports.end(), knob_reports.begin(), knob_reports.end());
    }
  }
  emit_report(reports, out / "eval");
  return {out / "eval" / "results.csv", out / "eval" / "histogram.csv",
          out / "eval" / "episodes_raw.csv", out / "eval" / "summary.txt"};
}

}  // namespace detail

/// Runs the requested stages in canonical order, refreshing manifest.json
/// after each stage. Each stage reads only config plus prior artifacts.
inline void run_pipeline(const ExperimentConfig& cfg, const std::vector<Stage>& stages,
                         const std::filesystem::path& out) {
  if (stages.empty()) throw InvalidInputError("run_pipeline: no stages requested");
  DirLock lock(out);
  json manifest = detail::load_manifest(out);
  manifest["config_hash"] = config_hash(cfg);
  for (Stage s : stages) {
    std::vector<std::filesystem::path> files;
    std::uint64_t seed = 0;
    switch (s) {
      case Stage::kDemo:
        files = detail::run_demo_stage(cfg, out);
        seed = cfg.seeds.demo;
        break;
      case Stage::kReal:
        files = detail::run_real_stage(cfg, out);
        seed = cfg.seeds.real;
        break;
      case Stage::kIdentify:
        files = detail::run_identify_stage(cfg, out);
        seed = cfg.seeds.identify;
        break;
      case Stage::kTrain:
        files = detail::run_train_stage(cfg, out);
        seed = cfg.seeds.train;
        break;
      case Stage::kEval:
        files = detail::run_eval_stage(cfg, out);
        seed = cfg.seeds.eval;
        break;
    }
    detail::record_stage(manifest, stage_name(s), seed, out, files);
    write_json_file(out / "manifest.json", manifest);
  }
}

// ---------------------------------------------------------------------------
// Variant study (spring truths, demo poses)
// ---------------------------------------------------------------------------

struct VariantRun {
  std::string name;
  DynParams truth;
  ParamDistribution identified;
};

struct VariantsResult {
  std::vector<VariantRun> runs;        // base, spring variants..., pose_b
  ParamComparison pose_comparison;     // base (pose A) vs pose_b on the same truth
};

/// Identification across door truths and demo poses; artifacts under
/// out/variants/: per-run phi_star.json + trace.csv, variants.csv (one row
/// per parameter), pose_compare.csv.
inline VariantsResult run_variants(const ExperimentConfig& cfg,
                                   const std::filesystem::path& out) {
  DirLock lock(out);
  struct Plan {
    std::string name;
    DynParams truth;
    int elbow;
  };
  std::vector<Plan> plans;
  plans.push_back({"base", cfg.phi_true, cfg.demo.elbow_sign()});
  for (const auto& [name, phi] : cfg.variants) plans.push_back({name, phi, cfg.demo.elbow_sign()});
  plans.push_back({"pose_b", cfg.phi_true, -cfg.demo.elbow_sign()});

  VariantsResult result;
  for (std::size_t i = 0; i < plans.size(); ++i) {
    const Plan& plan = plans[i];
    const auto waypoints =
        synth_demo(cfg.world, cfg.demo.angle_target, cfg.demo.duration, plan.elbow);
    const Trajectory demo = playback(waypoints, plan.truth, cfg.world);
    if (demo.failed)
      throw InvalidConfigError("variants: demo playback fails on truth '" + plan.name + "'");
    const auto real_set =
        gen_real_rollouts(waypoints, plan.truth, cfg.world, cfg.identify.n_real,
                          mix_seed(cfg.seeds.real, static_cast<std::uint64_t>(i)));
    IdentifyConfig id_cfg = cfg.identify;
    id_cfg.seed = mix_seed(cfg.seeds.identify, static_cast<std::uint64_t>(i));
    auto [identified, trace] =
        optimize_distribution(cfg.phi_init, waypoints, real_set, cfg.world, id_cfg);
    const std::filesystem::path dir = out / "variants" / plan.name;
    save_param_distribution(identified, dir / "phi_star.json");
    write_text_file(dir / "trace.csv", trace_to_csv(trace, identified.names));
    result.runs.push_back({plan.name, plan.truth, std::move(identified)});
  }

  std::string csv = "param,mu_init,sigma_init";
  for (const auto& run : result.runs)
    csv += ",mu_" + run.name + ",sigma_" + run.name;
  csv += '\n';
  const Eigen::VectorXd init_std = cfg.phi_init.covariance.diagonal().cwiseSqrt();
  for (int p = 0; p < kNumDynParams; ++p) {
    csv += cfg.phi_init.names[static_cast<std::size_t>(p)];
    csv += ',' + format_double(cfg.phi_init.mean[p]) + ',' + format_double(init_std[p]);
    for (const auto& run : result.runs) {
      csv += ',' + format_double(run.identified.mean[p]);
      csv += ',' + format_double(std::sqrt(run.identified.covariance(p, p)));
    }
    csv += '\n';
  }
  write_text_file(out / "variants" / "variants.csv", csv);

  result.pose_comparison =
      compare_distributions(result.runs.front().identified, result.runs.back().identified);
  write_text_file(out / "variants" / "pose_compare.csv",
                  comparison_to_csv(result.pose_comparison));
  return result;
}

}  // namespace droid
