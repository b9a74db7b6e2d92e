#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "droid/cmaes.hpp"
#include "droid/errors.hpp"
#include "droid/simenv.hpp"
#include "droid/util.hpp"

namespace droid {

/// Multivariate normal over the 8 dynamics parameters (the DR distribution
/// Phi). Covariance is the full sampling covariance in physical units.
struct ParamDistribution {
  std::vector<std::string> names;
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  std::vector<bool> positivity;
};

inline void validate_param_distribution(const ParamDistribution& d) {
  const int n = static_cast<int>(d.mean.size());
  if (n != kNumDynParams || static_cast<int>(d.names.size()) != n ||
      d.covariance.rows() != n || d.covariance.cols() != n ||
      static_cast<int>(d.positivity.size()) != n)
    throw InvalidConfigError("param distribution: inconsistent sizes");
  for (int i = 0; i < n; ++i)
    if (d.names[static_cast<std::size_t>(i)] != dyn_param_names()[static_cast<std::size_t>(i)])
      throw InvalidConfigError("param distribution: names must match DynParams field order");
  if ((d.covariance - d.covariance.transpose()).cwiseAbs().maxCoeff() > 1e-9)
    throw InvalidConfigError("param distribution: covariance must be symmetric");
  if (!d.mean.allFinite() || !d.covariance.allFinite())
    throw InvalidConfigError("param distribution: non-finite entries");
}

/// Initialization used throughout: desk-scale mapping of the reference
/// initialization magnitudes (diagonal covariance of squared per-parameter
/// standard deviations).
inline ParamDistribution default_init_distribution() {
  ParamDistribution d;
  d.names.assign(dyn_param_names().begin(), dyn_param_names().end());
  d.mean.resize(kNumDynParams);
  d.mean << 1.144, 0.199, 0.05, 0.01, 2.0, 10.0, 0.4, 0.5;
  Eigen::VectorXd std_dev(kNumDynParams);
  std_dev << 0.5, 0.1, 0.025, 0.005, 1.0, 1.0, 0.2, 0.25;
  d.covariance = std_dev.cwiseAbs2().asDiagonal();
  d.positivity.assign(kNumDynParams, true);
  return d;
}

struct IdentifyConfig {
  int population = 30;       // M candidates per generation
  int parents = 5;           // selected per generation
  int n_real = 10;           // reference rollouts
  double failure_penalty = 10.0;
  double sigma0 = 1.0;       // initial CMA step in scaled coordinates
  int max_generations = 60;
  double fitness_tolerance = 1e-3;
  std::uint64_t seed = 0;
};

struct IdentifyGenRecord {
  int generation = 0;
  double best_fitness = 0.0;
  double mean_fitness = 0.0;
  double worst_fitness = 0.0;
  int evaluations = 0;          // cumulative playbacks so far
  Eigen::VectorXd mean;         // post-update, physical units
  Eigen::VectorXd effective_std;  // step_size * s_j * sqrt(C_jj), physical units
};

struct IdentifyTrace {
  std::vector<IdentifyGenRecord> records;
  bool non_improving = false;
};

/// Eq.-style matching cost: mean over the reference set of (time-mean
/// per-sample joint-torque residual norm + failure penalty).
inline double trajectory_cost(const Trajectory& sim, const std::vector<Trajectory>& real_set,
                              double failure_penalty) {
  if (real_set.empty()) throw InvalidInputError("trajectory_cost: empty reference set");
  double total = 0.0;
  for (const Trajectory& real : real_set) {
    if (real.dt != sim.dt) throw InvalidInputError("trajectory_cost: dt mismatch");
    const std::size_t len = std::min(sim.torque.size(), real.torque.size());
    if (len == 0) throw InvalidInputError("trajectory_cost: empty trajectory");
    double residual = 0.0;
    for (std::size_t k = 0; k < len; ++k) residual += (sim.torque[k] - real.torque[k]).norm();
    total += residual / static_cast<double>(len) + (sim.failed ? failure_penalty : 0.0);
  }
  return total / static_cast<double>(real_set.size());
}

/// Noise-free playback of the candidate followed by trajectory_cost;
/// divergence is absorbed into a large sentinel so CMA-ES stays total-ordered.
inline double candidate_fitness(const DynParams& phi, const std::vector<Eigen::Vector2d>& q_desired,
                                const std::vector<Trajectory>& real_set, const WorldConfig& world,
                                const IdentifyConfig& cfg) {
  try {
    return trajectory_cost(playback(q_desired, phi, world), real_set, cfg.failure_penalty);
  } catch (const SimulationDivergedError&) {
    return 1e9;
  }
}

/// Algorithm-1-style loop: CMA-ES over scaled coordinates z = phi / s with
/// s = initial per-parameter standard deviations. Scale-only (no shift) so the
/// positivity mask stays exact in z; CMA-ES is translation invariant, so
/// conditioning is unaffected.
inline std::pair<ParamDistribution, IdentifyTrace> optimize_distribution(
    const ParamDistribution& phi_init, const std::vector<Eigen::Vector2d>& q_desired,
    const std::vector<Trajectory>& real_set, const WorldConfig& world,
    const IdentifyConfig& cfg) {
  validate_param_distribution(phi_init);
  if (static_cast<int>(real_set.size()) != cfg.n_real)
    throw InvalidInputError("optimize_distribution: |real_set| must equal n_real");
  if (cfg.population < cfg.parents || cfg.parents < 1)
    throw InvalidConfigError("optimize_distribution: population >= parents >= 1 required");

  const int n = kNumDynParams;
  Eigen::VectorXd scale(n);
  for (int i = 0; i < n; ++i) {
    scale[i] = std::sqrt(phi_init.covariance(i, i));
    if (!(scale[i] > 0.0))
      throw InvalidConfigError("optimize_distribution: initial variances must be positive");
  }
  const Eigen::VectorXd inv_scale = scale.cwiseInverse();

  CmaConfig cma_cfg;
  cma_cfg.population = cfg.population;
  cma_cfg.parents = cfg.parents;
  cma_cfg.max_generations = cfg.max_generations;
  cma_cfg.fitness_tolerance = cfg.fitness_tolerance;
  cma_cfg.seed = cfg.seed;

  SearchDistribution dist = cma_init(phi_init.mean.cwiseProduct(inv_scale), cfg.sigma0, cma_cfg);
  dist.covariance =
      inv_scale.asDiagonal() * phi_init.covariance * inv_scale.asDiagonal();
  dist.covariance = 0.5 * (dist.covariance + dist.covariance.transpose()).eval();
  dist.names = phi_init.names;

  PositivityMask mask{phi_init.positivity};
  IdentifyTrace trace;
  std::vector<double> best_history;
  int evaluations = 0;

  while (!cma_converged(dist, best_history, cma_cfg)) {
    const int g = dist.generation;
    const auto z_candidates = cma_ask(dist, mask, cfg.population, mix_seed(cfg.seed, static_cast<std::uint64_t>(g)));
    Eigen::VectorXd fitnesses(cfg.population);
    for (int i = 0; i < cfg.population; ++i) {
      const DynParams phi =
          dyn_params_from_vector(z_candidates[static_cast<std::size_t>(i)].cwiseProduct(scale));
      fitnesses[i] = candidate_fitness(phi, q_desired, real_set, world, cfg);
      ++evaluations;
    }
    dist = cma_tell(dist, z_candidates, fitnesses, cma_cfg);
    best_history.push_back(fitnesses.minCoeff());

    IdentifyGenRecord rec;
    rec.generation = g;
    rec.best_fitness = fitnesses.minCoeff();
    rec.mean_fitness = fitnesses.mean();
    rec.worst_fitness = fitnesses.maxCoeff();
    rec.evaluations = evaluations;
    rec.mean = dist.mean.cwiseProduct(scale);
    rec.effective_std.resize(n);
    for (int i = 0; i < n; ++i)
      rec.effective_std[i] = dist.step_size * scale[i] * std::sqrt(dist.covariance(i, i));
    trace.records.push_back(std::move(rec));
  }

  ParamDistribution out;
  out.names = phi_init.names;
  out.positivity = phi_init.positivity;
  out.mean = dist.mean.cwiseProduct(scale);
  const double s2 = dist.step_size * dist.step_size;
  out.covariance = s2 * (scale.asDiagonal() * dist.covariance * scale.asDiagonal());
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();

  if (!trace.records.empty() &&
      trace.records.back().mean_fitness > trace.records.front().mean_fitness)
    trace.non_improving = true;
  return {std::move(out), std::move(trace)};
}

struct ParamComparison {
  std::vector<std::string> names;
  Eigen::VectorXd mean_a, mean_b;
  Eigen::VectorXd std_a, std_b;
  Eigen::VectorXd bhattacharyya;  // coefficient of the two 1-D marginals
};

/// Per-parameter marginal comparison; Bhattacharyya coefficient of 1-D
/// Gaussians: sqrt(2*s_a*s_b/(s_a^2+s_b^2)) * exp(-(mu_a-mu_b)^2/(4(s_a^2+s_b^2))).
inline ParamComparison compare_distributions(const ParamDistribution& a,
                                             const ParamDistribution& b) {
  if (a.names != b.names)
    throw InvalidInputError("compare_distributions: parameter names must match");
  const int n = static_cast<int>(a.names.size());
  ParamComparison c;
  c.names = a.names;
  c.mean_a = a.mean;
  c.mean_b = b.mean;
  c.std_a = a.covariance.diagonal().cwiseSqrt();
  c.std_b = b.covariance.diagonal().cwiseSqrt();
  c.bhattacharyya.resize(n);
  for (int i = 0; i < n; ++i) {
    const double sa = c.std_a[i], sb = c.std_b[i];
    const double var_sum = sa * sa + sb * sb;
    if (var_sum == 0.0) {
      c.bhattacharyya[i] = a.mean[i] == b.mean[i] ? 1.0 : 0.0;
      continue;
    }
    const double dm = a.mean[i] - b.mean[i];
    c.bhattacharyya[i] =
        std::sqrt(2.0 * sa * sb / var_sum) * std::exp(-dm * dm / (4.0 * var_sum));
  }
  return c;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline json param_distribution_to_json(const ParamDistribution& d) {
  json j;
  j["names"] = d.names;
  j["mean"] = std::vector<double>(d.mean.data(), d.mean.data() + d.mean.size());
  std::vector<double> cov;
  const int n = static_cast<int>(d.mean.size());
  cov.reserve(static_cast<std::size_t>(n * n));
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) cov.push_back(d.covariance(i, k));
  j["covariance"] = cov;
  j["positivity"] = d.positivity;
  return j;
}

inline ParamDistribution param_distribution_from_json(const json& j) {
  ParamDistribution d;
  d.names = j.at("names").get<std::vector<std::string>>();
  const auto mean = j.at("mean").get<std::vector<double>>();
  const int n = static_cast<int>(mean.size());
  d.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), n);
  const auto cov = j.at("covariance").get<std::vector<double>>();
  if (static_cast<int>(cov.size()) != n * n)
    throw InvalidInputError("param distribution: covariance size != dim^2");
  d.covariance.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) d.covariance(i, k) = cov[static_cast<std::size_t>(i * n + k)];
  d.positivity = j.at("positivity").get<std::vector<bool>>();
  return d;
}

inline void save_param_distribution(const ParamDistribution& d,
                                    const std::filesystem::path& path) {
  write_json_file(path, param_distribution_to_json(d));
}

inline ParamDistribution load_param_distribution(const std::filesystem::path& path) {
  return param_distribution_from_json(read_json_file(path));
}

/// trace.csv: generation,best_fit,mean_fit, then mean_<p>,std_<p> per parameter.
inline std::string trace_to_csv(const IdentifyTrace& trace, const std::vector<std::string>& names) {
  std::string out = "generation,best_fit,mean_fit";
  for (const auto& name : names) out += ",mean_" + name + ",std_" + name;
  out += '\n';
  for (const auto& rec : trace.records) {
    out += std::to_string(rec.generation);
    out += ',';
    out += format_double(rec.best_fitness);
    out += ',';
    out += format_double(rec.mean_fitness);
    for (int i = 0; i < rec.mean.size(); ++i) {
      out += ',';
      out += format_double(rec.mean[i]);
      out += ',';
      out += format_double(rec.effective_std[i]);
    }
    out += '\n';
  }
  return out;
}

/// compare.csv: one row per parameter with both marginals and their overlap.
inline std::string comparison_to_csv(const ParamComparison& c) {
  std::string out = "param,mean_a,std_a,mean_b,std_b,bhattacharyya\n";
  for (std::size_t i = 0; i < c.names.size(); ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    out += c.names[i];
    out += ',';
    out += format_double(c.mean_a[idx]);
    out += ',';
    out += format_double(c.std_a[idx]);
    out += ',';
    out += format_double(c.mean_b[idx]);
    out += ',';
    out += format_double(c.std_b[idx]);
    out += ',';
    out += format_double(c.bhattacharyya[idx]);
    out += '\n';
  }
  return out;
}

}  // namespace droid
