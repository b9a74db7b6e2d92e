#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "droid/errors.hpp"
#include "droid/rng.hpp"
#include "droid/util.hpp"

namespace droid {

/// Gaussian search distribution N(mean, step_size^2 * covariance) plus the
/// CMA-ES evolution paths that drive its adaptation.
struct SearchDistribution {
  int dim = 0;
  std::vector<std::string> names;  // optional per-coordinate labels
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  double step_size = 1.0;
  Eigen::VectorXd path_sigma;
  Eigen::VectorXd path_cov;
  int generation = 0;
};

struct CmaConfig {
  int population = 30;
  int parents = 5;
  /// Log-rank recombination weights, non-increasing, sum 1. Empty = derive
  /// the standard defaults from `parents`.
  std::vector<double> recombination_weights;
  /// Learning rates; 0 = derive the standard dimension-dependent defaults.
  double c_sigma = 0.0;
  double d_sigma = 0.0;
  double c_c = 0.0;
  double c_1 = 0.0;
  double c_mu = 0.0;
  int max_generations = 100;
  double fitness_tolerance = 1e-3;
  std::uint64_t seed = 0;
};

/// flags[i] = true where coordinate i must stay strictly positive when sampling.
/// An empty mask constrains nothing.
struct PositivityMask {
  std::vector<bool> flags;
};

inline std::vector<double> cma_default_weights(int parents) {
  std::vector<double> w(static_cast<std::size_t>(parents));
  double sum = 0.0;
  for (int i = 0; i < parents; ++i) {
    w[static_cast<std::size_t>(i)] = std::log(parents + 1.0) - std::log(i + 1.0);
    sum += w[static_cast<std::size_t>(i)];
  }
  for (double& wi : w) wi /= sum;
  return w;
}

namespace detail {

/// Dimension-dependent constants, resolved from config overrides where given.
struct CmaRates {
  std::vector<double> weights;
  double mu_eff;
  double c_sigma, d_sigma, c_c, c_1, c_mu;
  double chi_n;
};

inline CmaRates cma_rates(int dim, const CmaConfig& cfg) {
  if (cfg.parents < 1 || cfg.parents > cfg.population)
    throw InvalidConfigError("cma: need 1 <= parents <= population");
  CmaRates r;
  r.weights = cfg.recombination_weights.empty() ? cma_default_weights(cfg.parents)
                                                : cfg.recombination_weights;
  if (static_cast<int>(r.weights.size()) != cfg.parents)
    throw InvalidConfigError("cma: recombination_weights size must equal parents");
  double sum = 0.0, sumsq = 0.0;
  for (std::size_t i = 0; i < r.weights.size(); ++i) {
    if (r.weights[i] <= 0.0 || (i > 0 && r.weights[i] > r.weights[i - 1]))
      throw InvalidConfigError("cma: weights must be positive and non-increasing");
    sum += r.weights[i];
    sumsq += r.weights[i] * r.weights[i];
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw InvalidConfigError("cma: weights must sum to 1");
  r.mu_eff = 1.0 / sumsq;
  const double n = static_cast<double>(dim);
  r.c_sigma = cfg.c_sigma > 0.0 ? cfg.c_sigma : (r.mu_eff + 2.0) / (n + r.mu_eff + 5.0);
  r.d_sigma = cfg.d_sigma > 0.0
                  ? cfg.d_sigma
                  : 1.0 + 2.0 * std::max(0.0, std::sqrt((r.mu_eff - 1.0) / (n + 1.0)) - 1.0) +
                        r.c_sigma;
  r.c_c = cfg.c_c > 0.0 ? cfg.c_c : (4.0 + r.mu_eff / n) / (n + 4.0 + 2.0 * r.mu_eff / n);
  r.c_1 = cfg.c_1 > 0.0 ? cfg.c_1 : 2.0 / ((n + 1.3) * (n + 1.3) + r.mu_eff);
  r.c_mu = cfg.c_mu > 0.0
               ? cfg.c_mu
               : std::min(1.0 - r.c_1, 2.0 * (r.mu_eff - 2.0 + 1.0 / r.mu_eff) /
                                           ((n + 2.0) * (n + 2.0) + r.mu_eff));
  r.chi_n = std::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));
  return r;
}

/// C = B diag(eig) B^T with eigenvalues clamped to >= 0.
struct CovFactor {
  Eigen::MatrixXd basis;        // B
  Eigen::VectorXd sqrt_eig;     // sqrt of clamped eigenvalues
  Eigen::VectorXd inv_sqrt_eig; // 1/sqrt, guarded against zero
};

inline CovFactor factor_covariance(const Eigen::MatrixXd& cov) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success)
    throw SimulationDivergedError("cma: covariance eigendecomposition failed");
  CovFactor f;
  f.basis = solver.eigenvectors();
  Eigen::VectorXd eig = solver.eigenvalues().cwiseMax(0.0);
  f.sqrt_eig = eig.cwiseSqrt();
  f.inv_sqrt_eig = (eig.array() + 1e-300).rsqrt().matrix();
  return f;
}

inline bool satisfies_mask(const Eigen::VectorXd& x, const PositivityMask& mask) {
  if (mask.flags.empty()) return true;
  for (int i = 0; i < x.size(); ++i)
    if (mask.flags[static_cast<std::size_t>(i)] && x[i] <= 0.0) return false;
  return true;
}

}  // namespace detail

inline SearchDistribution cma_init(const Eigen::VectorXd& mean0, double sigma0,
                                   const CmaConfig& cfg) {
  (void)cfg;
  if (!mean0.allFinite()) throw InvalidConfigError("cma_init: mean0 must be finite");
  if (!(sigma0 > 0.0) || !std::isfinite(sigma0))
    throw InvalidConfigError("cma_init: sigma0 must be positive");
  SearchDistribution d;
  d.dim = static_cast<int>(mean0.size());
  d.mean = mean0;
  d.covariance = Eigen::MatrixXd::Identity(d.dim, d.dim);
  d.step_size = sigma0;
  d.path_sigma = Eigen::VectorXd::Zero(d.dim);
  d.path_cov = Eigen::VectorXd::Zero(d.dim);
  d.generation = 0;
  return d;
}

/// Draws `count` samples from N(mean, step_size^2 * covariance). Samples
/// violating the positivity mask are discarded and redrawn, up to 1000
/// attempts per slot.
inline std::vector<Eigen::VectorXd> cma_ask(const SearchDistribution& dist,
                                            const PositivityMask& mask, int count,
                                            std::uint64_t rng_seed) {
  if (count < 1) throw InvalidInputError("cma_ask: count must be >= 1");
  if (!mask.flags.empty() && static_cast<int>(mask.flags.size()) != dist.dim)
    throw InvalidInputError("cma_ask: mask length must equal dim");
  const detail::CovFactor f = detail::factor_covariance(dist.covariance);
  Rng rng(rng_seed);
  std::vector<Eigen::VectorXd> samples;
  samples.reserve(static_cast<std::size_t>(count));
  Eigen::VectorXd z(dist.dim);
  for (int s = 0; s < count; ++s) {
    int attempts = 0;
    while (true) {
      if (++attempts > 1000)
        throw InfeasibleDistributionError(
            "cma_ask: exceeded 1000 redraws against the positivity mask");
      for (int i = 0; i < dist.dim; ++i) z[i] = rng.gaussian();
      Eigen::VectorXd x =
          dist.mean + dist.step_size * (f.basis * (f.sqrt_eig.asDiagonal() * z));
      if (detail::satisfies_mask(x, mask)) {
        samples.push_back(std::move(x));
        break;
      }
    }
  }
  return samples;
}

/// One generation of the standard CMA-ES update: rank-based selection,
/// weighted recombination, cumulative step-size adaptation, rank-1 + rank-mu
/// covariance update.
inline SearchDistribution cma_tell(const SearchDistribution& dist,
                                   const std::vector<Eigen::VectorXd>& candidates,
                                   const Eigen::VectorXd& fitnesses, const CmaConfig& cfg) {
  const int lambda = static_cast<int>(candidates.size());
  if (lambda != static_cast<int>(fitnesses.size()) || lambda != cfg.population)
    throw InvalidInputError("cma_tell: |candidates| and |fitnesses| must equal population");
  if (!fitnesses.allFinite()) throw InvalidInputError("cma_tell: fitnesses must be finite");
  for (const auto& c : candidates)
    if (static_cast<int>(c.size()) != dist.dim)
      throw InvalidInputError("cma_tell: candidate dimension mismatch");

  const detail::CmaRates r = detail::cma_rates(dist.dim, cfg);
  const int mu = cfg.parents;
  const double n = static_cast<double>(dist.dim);

  std::vector<int> order(static_cast<std::size_t>(lambda));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return fitnesses[a] < fitnesses[b]; });

  SearchDistribution next = dist;
  Eigen::VectorXd new_mean = Eigen::VectorXd::Zero(dist.dim);
  for (int i = 0; i < mu; ++i)
    new_mean += r.weights[static_cast<std::size_t>(i)] * candidates[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];

  const Eigen::VectorXd y_mean = (new_mean - dist.mean) / dist.step_size;
  const detail::CovFactor f = detail::factor_covariance(dist.covariance);
  const Eigen::VectorXd c_inv_sqrt_y =
      f.basis * (f.inv_sqrt_eig.asDiagonal() * (f.basis.transpose() * y_mean));

  next.path_sigma = (1.0 - r.c_sigma) * dist.path_sigma +
                    std::sqrt(r.c_sigma * (2.0 - r.c_sigma) * r.mu_eff) * c_inv_sqrt_y;

  const int gen1 = dist.generation + 1;
  const double expected_decay = std::sqrt(1.0 - std::pow(1.0 - r.c_sigma, 2.0 * gen1));
  const bool hsig =
      next.path_sigma.norm() / expected_decay < (1.4 + 2.0 / (n + 1.0)) * r.chi_n;

  next.path_cov = (1.0 - r.c_c) * dist.path_cov +
                  (hsig ? std::sqrt(r.c_c * (2.0 - r.c_c) * r.mu_eff) : 0.0) * y_mean;

  Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(dist.dim, dist.dim);
  for (int i = 0; i < mu; ++i) {
    const Eigen::VectorXd y =
        (candidates[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] - dist.mean) / dist.step_size;
    rank_mu += r.weights[static_cast<std::size_t>(i)] * (y * y.transpose());
  }
  const double stall = hsig ? 0.0 : r.c_c * (2.0 - r.c_c);
  next.covariance = (1.0 - r.c_1 - r.c_mu) * dist.covariance +
                    r.c_1 * (next.path_cov * next.path_cov.transpose() + stall * dist.covariance) +
                    r.c_mu * rank_mu;
  next.covariance = 0.5 * (next.covariance + next.covariance.transpose()).eval();

  // Clamp any eigenvalue that numerical error pushed below zero.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(next.covariance);
  if (solver.eigenvalues().minCoeff() < 0.0) {
    const Eigen::VectorXd eig = solver.eigenvalues().cwiseMax(0.0);
    next.covariance = solver.eigenvectors() * eig.asDiagonal() * solver.eigenvectors().transpose();
    next.covariance = 0.5 * (next.covariance + next.covariance.transpose()).eval();
  }

  next.mean = new_mean;
  next.step_size =
      dist.step_size *
      std::exp((r.c_sigma / r.d_sigma) * (next.path_sigma.norm() / r.chi_n - 1.0));
  next.generation = gen1;
  return next;
}

/// True once the generation cap is reached or the best fitness improved by
/// less than fitness_tolerance over the last 10 generations.
inline bool cma_converged(const SearchDistribution& dist, const std::vector<double>& fitness_history,
                          const CmaConfig& cfg) {
  if (dist.generation >= cfg.max_generations) return true;
  if (fitness_history.size() < 10) return false;
  const std::size_t start = fitness_history.size() - 10;
  double lowest = fitness_history[start];
  for (std::size_t i = start; i < fitness_history.size(); ++i)
    lowest = std::min(lowest, fitness_history[i]);
  return fitness_history[start] - lowest < cfg.fitness_tolerance;
}

inline json search_distribution_to_json(const SearchDistribution& dist) {
  json j;
  j["names"] = dist.names;
  j["mean"] = std::vector<double>(dist.mean.data(), dist.mean.data() + dist.mean.size());
  std::vector<double> cov;
  cov.reserve(static_cast<std::size_t>(dist.dim) * static_cast<std::size_t>(dist.dim));
  for (int i = 0; i < dist.dim; ++i)
    for (int k = 0; k < dist.dim; ++k) cov.push_back(dist.covariance(i, k));
  j["covariance"] = cov;
  j["step_size"] = dist.step_size;
  j["generation"] = dist.generation;
  return j;
}

inline SearchDistribution search_distribution_from_json(const json& j) {
  SearchDistribution d;
  const auto mean = j.at("mean").get<std::vector<double>>();
  d.dim = static_cast<int>(mean.size());
  d.names = j.at("names").get<std::vector<std::string>>();
  d.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), d.dim);
  const auto cov = j.at("covariance").get<std::vector<double>>();
  if (static_cast<int>(cov.size()) != d.dim * d.dim)
    throw InvalidInputError("search distribution: covariance size != dim^2");
  d.covariance.resize(d.dim, d.dim);
  for (int i = 0; i < d.dim; ++i)
    for (int k = 0; k < d.dim; ++k) d.covariance(i, k) = cov[static_cast<std::size_t>(i * d.dim + k)];
  d.step_size = j.at("step_size").get<double>();
  d.generation = j.at("generation").get<int>();
  d.path_sigma = Eigen::VectorXd::Zero(d.dim);
  d.path_cov = Eigen::VectorXd::Zero(d.dim);
  return d;
}

inline void save_search_distribution(const SearchDistribution& dist,
                                     const std::filesystem::path& path) {
  write_json_file(path, search_distribution_to_json(dist));
}

inline SearchDistribution load_search_distribution(const std::filesystem::path& path) {
  return search_distribution_from_json(read_json_file(path));
}

}  // namespace droid
