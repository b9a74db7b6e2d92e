#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "droid/errors.hpp"
#include "droid/rng.hpp"
#include "droid/util.hpp"

namespace droid {

// ---------------------------------------------------------------------------
// Multilayer perceptron with tanh hidden activations and a linear output
// ---------------------------------------------------------------------------

struct Mlp {
  std::vector<Eigen::MatrixXd> weights;  // weights[l]: widths[l+1] x widths[l]
  std::vector<Eigen::VectorXd> biases;

  std::vector<int> widths() const {
    std::vector<int> w;
    if (weights.empty()) return w;
    w.push_back(static_cast<int>(weights.front().cols()));
    for (const auto& m : weights) w.push_back(static_cast<int>(m.rows()));
    return w;
  }
};

struct MlpGrads {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  static MlpGrads zeros_like(const Mlp& net) {
    MlpGrads g;
    for (const auto& w : net.weights) g.weights.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    for (const auto& b : net.biases) g.biases.push_back(Eigen::VectorXd::Zero(b.size()));
    return g;
  }
};

namespace detail {

/// Orthogonal-ish matrix via QR of a Gaussian draw, scaled by `gain`.
inline Eigen::MatrixXd orthogonal_init(int rows, int cols, double gain, Rng& rng) {
  const bool tall = rows >= cols;
  Eigen::MatrixXd a(tall ? rows : cols, tall ? cols : rows);
  for (int i = 0; i < a.rows(); ++i)
    for (int k = 0; k < a.cols(); ++k) a(i, k) = rng.gaussian();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(a.rows(), a.cols());
  // Fix signs so the decomposition is unique given the draw.
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int k = 0; k < q.cols(); ++k)
    if (r(k, k) < 0.0) q.col(k) *= -1.0;
  if (!tall) q.transposeInPlace();
  return gain * q;
}

}  // namespace detail

inline Mlp make_mlp(const std::vector<int>& widths, double hidden_gain, double out_gain,
                    Rng& rng) {
  if (widths.size() < 2) throw InvalidConfigError("make_mlp: need at least 2 layer widths");
  Mlp net;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const bool last = l + 2 == widths.size();
    net.weights.push_back(detail::orthogonal_init(widths[l + 1], widths[l],
                                                  last ? out_gain : hidden_gain, rng));
    net.biases.push_back(Eigen::VectorXd::Zero(widths[l + 1]));
  }
  return net;
}

inline Eigen::VectorXd mlp_forward(const Mlp& net, const Eigen::VectorXd& input) {
  Eigen::VectorXd h = input;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    h = (net.weights[l] * h + net.biases[l]).eval();
    if (l + 1 < net.weights.size()) h = h.array().tanh().matrix();
  }
  return h;
}

/// Column-per-sample batch forward. `activations` (when given) receives the
/// input and each post-tanh hidden activation, for use by mlp_backward_batch.
inline Eigen::MatrixXd mlp_forward_batch(const Mlp& net, const Eigen::MatrixXd& input,
                                         std::vector<Eigen::MatrixXd>* activations = nullptr) {
  if (activations) {
    activations->clear();
    activations->push_back(input);
  }
  Eigen::MatrixXd h = input;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    h = ((net.weights[l] * h).colwise() + net.biases[l]).eval();
    if (l + 1 < net.weights.size()) {
      h = h.array().tanh().matrix();
      if (activations) activations->push_back(h);
    }
  }
  return h;
}

/// Accumulates dLoss/dparams into `grads` given dLoss/doutput (column per sample).
inline void mlp_backward_batch(const Mlp& net, const std::vector<Eigen::MatrixXd>& activations,
                               const Eigen::MatrixXd& dout, MlpGrads* grads) {
  Eigen::MatrixXd delta = dout;
  for (int l = static_cast<int>(net.weights.size()) - 1; l >= 0; --l) {
    const auto lu = static_cast<std::size_t>(l);
    grads->weights[lu] += delta * activations[lu].transpose();
    grads->biases[lu] += delta.rowwise().sum();
    if (l > 0)
      delta = (net.weights[lu].transpose() * delta).array() *
              (1.0 - activations[lu].array().square());
  }
}

// ---------------------------------------------------------------------------
// Policy = actor + critic + state-independent log-std + observation scaling
// ---------------------------------------------------------------------------

constexpr double kLogStdMin = -5.0;
constexpr double kLogStdMax = 2.0;

struct PolicyNet {
  Mlp actor;   // obs_dim -> ... -> action_dim (mean)
  Mlp critic;  // obs_dim -> ... -> 1
  Eigen::VectorXd log_std;
  Eigen::VectorXd obs_mean;  // observation normalization, frozen at save time
  Eigen::VectorXd obs_std;
};

inline PolicyNet make_policy(int obs_dim, int action_dim, std::uint64_t seed) {
  Rng rng(seed);
  PolicyNet net;
  net.actor = make_mlp({obs_dim, 64, 64, action_dim}, 1.0, 0.01, rng);
  net.critic = make_mlp({obs_dim, 64, 64, 1}, 1.0, 1.0, rng);
  net.log_std = Eigen::VectorXd::Constant(action_dim, -0.5);
  net.obs_mean = Eigen::VectorXd::Zero(obs_dim);
  net.obs_std = Eigen::VectorXd::Ones(obs_dim);
  return net;
}

inline Eigen::VectorXd normalize_obs(const PolicyNet& net, const Eigen::VectorXd& obs) {
  return (obs - net.obs_mean).cwiseQuotient(net.obs_std);
}

struct PolicyEvalResult {
  Eigen::VectorXd mean;
  Eigen::VectorXd log_std;
  double value = 0.0;
};

inline PolicyEvalResult policy_eval(const PolicyNet& net, const Eigen::VectorXd& obs) {
  if (!obs.allFinite()) throw InvalidInputError("policy_eval: non-finite observation");
  const Eigen::VectorXd x = normalize_obs(net, obs);
  PolicyEvalResult out;
  out.mean = mlp_forward(net.actor, x);
  out.log_std = net.log_std;
  out.value = mlp_forward(net.critic, x)[0];
  return out;
}

/// Diagonal Gaussian log density.
inline double log_prob(const Eigen::VectorXd& mean, const Eigen::VectorXd& log_std,
                       const Eigen::VectorXd& action) {
  constexpr double kLog2Pi = 1.8378770664093454836;
  const Eigen::ArrayXd z = (action - mean).array() * (-log_std.array()).exp();
  return -0.5 * z.square().sum() - log_std.sum() -
         0.5 * kLog2Pi * static_cast<double>(mean.size());
}

// ---------------------------------------------------------------------------
// Generalized advantage estimation
// ---------------------------------------------------------------------------

/// Standard GAE recursion; terminal_value bootstraps the state after the last
/// reward (0 for true terminations). returns = advantages + values.
inline std::pair<std::vector<double>, std::vector<double>> gae(
    const std::vector<double>& rewards, const std::vector<double>& values, double terminal_value,
    double discount, double gae_lambda) {
  if (rewards.size() != values.size()) throw InvalidInputError("gae: length mismatch");
  const std::size_t n = rewards.size();
  std::vector<double> advantages(n), returns(n);
  double acc = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const double next_value = i + 1 < n ? values[i + 1] : terminal_value;
    const double delta = rewards[i] + discount * next_value - values[i];
    acc = delta + discount * gae_lambda * acc;
    advantages[i] = acc;
    returns[i] = acc + values[i];
  }
  return {std::move(advantages), std::move(returns)};
}

// ---------------------------------------------------------------------------
// PPO update
// ---------------------------------------------------------------------------

struct PpoConfig {
  double clip = 0.2;
  double discount = 0.99;
  double gae_lambda = 0.95;
  double learn_rate = 0.001;
  int minibatch = 64;
  int epochs_per_update = 10;
  int horizon = 512;
  int rollout_episodes_per_update = 4;
  int total_updates = 300;
  std::uint64_t seed = 0;
};

/// Experience batch, column per sample. Observations are raw (the network
/// applies its own frozen normalization).
struct PpoBatch {
  Eigen::MatrixXd obs;
  Eigen::MatrixXd actions;
  Eigen::VectorXd old_log_prob;
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;

  Eigen::Index size() const { return obs.cols(); }
};

struct PpoDiagnostics {
  double mean_ratio = 1.0;
  double clip_fraction = 0.0;
  double policy_loss = 0.0;   // -mean(surrogate)
  double value_loss = 0.0;    // mean squared value error
  double entropy = 0.0;
  double surrogate_mean = 0.0;
  double initial_ratio_error = 0.0;  // max |r - 1| before the first gradient step
};

/// Adam moments for every trainable block, in a fixed flat order:
/// actor weights/biases, critic weights/biases, log_std.
struct AdamState {
  std::vector<Eigen::ArrayXXd> m, v;
  long t = 0;

  static AdamState zeros_like(const PolicyNet& net) {
    AdamState s;
    auto add = [&s](Eigen::Index rows, Eigen::Index cols) {
      s.m.emplace_back(Eigen::ArrayXXd::Zero(rows, cols));
      s.v.emplace_back(Eigen::ArrayXXd::Zero(rows, cols));
    };
    for (const auto& w : net.actor.weights) add(w.rows(), w.cols());
    for (const auto& b : net.actor.biases) add(b.size(), 1);
    for (const auto& w : net.critic.weights) add(w.rows(), w.cols());
    for (const auto& b : net.critic.biases) add(b.size(), 1);
    add(net.log_std.size(), 1);
    return s;
  }
};

namespace detail {

struct PolicyGrads {
  MlpGrads actor;
  MlpGrads critic;
  Eigen::VectorXd log_std;
};

/// Minibatch loss = -surrogate + 0.5 * value MSE - 0.01 * entropy, with
/// analytic gradients. Advantages are taken as given (normalize beforehand).
inline double ppo_loss_and_grads(const PolicyNet& net, const PpoBatch& batch, double clip,
                                 PolicyGrads* grads, PpoDiagnostics* diag = nullptr) {
  const Eigen::Index n = batch.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  const Eigen::MatrixXd x =
      ((batch.obs.colwise() - net.obs_mean).array().colwise() / net.obs_std.array()).matrix();

  std::vector<Eigen::MatrixXd> actor_acts, critic_acts;
  const Eigen::MatrixXd mean = mlp_forward_batch(net.actor, x, &actor_acts);
  const Eigen::MatrixXd value = mlp_forward_batch(net.critic, x, &critic_acts);

  const Eigen::ArrayXd inv_sigma = (-net.log_std.array()).exp();
  const Eigen::ArrayXXd z =
      (batch.actions - mean).array().colwise() * inv_sigma;  // (a - m) / sigma

  constexpr double kLog2Pi = 1.8378770664093454836;
  const double log_norm =
      net.log_std.sum() + 0.5 * kLog2Pi * static_cast<double>(net.log_std.size());
  const Eigen::ArrayXd new_log_prob =
      -0.5 * z.square().colwise().sum().transpose() - log_norm;
  const Eigen::ArrayXd ratio = (new_log_prob - batch.old_log_prob.array()).exp();

  const Eigen::ArrayXd adv = batch.advantages.array();
  const Eigen::ArrayXd unclipped = ratio * adv;
  const Eigen::ArrayXd clipped = ratio.min(1.0 + clip).max(1.0 - clip) * adv;
  const Eigen::ArrayXd surrogate = unclipped.min(clipped);

  // Gradient flows through the unclipped branch only where it is active.
  const Eigen::ArrayXd active =
      (unclipped <= clipped).cast<double>();  // min picks the unclipped side
  const Eigen::ArrayXd coef = active * ratio * adv;  // d surrogate / d new_log_prob

  const Eigen::ArrayXd value_err = value.row(0).transpose().array() - batch.returns.array();

  constexpr double kEntropyCoef = 0.01;
  const double entropy_per_sample =
      net.log_std.sum() + 0.5 * (1.0 + kLog2Pi) * static_cast<double>(net.log_std.size());

  const double policy_loss = -surrogate.mean();
  const double value_loss = value_err.square().mean();
  const double loss = policy_loss + 0.5 * value_loss - kEntropyCoef * entropy_per_sample;

  if (grads) {
    // d new_log_prob / d mean = z / sigma, column-scaled by coef and -1/n.
    const Eigen::MatrixXd dmean =
        ((z.colwise() * inv_sigma).rowwise() * (-inv_n * coef.transpose())).matrix();
    mlp_backward_batch(net.actor, actor_acts, dmean, &grads->actor);

    Eigen::MatrixXd dvalue(1, n);
    dvalue.row(0) = (inv_n * value_err).transpose();
    mlp_backward_batch(net.critic, critic_acts, dvalue, &grads->critic);

    // d new_log_prob / d log_std_j = z_j^2 - 1 per sample.
    grads->log_std +=
        (-inv_n * ((z.square().rowwise() * coef.transpose()).rowwise().sum() - coef.sum()))
            .matrix();
    grads->log_std.array() -= kEntropyCoef;
  }

  if (diag) {
    diag->mean_ratio = ratio.mean();
    diag->clip_fraction = ((ratio > 1.0 + clip) || (ratio < 1.0 - clip)).cast<double>().mean();
    diag->policy_loss = policy_loss;
    diag->value_loss = value_loss;
    diag->entropy = entropy_per_sample;
    diag->surrogate_mean = surrogate.mean();
  }
  return loss;
}

inline void adam_step(Eigen::Ref<Eigen::ArrayXXd> param, const Eigen::ArrayXXd& grad,
                      Eigen::ArrayXXd& m, Eigen::ArrayXXd& v, long t, double lr) {
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  m = kBeta1 * m + (1.0 - kBeta1) * grad;
  v = kBeta2 * v + (1.0 - kBeta2) * grad.square();
  const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(t));
  param -= lr * (m / bc1) / ((v / bc2).sqrt() + kEps);
}

}  // namespace detail

/// Normalizes advantages (zero mean / unit std) in place; degenerate batches
/// (size < 2 or zero spread) are left raw so single-sample objectives keep
/// their literal value.
inline void normalize_advantages(Eigen::VectorXd& adv) {
  if (adv.size() < 2) return;
  const double mean = adv.mean();
  const double var = (adv.array() - mean).square().mean();
  const double std = std::sqrt(var);
  if (std < 1e-12) return;
  adv = ((adv.array() - mean) / std).matrix();
}

/// Clipped-surrogate PPO update over shuffled minibatches. `adam` carries
/// optimizer moments across updates; pass nullptr for a fresh state.
inline std::pair<PolicyNet, PpoDiagnostics> ppo_update(const PolicyNet& net_in,
                                                       const PpoBatch& batch_in,
                                                       const PpoConfig& cfg,
                                                       AdamState* adam = nullptr) {
  if (batch_in.size() == 0) throw InvalidInputError("ppo_update: empty batch");
  PolicyNet net = net_in;
  PpoDiagnostics total;
  if (cfg.epochs_per_update == 0) return {std::move(net), total};

  PpoBatch batch = batch_in;
  normalize_advantages(batch.advantages);

  AdamState local;
  if (!adam) {
    local = AdamState::zeros_like(net);
    adam = &local;
  }

  const Eigen::Index n = batch.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng(mix_seed(cfg.seed, 0x5u));

  {
    // Ratio identity r_t(theta_old) = 1 before the first gradient step.
    const Eigen::MatrixXd x =
        ((batch.obs.colwise() - net.obs_mean).array().colwise() / net.obs_std.array()).matrix();
    const Eigen::MatrixXd mean = mlp_forward_batch(net.actor, x);
    const Eigen::ArrayXd inv_sigma = (-net.log_std.array()).exp();
    const Eigen::ArrayXXd z = (batch.actions - mean).array().colwise() * inv_sigma;
    constexpr double kLog2Pi = 1.8378770664093454836;
    const double log_norm =
        net.log_std.sum() + 0.5 * kLog2Pi * static_cast<double>(net.log_std.size());
    const Eigen::ArrayXd lp = -0.5 * z.square().colwise().sum().transpose() - log_norm;
    total.initial_ratio_error = ((lp - batch.old_log_prob.array()).exp() - 1.0).abs().maxCoeff();
    if (total.initial_ratio_error > 1e-6)
      throw DivergedUpdateError("ppo_update: old_log_prob inconsistent with the given network");
  }

  long samples_seen = 0;
  double ratio_sum = 0.0, clip_sum = 0.0, policy_sum = 0.0, value_sum = 0.0, entropy_sum = 0.0,
         surrogate_sum = 0.0;
  long minibatches = 0;

  for (int epoch = 0; epoch < cfg.epochs_per_update; ++epoch) {
    for (Eigen::Index i = n - 1; i > 0; --i)
      std::swap(order[static_cast<std::size_t>(i)],
                order[static_cast<std::size_t>(shuffle_rng.uniform_int(static_cast<int>(i) + 1))]);
    for (Eigen::Index start = 0; start < n; start += cfg.minibatch) {
      const Eigen::Index count = std::min<Eigen::Index>(cfg.minibatch, n - start);
      PpoBatch mb;
      mb.obs.resize(batch.obs.rows(), count);
      mb.actions.resize(batch.actions.rows(), count);
      mb.old_log_prob.resize(count);
      mb.advantages.resize(count);
      mb.returns.resize(count);
      for (Eigen::Index k = 0; k < count; ++k) {
        const Eigen::Index src = order[static_cast<std::size_t>(start + k)];
        mb.obs.col(k) = batch.obs.col(src);
        mb.actions.col(k) = batch.actions.col(src);
        mb.old_log_prob[k] = batch.old_log_prob[src];
        mb.advantages[k] = batch.advantages[src];
        mb.returns[k] = batch.returns[src];
      }

      detail::PolicyGrads grads{MlpGrads::zeros_like(net.actor), MlpGrads::zeros_like(net.critic),
                                Eigen::VectorXd::Zero(net.log_std.size())};
      PpoDiagnostics diag;
      const double loss = detail::ppo_loss_and_grads(net, mb, cfg.clip, &grads, &diag);
      if (!std::isfinite(loss)) throw DivergedUpdateError("ppo_update: non-finite loss");

      ++adam->t;
      std::size_t slot = 0;
      auto step_matrix = [&](Eigen::MatrixXd& param, const Eigen::MatrixXd& grad) {
        Eigen::ArrayXXd p = param.array();
        detail::adam_step(p, grad.array(), adam->m[slot], adam->v[slot], adam->t, cfg.learn_rate);
        param = p.matrix();
        ++slot;
      };
      auto step_vector = [&](Eigen::VectorXd& param, const Eigen::VectorXd& grad) {
        Eigen::ArrayXXd p = param.array();
        detail::adam_step(p, grad.array(), adam->m[slot], adam->v[slot], adam->t, cfg.learn_rate);
        param = p.matrix();
        ++slot;
      };
      for (std::size_t l = 0; l < net.actor.weights.size(); ++l)
        step_matrix(net.actor.weights[l], grads.actor.weights[l]);
      for (std::size_t l = 0; l < net.actor.biases.size(); ++l)
        step_vector(net.actor.biases[l], grads.actor.biases[l]);
      for (std::size_t l = 0; l < net.critic.weights.size(); ++l)
        step_matrix(net.critic.weights[l], grads.critic.weights[l]);
      for (std::size_t l = 0; l < net.critic.biases.size(); ++l)
        step_vector(net.critic.biases[l], grads.critic.biases[l]);
      step_vector(net.log_std, grads.log_std);
      net.log_std = net.log_std.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);

      samples_seen += count;
      ratio_sum += diag.mean_ratio * static_cast<double>(count);
      clip_sum += diag.clip_fraction * static_cast<double>(count);
      policy_sum += diag.policy_loss;
      value_sum += diag.value_loss;
      entropy_sum += diag.entropy;
      surrogate_sum += diag.surrogate_mean;
      ++minibatches;
    }
  }

  total.mean_ratio = ratio_sum / static_cast<double>(samples_seen);
  total.clip_fraction = clip_sum / static_cast<double>(samples_seen);
  total.policy_loss = policy_sum / static_cast<double>(minibatches);
  total.value_loss = value_sum / static_cast<double>(minibatches);
  total.entropy = entropy_sum / static_cast<double>(minibatches);
  total.surrogate_mean = surrogate_sum / static_cast<double>(minibatches);
  return {std::move(net), total};
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace detail {

inline json mlp_to_json(const Mlp& net) {
  json j;
  j["widths"] = net.widths();
  json weights = json::array(), biases = json::array();
  for (const auto& w : net.weights) {
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(w.size()));
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) flat.push_back(w(r, c));
    weights.push_back(flat);
  }
  for (const auto& b : net.biases)
    biases.push_back(std::vector<double>(b.data(), b.data() + b.size()));
  j["weights"] = std::move(weights);
  j["biases"] = std::move(biases);
  return j;
}

inline Mlp mlp_from_json(const json& j) {
  const auto widths = j.at("widths").get<std::vector<int>>();
  if (widths.size() < 2) throw InvalidInputError("policy json: bad widths");
  Mlp net;
  const auto weights = j.at("weights");
  const auto biases = j.at("biases");
  if (weights.size() != widths.size() - 1 || biases.size() != widths.size() - 1)
    throw InvalidInputError("policy json: layer count mismatch");
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const auto flat = weights.at(l).get<std::vector<double>>();
    const int rows = widths[l + 1], cols = widths[l];
    if (static_cast<int>(flat.size()) != rows * cols)
      throw InvalidInputError("policy json: weight size mismatch");
    Eigen::MatrixXd w(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) w(r, c) = flat[static_cast<std::size_t>(r * cols + c)];
    net.weights.push_back(std::move(w));
    const auto bias = biases.at(l).get<std::vector<double>>();
    if (static_cast<int>(bias.size()) != rows)
      throw InvalidInputError("policy json: bias size mismatch");
    net.biases.push_back(Eigen::Map<const Eigen::VectorXd>(bias.data(), rows));
  }
  return net;
}

}  // namespace detail

inline json policy_to_json(const PolicyNet& net) {
  json j;
  j["actor"] = detail::mlp_to_json(net.actor);
  j["critic"] = detail::mlp_to_json(net.critic);
  j["log_std"] = std::vector<double>(net.log_std.data(), net.log_std.data() + net.log_std.size());
  j["obs_mean"] =
      std::vector<double>(net.obs_mean.data(), net.obs_mean.data() + net.obs_mean.size());
  j["obs_std"] = std::vector<double>(net.obs_std.data(), net.obs_std.data() + net.obs_std.size());
  return j;
}

inline PolicyNet policy_from_json(const json& j) {
  PolicyNet net;
  net.actor = detail::mlp_from_json(j.at("actor"));
  net.critic = detail::mlp_from_json(j.at("critic"));
  const auto ls = j.at("log_std").get<std::vector<double>>();
  net.log_std = Eigen::Map<const Eigen::VectorXd>(ls.data(), static_cast<Eigen::Index>(ls.size()));
  const auto om = j.at("obs_mean").get<std::vector<double>>();
  net.obs_mean = Eigen::Map<const Eigen::VectorXd>(om.data(), static_cast<Eigen::Index>(om.size()));
  const auto os = j.at("obs_std").get<std::vector<double>>();
  net.obs_std = Eigen::Map<const Eigen::VectorXd>(os.data(), static_cast<Eigen::Index>(os.size()));
  return net;
}

inline void save_policy(const PolicyNet& net, const std::filesystem::path& path) {
  write_json_file(path, policy_to_json(net));
}

inline PolicyNet load_policy(const std::filesystem::path& path) {
  return policy_from_json(read_json_file(path));
}

}  // namespace droid
