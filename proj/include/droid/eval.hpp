#pragma once
// Transfer evaluation on a held-out environment: success metrics, opening
// histograms and knob-offset generalization, plus the CSV/plain-text report.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "droid/errors.hpp"
#include "droid/policy.hpp"
#include "droid/rl.hpp"
#include "droid/simenv.hpp"
#include "droid/util.hpp"

namespace droid {

constexpr int kEvalHorizon = 512;
constexpr double kHistogramBinDeg = 10.0;
constexpr double kHistogramMaxDeg = 90.0;
constexpr int kHistogramBins = 9;

struct EvalEpisodeRow {
  int episode = 0;
  std::uint64_t seed = 0;
  double max_angle_deg = 0.0;
  int steps_to_30 = -1;  // control steps to first crossing, -1 if never
  bool success = false;
};

struct EvalReport {
  std::string method;
  int episodes = 0;
  double success_rate = 0.0;
  double open_angle_mean = 0.0;  // degrees, mean of per-episode maxima
  double open_angle_std = 0.0;
  double open_steps_mean = 0.0;  // control steps, opened episodes only
  double open_steps_std = 0.0;
  int opened_count = 0;
  std::vector<double> bin_edges;      // degrees: 0, 10, ..., 90
  std::vector<double> bin_fractions;  // one per bin
  std::vector<EvalEpisodeRow> raw;
};

using EvalController = std::function<Eigen::Vector2d(const MdpObservation&)>;

namespace detail {

inline EvalEpisodeRow run_eval_episode(const EvalController& act, const DynParams& phi,
                                       const WorldConfig& world, const RewardWeights& w,
                                       std::uint64_t seed) {
  EvalEpisodeRow row;
  row.seed = seed;
  const EnvResetResult reset = env_reset(phi, world, seed);
  SimState state = reset.state;
  MdpObservation obs = reset.obs;
  double max_angle = state.door_angle;
  for (int t = 0; t < kEvalHorizon; ++t) {
    const EnvStepResult sr = env_step(state, phi, act(obs), world, w);
    state = sr.state;
    obs = sr.obs;
    max_angle = std::max(max_angle, state.door_angle);
    if (row.steps_to_30 < 0 && state.door_angle > kSuccessAngle) row.steps_to_30 = t + 1;
    if (sr.done) break;
  }
  row.max_angle_deg = max_angle * 180.0 / 3.14159265358979323846;
  row.success = row.max_angle_deg > 30.0;
  return row;
}

inline EvalReport aggregate_report(std::vector<EvalEpisodeRow> raw, const std::string& label) {
  EvalReport report;
  report.method = label;
  report.episodes = static_cast<int>(raw.size());
  report.raw = std::move(raw);

  std::vector<long> bin_counts(kHistogramBins, 0);
  double angle_sum = 0.0, angle_sq = 0.0, steps_sum = 0.0, steps_sq = 0.0;
  for (const auto& row : report.raw) {
    if (row.success) {
      ++report.opened_count;
      steps_sum += row.steps_to_30;
      steps_sq += static_cast<double>(row.steps_to_30) * row.steps_to_30;
    }
    angle_sum += row.max_angle_deg;
    angle_sq += row.max_angle_deg * row.max_angle_deg;
    const int bin = std::clamp(static_cast<int>(std::floor(row.max_angle_deg / kHistogramBinDeg)),
                               0, kHistogramBins - 1);
    ++bin_counts[static_cast<std::size_t>(bin)];
  }

  const double n = static_cast<double>(report.episodes);
  report.success_rate = static_cast<double>(report.opened_count) / n;
  report.open_angle_mean = angle_sum / n;
  report.open_angle_std =
      std::sqrt(std::max(0.0, angle_sq / n - report.open_angle_mean * report.open_angle_mean));
  if (report.opened_count > 0) {
    const double m = static_cast<double>(report.opened_count);
    report.open_steps_mean = steps_sum / m;
    report.open_steps_std = std::sqrt(
        std::max(0.0, steps_sq / m - report.open_steps_mean * report.open_steps_mean));
  }

  for (int b = 0; b <= kHistogramBins; ++b) report.bin_edges.push_back(b * kHistogramBinDeg);
  for (int b = 0; b < kHistogramBins; ++b)
    report.bin_fractions.push_back(static_cast<double>(bin_counts[static_cast<std::size_t>(b)]) /
                                   n);
  return report;
}

/// Shared driver so scripted controllers and policies report identically.
inline EvalReport evaluate_controller(const EvalController& act, const DynParams& phi,
                                      const WorldConfig& world, const RewardWeights& w,
                                      int episodes, std::uint64_t base_seed,
                                      const std::string& label) {
  if (episodes < 1) throw InvalidInputError("evaluate: episodes must be >= 1");
  std::vector<EvalEpisodeRow> raw;
  raw.reserve(static_cast<std::size_t>(episodes));
  for (int e = 0; e < episodes; ++e) {
    EvalEpisodeRow row = run_eval_episode(act, phi, world, w, mix_seed(base_seed,
                                          static_cast<std::uint64_t>(e)));
    row.episode = e;
    raw.push_back(row);
  }
  return aggregate_report(std::move(raw), label);
}

}  // namespace detail

/// Deterministic-mean-action rollouts (no exploration noise) on a fixed
/// held-out environment, with seeded reset jitter.
inline EvalReport evaluate_transfer(const PolicyNet& policy, const DynParams& phi_real,
                                    const WorldConfig& world, const RewardWeights& w,
                                    int episodes, std::uint64_t base_seed,
                                    const std::string& label = "policy") {
  const EvalController act = [&policy](const MdpObservation& obs) -> Eigen::Vector2d {
    const PolicyEvalResult head = policy_eval(policy, obs.to_vector());
    return {head.mean[0], head.mean[1]};
  };
  return detail::evaluate_controller(act, phi_real, world, w, episodes, base_seed, label);
}

/// Rejects knob arcs that leave the arm workspace anywhere over the door
/// travel range.
inline void require_arc_reachable(const WorldConfig& world) {
  const double reach = world.link_lengths.sum();
  const double inner = std::abs(world.link_lengths[0] - world.link_lengths[1]);
  for (int i = 0; i <= 2000; ++i) {
    const double angle =
        kDoorAngleMin + (kDoorAngleMax - kDoorAngleMin) * static_cast<double>(i) / 2000.0;
    const double r = knob_position(angle, world).norm();
    if (r > reach + 1e-9 || r < inner - 1e-9)
      throw OutOfWorkspaceError("knob arc leaves the arm workspace at door angle " +
                                format_double(angle));
  }
}

/// One report per knob-radius offset; the policy sees the moved knob only
/// through its knob-relative observation.
inline std::vector<EvalReport> knob_generalization(const PolicyNet& policy,
                                                   const DynParams& phi_real,
                                                   const WorldConfig& world,
                                                   const RewardWeights& w,
                                                   const std::vector<double>& offsets,
                                                   int episodes, std::uint64_t seed,
                                                   const std::string& label = "policy") {
  if (offsets.empty()) throw InvalidInputError("knob_generalization: offsets must be non-empty");
  std::vector<EvalReport> reports;
  reports.reserve(offsets.size());
  for (double offset : offsets) {
    WorldConfig moved = world;
    moved.knob_radius += offset;
    validate_world(moved);
    require_arc_reachable(moved);
    std::ostringstream name;
    name << label << "+" << format_double(offset) << "m";
    reports.push_back(
        evaluate_transfer(policy, phi_real, moved, w, episodes, seed, name.str()));
  }
  return reports;
}

// ---------------------------------------------------------------------------
// Report emission
// ---------------------------------------------------------------------------

inline std::string results_to_csv(const std::vector<EvalReport>& reports) {
  std::ostringstream os;
  os << "method,episodes,success_rate,open_angle_mean_deg,open_angle_std_deg,"
        "open_steps_mean,open_steps_std,opened_count\n";
  for (const auto& r : reports)
    os << r.method << ',' << r.episodes << ',' << format_double(r.success_rate) << ','
       << format_double(r.open_angle_mean) << ',' << format_double(r.open_angle_std) << ','
       << format_double(r.open_steps_mean) << ',' << format_double(r.open_steps_std) << ','
       << r.opened_count << '\n';
  return os.str();
}

inline std::string histogram_to_csv(const std::vector<EvalReport>& reports) {
  std::ostringstream os;
  os << "method,bin_low_deg,bin_high_deg,fraction\n";
  for (const auto& r : reports)
    for (std::size_t b = 0; b + 1 < r.bin_edges.size(); ++b)
      os << r.method << ',' << format_double(r.bin_edges[b]) << ','
         << format_double(r.bin_edges[b + 1]) << ',' << format_double(r.bin_fractions[b])
         << '\n';
  return os.str();
}

inline std::string episodes_raw_to_csv(const std::vector<EvalReport>& reports) {
  std::ostringstream os;
  os << "method,episode,seed,max_angle_deg,steps_to_30,success\n";
  for (const auto& r : reports)
    for (const auto& row : r.raw)
      os << r.method << ',' << row.episode << ',' << row.seed << ','
         << format_double(row.max_angle_deg) << ',' << row.steps_to_30 << ','
         << (row.success ? 1 : 0) << '\n';
  return os.str();
}

inline std::string summary_text(const std::vector<EvalReport>& reports) {
  std::ostringstream os;
  os << "Transfer evaluation (open steps counted in 50 Hz control steps)\n";
  os << std::left << std::setw(24) << "method" << std::right << std::setw(10) << "success"
     << std::setw(16) << "angle_deg" << std::setw(16) << "open_steps" << std::setw(9)
     << "opened" << '\n';
  for (const auto& r : reports) {
    std::ostringstream angle, steps;
    angle << std::fixed << std::setprecision(1) << r.open_angle_mean << " +- "
          << r.open_angle_std;
    steps << std::fixed << std::setprecision(1) << r.open_steps_mean << " +- "
          << r.open_steps_std;
    os << std::left << std::setw(24) << r.method << std::right << std::setw(10) << std::fixed
       << std::setprecision(3) << r.success_rate << std::setw(16) << angle.str()
       << std::setw(16) << steps.str() << std::setw(9) << r.opened_count << '\n';
  }
  return os.str();
}

/// Writes results.csv, histogram.csv, episodes_raw.csv and summary.txt.
inline void emit_report(const std::vector<EvalReport>& reports,
                        const std::filesystem::path& dir) {
  if (reports.empty()) throw InvalidInputError("emit_report: no reports");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("emit_report: cannot create " + dir.string());
  write_text_file(dir / "results.csv", results_to_csv(reports));
  write_text_file(dir / "histogram.csv", histogram_to_csv(reports));
  write_text_file(dir / "episodes_raw.csv", episodes_raw_to_csv(reports));
  write_text_file(dir / "summary.txt", summary_text(reports));
}

}  // namespace droid
