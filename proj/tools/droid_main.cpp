// Command-line front end for the door-opening pipeline.
//
//   droid <stage> --config cfg.json --out out/ [--seed N] [--stages a,b,c]
//
// Stages: demo | real | identify | train | eval, plus `variants` (the
// identification study across door truths and demo poses) and `report`
// (print the summaries already present in --out). Exit codes: 0 success,
// 2 bad config or input, 3 missing stage dependency, 4 runtime failure.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "droid/harness.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string stages_csv;
};

void add_common(CLI::App* sub, CommonOpts& opts, bool with_stages) {
  sub->add_option("--config", opts.config_path, "experiment config JSON")->required();
  sub->add_option("--out", opts.out_dir, "output directory")->required();
  sub->add_option("--seed", opts.seed, "override every stage seed");
  if (with_stages)
    sub->add_option("--stages", opts.stages_csv,
                    "comma list of pipeline stages to run instead of just this one");
}

droid::ExperimentConfig load_and_override(const CommonOpts& opts) {
  droid::ExperimentConfig cfg;
  try {
    cfg = droid::load_config(opts.config_path);
  } catch (const droid::IoError& e) {
    // Unreadable config is an input problem, not an environment failure.
    throw droid::InvalidConfigError(e.what());
  }
  droid::apply_seed_overrides(cfg, opts.seed);
  return cfg;
}

int run_report(const CommonOpts& opts) {
  const std::filesystem::path out(opts.out_dir);
  const std::filesystem::path summary = out / "eval" / "summary.txt";
  if (!std::filesystem::exists(summary))
    throw droid::StageDependencyError("report requires " + summary.string() +
                                      "; run the eval stage first");
  std::fputs(droid::read_text_file(summary).c_str(), stdout);
  const std::filesystem::path variants = out / "variants" / "variants.csv";
  if (std::filesystem::exists(variants)) {
    std::fputs("\nvariants:\n", stdout);
    std::fputs(droid::read_text_file(variants).c_str(), stdout);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sim2sim door-opening pipeline"};
  app.require_subcommand(1);

  const std::vector<std::string> stage_cmds = {"demo", "real", "identify", "train", "eval"};
  CommonOpts opts;
  for (const auto& name : stage_cmds)
    add_common(app.add_subcommand(name, "run the " + name + " stage"), opts, true);
  add_common(app.add_subcommand("variants", "identification study across truths and poses"),
             opts, false);
  add_common(app.add_subcommand("report", "print summaries from a finished run"), opts, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    if (cmd == "report") return run_report(opts);
    const droid::ExperimentConfig cfg = load_and_override(opts);
    if (cmd == "variants") {
      droid::run_variants(cfg, opts.out_dir);
    } else {
      const std::vector<droid::Stage> stages = opts.stages_csv.empty()
                                                   ? std::vector<droid::Stage>{droid::parse_stage(cmd)}
                                                   : droid::parse_stages(opts.stages_csv);
      droid::run_pipeline(cfg, stages, opts.out_dir);
    }
  } catch (const droid::InvalidConfigError& e) {
    std::fprintf(stderr, "droid: %s\n", e.what());
    return 2;
  } catch (const droid::InvalidInputError& e) {
    std::fprintf(stderr, "droid: %s\n", e.what());
    return 2;
  } catch (const droid::StageDependencyError& e) {
    std::fprintf(stderr, "droid: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "droid: %s\n", e.what());
    return 4;
  }
  return 0;
}
