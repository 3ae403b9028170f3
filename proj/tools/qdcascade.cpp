// qdcascade: configuration-driven runner for the XX-X cascade simulator.
//
// Subcommands select the experiment; --config provides the base
// configuration and repeated --set key=value overrides are applied after
// the file parse. Exit codes: 0 success, 2 configuration error, 3 runtime
// error.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qdc/config.hpp"
#include "qdc/io_util.hpp"
#include "qdc/runner.hpp"
#include "qdc/version.hpp"

namespace {

int run_experiment(const std::string& experiment, const std::string& config_path,
                   const std::vector<std::string>& overrides) {
  qdc::ExperimentConfig cfg;
  try {
    cfg = qdc::parse_config_file(config_path);
    if (!experiment.empty()) cfg.experiment = experiment;
    for (const auto& o : overrides) qdc::apply_override(cfg, o);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  }

  const auto problems = cfg.problems();
  if (!problems.empty()) {
    for (const auto& p : problems)
      std::fprintf(stderr, "config error: %s\n", p.c_str());
    return 2;
  }

  try {
    const qdc::RunManifest m = qdc::run(cfg);
    std::printf("wrote %zu artifacts to %s\n", m.artifacts.size(),
                cfg.output_dir.c_str());
    return 0;
  } catch (const qdc::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "runtime error: %s\n", e.what());
    return 3;
  }
}

int validate_only(const std::string& config_path,
                  const std::vector<std::string>& overrides) {
  try {
    qdc::ExperimentConfig cfg = qdc::parse_config_file(config_path);
    for (const auto& o : overrides) qdc::apply_override(cfg, o);
    const auto problems = cfg.problems();
    if (problems.empty()) {
      std::printf("ok\n");
      return 0;
    }
    for (const auto& p : problems)
      std::fprintf(stderr, "config error: %s\n", p.c_str());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"XX-X cascade simulator and analysis toolkit"};
  app.set_version_flag("--version", std::string(qdc::kVersion));
  app.require_subcommand(1);

  const std::vector<std::string> experiments = {
      "cascade-scan", "tomography", "cross-correlation", "hom",
      "g2",           "rabi",       "fss"};

  struct SubArgs {
    std::string config;
    std::vector<std::string> overrides;
  };
  std::vector<SubArgs> args(experiments.size() + 1);

  for (std::size_t i = 0; i < experiments.size(); ++i) {
    auto* sub = app.add_subcommand(experiments[i],
                                   "run the " + experiments[i] + " pipeline");
    sub->add_option("--config", args[i].config, "configuration file")
        ->required();
    sub->add_option("--set", args[i].overrides,
                    "override, key=value; repeatable");
  }
  auto* val = app.add_subcommand("validate",
                                 "check a configuration without running");
  val->add_option("--config", args.back().config, "configuration file")
      ->required();
  val->add_option("--set", args.back().overrides,
                  "override, key=value; repeatable");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  for (std::size_t i = 0; i < experiments.size(); ++i)
    if (app.get_subcommand(experiments[i])->parsed())
      return run_experiment(experiments[i], args[i].config, args[i].overrides);
  if (val->parsed()) return validate_only(args.back().config, args.back().overrides);
  return 2;
}
