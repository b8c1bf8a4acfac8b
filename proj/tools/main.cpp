#include "CLI11.hpp"

#include "chemo/scenario.hpp"

#include <cstdio>

namespace {

int report_config_error(const chemo::ConfigError& e) {
  std::fprintf(stderr, "config error:\n");
  for (const std::string& p : e.problems)
    std::fprintf(stderr, "  %s\n", p.c_str());
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chemostat growth-curve reconstruction toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  long seed = -1;
  bool quiet = false;

  CLI::App* run = app.add_subcommand("run", "execute a scenario");
  run->add_option("config", config_path, "scenario file")->required();
  run->add_option("--out-dir", out_dir, "output directory override");
  run->add_option("--seed", seed, "seed override");
  run->add_flag("--quiet", quiet, "suppress the summary on stdout");

  CLI::App* validate = app.add_subcommand("validate", "check a scenario file");
  validate->add_option("config", config_path, "scenario file")->required();

  CLI::App* oracle = app.add_subcommand(
      "oracle", "emit reference outputs (oracle curve or eigenvalue table)");
  oracle->add_option("config", config_path, "scenario file")->required();
  oracle->add_option("--out-dir", out_dir, "output directory override");

  CLI11_PARSE(app, argc, argv);

  try {
    chemo::ScenarioConfig cfg = chemo::load_config(config_path);
    if (seed >= 0) cfg.seed = (unsigned long)seed;
    const std::filesystem::path dir(out_dir.empty() ? cfg.out_dir : out_dir);

    if (validate->parsed()) {
      std::printf("%s: ok\n", config_path.c_str());
      return 0;
    }
    if (oracle->parsed()) {
      const chemo::RunReport r = chemo::write_reference_outputs(cfg, dir);
      std::fputs(r.summary.c_str(), stdout);
      return r.exit_code;
    }
    const chemo::RunReport r = chemo::run_scenario(cfg, dir, quiet);
    return r.exit_code;
  } catch (const chemo::ConfigError& e) {
    return report_config_error(e);
  } catch (const chemo::NumericalBlowup& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
