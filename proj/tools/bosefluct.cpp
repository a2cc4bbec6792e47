#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "bosefluct/pipeline.hpp"

using namespace bosefluct;

namespace {

nlohmann::json summary(const StageReport& r) { return {{"files", r.files}, {"achieved", r.achieved}}; }

int run(const std::string& cmd, const RunConfig& cfg) {
  const std::filesystem::path dir = cfg.output.dir;
  std::filesystem::create_directories(dir);
  nlohmann::json out;
  if (cmd == "scattering") {
    out = summary(run_scattering(cfg, dir));
  } else if (cmd == "condensate") {
    out = summary(run_condensate(cfg, dir));
  } else if (cmd == "evolve") {
    out = summary(run_evolve(cfg, dir));
  } else if (cmd == "covariance") {
    out = summary(run_covariance(cfg, dir));
  } else if (cmd == "oracle-verify") {
    out = run_oracle_verify(cfg);
    std::ofstream(dir / "oracle.json") << out.dump(2) << "\n";
    std::cout << out.dump() << "\n";
    return out["pass"].get<bool>() ? exit_ok : exit_verdict_failed;
  } else {
    out = run_full_pipeline(cfg, dir);
    std::cout << out.dump(2) << "\n";
    return out["achieved"]["oracle_pass"].get<bool>() ? exit_ok : exit_verdict_failed;
  }
  out["config_hash"] = config_hash(cfg);
  std::cout << out.dump(2) << "\n";
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian fluctuation statistics of a Bose gas with scaled singular interaction"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  bool print_config = false;
  auto* opt_config = app.add_option("--config", config_path, "sectioned key-value configuration file")
                         ->check(CLI::ExistingFile);
  app.add_option("--set", overrides, "override, section.key=value (repeatable)")->allow_extra_args(false);
  auto* opt_out = app.add_option("--out", out_dir, "output directory");
  auto* opt_seed = app.add_option("--seed", seed, "seed for randomised checks");
  app.add_flag("--print-config", print_config, "print the resolved configuration and exit");
  for (const char* name : {"scattering", "condensate", "evolve", "covariance", "oracle-verify", "full-pipeline"})
    app.add_subcommand(name)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? exit_ok : exit_config;
  }

  try {
    RunConfig cfg = opt_config->count() ? load_config(config_path) : RunConfig{};
    for (const auto& s : overrides) apply_override(cfg, s);
    if (opt_out->count()) cfg.output.dir = out_dir;
    if (opt_seed->count()) cfg.run.seed = seed;
    validate(cfg);
    if (print_config) {
      std::cout << serialize_config(cfg);
      return exit_ok;
    }
    return run(app.get_subcommands().front()->get_name(), cfg);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return exit_config;
  } catch (const PreconditionError& e) {
    std::cerr << "precondition violated: " << e.what() << "\n";
    return exit_precondition;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return exit_solver;
  } catch (const InconclusiveError& e) {
    std::cerr << "inconclusive: " << e.what() << "\n";
    return exit_inconclusive;
  } catch (const StructuralError& e) {
    std::cerr << "structural error: " << e.what() << "\n";
    return exit_structural;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_internal;
  }
}
