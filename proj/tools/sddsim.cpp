// sddsim: command-line front end for the simulator and diagnostics.
//
//   sddsim <simulate|pair|dissipativity|dimension|validate> --config FILE [--out DIR] [--seed N]
//   sddsim resume --from DIR --additional-T T [--out DIR]
//
// Exit codes: 0 success, 1 failed check, 2 configuration error, 3 blow-up.

#include "sdd/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Spectral-Galerkin simulator for parabolic equations with state-dependent delay"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  for (const char* kind : {"simulate", "pair", "dissipativity", "dimension", "validate"}) {
    auto* sub = app.add_subcommand(kind, std::string("run a ") + kind + " experiment");
    auto* cfg = sub->add_option("--config", config_path, "experiment configuration (JSON)");
    if (std::string(kind) != "validate") cfg->required();
    sub->add_option("--out", out_dir, "output directory (overrides the config and SDD_OUT_DIR)");
    sub->add_option("--seed", seed, "random seed (overrides experiment.seed)");
  }
  std::string from;
  double additional_T = 0.0;
  auto* resume = app.add_subcommand("resume", "continue a simulate run from its state dump");
  resume->add_option("--from", from, "directory of a finished simulate run")->required();
  resume->add_option("--additional-T", additional_T, "extra integration time")->required();
  resume->add_option("--out", out_dir, "output directory (defaults to --from)");

  CLI11_PARSE(app, argc, argv);
  const CLI::App* chosen = app.get_subcommands().front();

  try {
    if (chosen == resume) return sdd::resume_run(from, additional_T, out_dir.value_or(from));

    const auto kind = sdd::parse_experiment_kind(chosen->get_name());
    sdd::ExperimentConfig cfg =
        config_path.empty() ? sdd::parse_config(nlohmann::json::object(), kind, seed)
                            : sdd::load_config(config_path, kind, seed);
    const auto out = sdd::resolve_output_dir(cfg, out_dir);
    const int status = sdd::run_experiment(cfg, out);
    std::cout << chosen->get_name() << ": " << (status == 0 ? "ok" : "failed") << ", artifacts in " << out.string()
              << '\n';
    return status;
  } catch (const sdd::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return sdd::kConfigError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: config: " << e.what() << '\n';
    return sdd::kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return sdd::kFailed;
  }
}
