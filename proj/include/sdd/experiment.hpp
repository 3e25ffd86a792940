#pragma once

// Experiment configuration and orchestration behind the sddsim CLI.
// The configuration schema is documented in docs/config.md.

#include "sdd/integrator.hpp"
#include "sdd/model.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

namespace sdd {

// Schema violation; the message names the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::runtime_error("config field '" + field + "': " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class ExperimentKind { simulate, pair, dissipativity, dimension, validate };

ExperimentKind parse_experiment_kind(const std::string& name);
std::string to_string(ExperimentKind k);

struct ExperimentConfig {
  nlohmann::json raw;  // the exact configuration used (seed override applied)
  ModelParams model;
  IntegratorConfig integrator;
  ExperimentKind kind = ExperimentKind::simulate;
  nlohmann::json params;  // experiment-kind specific block
  std::uint64_t seed = 0;
  std::string output_directory;
};

ModelParams parse_model(const nlohmann::json& j);
IntegratorConfig parse_integrator(const nlohmann::json& j);

// Validates the whole document; kind_override replaces experiment.kind.
ExperimentConfig parse_config(nlohmann::json j, std::optional<ExperimentKind> kind_override = std::nullopt,
                              std::optional<std::uint64_t> seed_override = std::nullopt);
ExperimentConfig load_config(const std::filesystem::path& path, std::optional<ExperimentKind> kind_override = std::nullopt,
                             std::optional<std::uint64_t> seed_override = std::nullopt);

// Builds a history sampler from an "initial" block:
//   {"kind": "constant", "coeffs": [...]}                phi(theta) = c
//   {"kind": "affine", "coeffs": [...], "slope": [...]}  phi(theta) = c + theta d
//   {"kind": "random", "amplitude": a}                    seeded, c_k ~ U(-a/k, a/k)
HistorySampler parse_initial(const nlohmann::json& j, Eigen::Index m, std::uint64_t seed, const std::string& field);

// Output directory: explicit override, then config, then $SDD_OUT_DIR, then "out".
std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg, const std::optional<std::string>& cli_out);

enum ExitCode : int { kOk = 0, kFailed = 1, kConfigError = 2, kBlowUp = 3 };

// Runs the configured experiment and writes its artifacts plus config.json and
// manifest.json into out. Returns an ExitCode.
int run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out);

// Continues a simulate run stored in from for additional_T time units and
// writes the concatenated artifacts into out (which may equal from).
int resume_run(const std::filesystem::path& from, double additional_T, const std::filesystem::path& out);

}  // namespace sdd
