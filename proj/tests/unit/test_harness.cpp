#include "sdd/experiment.hpp"
#include "sdd/io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

using namespace sdd;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("sdd_harness_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

json linear_config(double T = 1.0) {
  json j = json::parse(R"({
    "model": {
      "spectrum": {"m": 4, "L": 3.141592653589793},
      "eta": {"kind": "constant", "r": 0.5, "value": 0.0},
      "fmap": {"b": {"kind": "linear", "slope": 0.0}, "B": {"kind": "identity"}},
      "g": {"a1": 0.0, "a2": 0.0, "a3": 0.0}
    },
    "integrator": {"dt": 0.01, "scheme": "etd_rk2", "record_every": 5},
    "experiment": {"kind": "simulate", "seed": 0, "initial": {"kind": "constant", "coeffs": [1.0, 1.0]}}
  })");
  j["integrator"]["T_final"] = T;
  return j;
}

json nicholson_config() {
  return json::parse(R"({
    "model": {
      "spectrum": {"m": 8, "L": 3.141592653589793},
      "eta": {"kind": "tanh_of_inner", "r": 0.5, "weight": [1.0], "rate": 1.0},
      "fmap": {"b": {"kind": "nicholson", "c1": -6.0, "c2": 1.0}, "B": {"kind": "lowpass", "K": 4}},
      "g": {"a1": 0.5, "a2": -1.0}
    },
    "integrator": {"dt": 0.01, "T_final": 1.0, "record_every": 3},
    "experiment": {"kind": "simulate", "seed": 4, "initial": {"kind": "random", "amplitude": 2.0}}
  })");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + SDDSIM_PATH + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string config_error_field(json j) {
  try {
    parse_config(std::move(j));
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST(ConfigParse, ErrorsNameTheField) {
  json j = linear_config();
  j["integrator"]["dt"] = 0.03;
  EXPECT_EQ(config_error_field(j), "integrator.dt");

  j = linear_config();
  j["model"]["fmap"]["b"]["slop"] = 1.0;
  EXPECT_EQ(config_error_field(j), "model.fmap.b.slop");

  j = linear_config();
  j["experiment"].erase("kind");
  EXPECT_EQ(config_error_field(j), "experiment.kind");

  j = linear_config();
  j["model"]["g"]["a3"] = -1.0;
  EXPECT_EQ(config_error_field(j), "model.g.a3");

  j = linear_config();
  j["output"] = {{"formats", {"xml"}}};
  EXPECT_NE(config_error_field(j).find("output.formats"), std::string::npos);
}

TEST(ConfigParse, DefaultsAndOverrides) {
  const ExperimentConfig cfg = parse_config(nicholson_config(), std::nullopt, 99);
  EXPECT_EQ(cfg.seed, 99u);
  EXPECT_EQ(cfg.raw["experiment"]["seed"], 99);
  EXPECT_EQ(cfg.model.g.a3, 1.0);
  EXPECT_EQ(cfg.integrator.scheme, Scheme::etd_rk2);
  json v = json::parse(R"({"experiment": {"kind": "simulate", "criteria": [3]}})");
  EXPECT_EQ(parse_config(v, ExperimentKind::validate).kind, ExperimentKind::validate);
}

TEST(ConfigParse, BundledConfigsParse) {
  const fs::path dir = fs::path(SDD_SOURCE_DIR) / "configs";
  std::size_t seen = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    SCOPED_TRACE(entry.path().string());
    EXPECT_NO_THROW(load_config(entry.path()));
    ++seen;
  }
  EXPECT_GE(seen, 6u);
}

TEST(ConfigParse, RandomInitialIsSeeded) {
  const auto a = parse_initial({{"kind", "random"}, {"amplitude", 1.0}}, 6, 3, "experiment.initial");
  const auto b = parse_initial({{"kind", "random"}, {"amplitude", 1.0}}, 6, 3, "experiment.initial");
  const auto c = parse_initial({{"kind", "random"}, {"amplitude", 1.0}}, 6, 4, "experiment.initial");
  EXPECT_EQ(a(0.0).coeffs, b(0.0).coeffs);
  EXPECT_NE(a(0.0).coeffs, c(0.0).coeffs);
  for (Eigen::Index k = 0; k < 6; ++k) EXPECT_LE(std::abs(a(0.0).coeffs[k]), 1.0 / static_cast<double>(k + 1));
  EXPECT_THROW(parse_initial({{"kind", "constant"}, {"coeffs", {1, 2, 3}}}, 2, 0, "experiment.initial"), ConfigError);
}

TEST(OutputDir, Precedence) {
  ExperimentConfig cfg = parse_config(linear_config());
  ::unsetenv("SDD_OUT_DIR");
  EXPECT_EQ(resolve_output_dir(cfg, std::nullopt), fs::path("out"));
  ::setenv("SDD_OUT_DIR", "from_env", 1);
  EXPECT_EQ(resolve_output_dir(cfg, std::nullopt), fs::path("from_env"));
  cfg.output_directory = "from_config";
  EXPECT_EQ(resolve_output_dir(cfg, std::nullopt), fs::path("from_config"));
  EXPECT_EQ(resolve_output_dir(cfg, std::string("from_cli")), fs::path("from_cli"));
  ::unsetenv("SDD_OUT_DIR");
}

TEST(Simulate, PureLinearMatchesAnalyticViaCli) {
  TempDir tmp;
  write_file(tmp.path() / "c.json", linear_config(2.0).dump());
  ASSERT_EQ(run_cli("simulate --config " + (tmp.path() / "c.json").string() + " --out " + (tmp.path() / "o").string()),
            0);
  const auto traj = io::read_trajectory_csv(tmp.path() / "o" / "trajectory.csv");
  ASSERT_EQ(traj.times.size(), 41u);
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const double t = traj.times[i];
    EXPECT_NEAR(traj.diag[i].norm_H, std::sqrt(std::exp(-2 * t) + std::exp(-8 * t)), 1e-12);
  }
  const json manifest = read_json(tmp.path() / "o" / "manifest.json");
  EXPECT_EQ(manifest["status"], 0);
  EXPECT_EQ(manifest["config"], read_json(tmp.path() / "o" / "config.json"));
  EXPECT_EQ(manifest["config"], parse_config(linear_config(2.0)).raw);
}

TEST(Simulate, ByteIdenticalReruns) {
  TempDir tmp;
  const ExperimentConfig cfg = parse_config(nicholson_config());
  ASSERT_EQ(run_experiment(cfg, tmp.path() / "a"), kOk);
  ASSERT_EQ(run_experiment(cfg, tmp.path() / "b"), kOk);
  for (const char* f : {"trajectory.csv", "monitors.csv", "states.csv", "history_final.csv", "config.json"})
    EXPECT_EQ(slurp(tmp.path() / "a" / f), slurp(tmp.path() / "b" / f)) << f;
}

TEST(Simulate, CliSeedOverride) {
  TempDir tmp;
  write_file(tmp.path() / "c.json", nicholson_config().dump());
  const std::string cfg = " --config " + (tmp.path() / "c.json").string();
  ASSERT_EQ(run_cli("simulate" + cfg + " --seed 8 --out " + (tmp.path() / "a").string()), 0);
  ASSERT_EQ(run_cli("simulate" + cfg + " --out " + (tmp.path() / "b").string()), 0);
  EXPECT_EQ(read_json(tmp.path() / "a" / "manifest.json")["seed"], 8);
  EXPECT_NE(slurp(tmp.path() / "a" / "states.csv"), slurp(tmp.path() / "b" / "states.csv"));
}

TEST(Simulate, BlowUpExitCode) {
  TempDir tmp;
  json j = linear_config(1.0);
  j["model"]["g"]["a2"] = -5000.0;
  write_file(tmp.path() / "c.json", j.dump());
  EXPECT_EQ(run_cli("simulate --config " + (tmp.path() / "c.json").string() + " --out " + (tmp.path() / "o").string()),
            3);
  EXPECT_TRUE(fs::exists(tmp.path() / "o" / "blowup.json"));
}

TEST(Cli, ConfigErrorExitCode) {
  TempDir tmp;
  json j = linear_config();
  j["integrator"]["dt"] = 0.03;
  write_file(tmp.path() / "c.json", j.dump());
  EXPECT_EQ(run_cli("simulate --config " + (tmp.path() / "c.json").string() + " --out " + (tmp.path() / "o").string()),
            2);
  write_file(tmp.path() / "broken.json", "{not json");
  EXPECT_EQ(run_cli("simulate --config " + (tmp.path() / "broken.json").string()), 2);
}

TEST(Resume, MatchesContinuousRun) {
  TempDir tmp;
  json j = nicholson_config();
  j["integrator"]["T_final"] = 2.0;
  ASSERT_EQ(run_experiment(parse_config(j), tmp.path() / "full"), kOk);
  j["integrator"]["T_final"] = 1.0;
  ASSERT_EQ(run_experiment(parse_config(j), tmp.path() / "half"), kOk);
  ASSERT_EQ(resume_run(tmp.path() / "half", 1.0, tmp.path() / "resumed"), kOk);
  for (const char* f : {"trajectory.csv", "monitors.csv", "states.csv", "history_final.csv", "history_final_derivs.csv"})
    EXPECT_EQ(slurp(tmp.path() / "full" / f), slurp(tmp.path() / "resumed" / f)) << f;
  const json manifest = read_json(tmp.path() / "resumed" / "manifest.json");
  EXPECT_EQ(manifest["additional_T"], 1.0);
  EXPECT_EQ(read_json(tmp.path() / "resumed" / "config.json")["integrator"]["T_final"], 2.0);
}

TEST(Resume, ZeroExtensionInPlaceIsNoOp) {
  TempDir tmp;
  ASSERT_EQ(run_experiment(parse_config(nicholson_config()), tmp.path() / "run"), kOk);
  const std::string before = slurp(tmp.path() / "run" / "trajectory.csv");
  const std::string manifest = slurp(tmp.path() / "run" / "manifest.json");
  EXPECT_EQ(resume_run(tmp.path() / "run", 0.0, tmp.path() / "run"), kOk);
  EXPECT_EQ(slurp(tmp.path() / "run" / "trajectory.csv"), before);
  EXPECT_EQ(slurp(tmp.path() / "run" / "manifest.json"), manifest);
}

TEST(Resume, ShortHistoryDumpIsRejected) {
  TempDir tmp;
  const auto h = HistorySegment::from_function([](double) { return SpectralState::unit(3, 1); }, 0.5, 0.1, 3);
  io::write_history(tmp.path(), h);
  EXPECT_NO_THROW(io::read_history(tmp.path(), 0.5, 0.1));
  EXPECT_THROW(io::read_history(tmp.path(), 1.0, 0.1), std::exception);
}

TEST(Validate, SelectedCriteria) {
  TempDir tmp;
  write_file(tmp.path() / "v.json", R"({"experiment": {"kind": "validate", "criteria": [1, 2]}})");
  ASSERT_EQ(run_cli("validate --config " + (tmp.path() / "v.json").string() + " --out " + (tmp.path() / "o").string()),
            0);
  const json report = read_json(tmp.path() / "o" / "report.json");
  ASSERT_TRUE(report.contains("criteria"));
  ASSERT_EQ(report["criteria"].size(), 2u);
  for (const auto& c : report["criteria"]) EXPECT_TRUE(c["passed"].get<bool>());
}

TEST(Io, RoundTripsAreBitExact) {
  TempDir tmp;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unit(-1e3, 1e3);
  std::vector<SpectralState> states;
  for (int i = 0; i < 20; ++i) {
    Vector c(5);
    for (auto& x : c) x = unit(rng) * std::pow(10.0, i % 7 - 3);
    states.emplace_back(c, 0.1 * i);
  }
  io::write_states_csv(tmp.path() / "s.csv", states);
  const auto back = io::read_states_csv(tmp.path() / "s.csv");
  ASSERT_EQ(back.size(), states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    EXPECT_EQ(back[i].coeffs, states[i].coeffs);
    EXPECT_EQ(back[i].time, states[i].time);
  }

  PointCloud cloud;
  cloud.points = Matrix::NullaryExpr(30, 3, [&]() { return unit(rng); });
  io::write_point_cloud_csv(tmp.path() / "c.csv", cloud);
  EXPECT_EQ(io::read_point_cloud_csv(tmp.path() / "c.csv").points, cloud.points);

  for (const double x : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 5e-324})
    EXPECT_EQ(std::strtod(io::format_double(x).c_str(), nullptr), x);
}
