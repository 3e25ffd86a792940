#include "sdd/experiment.hpp"

#include "sdd/diagnostics.hpp"
#include "sdd/dimension.hpp"
#include "sdd/io.hpp"
#include "sdd/validation.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <iostream>
#include <random>
#include <set>

#ifndef SDD_VERSION
#define SDD_VERSION "unknown"
#endif

namespace sdd {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Typed access to one JSON object, with the dotted path of every field kept
// for error messages.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "must be an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  const json& raw(const std::string& key) const { return j_.at(key); }

  void only(std::initializer_list<const char*> keys) const {
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!allowed.count(it.key())) throw ConfigError(field(it.key()), "unknown field");
  }

  double number(const std::string& key) const {
    if (!has(key)) throw ConfigError(field(key), "required");
    const json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(field(key), "must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(field(key), "must be finite");
    return x;
  }
  double number(const std::string& key, double def) const { return has(key) ? number(key) : def; }

  long long integer(const std::string& key) const {
    const double x = number(key);
    if (std::floor(x) != x) throw ConfigError(field(key), "must be an integer");
    return static_cast<long long>(x);
  }
  long long integer(const std::string& key, long long def) const { return has(key) ? integer(key) : def; }

  bool boolean(const std::string& key, bool def) const {
    if (!has(key)) return def;
    if (!j_.at(key).is_boolean()) throw ConfigError(field(key), "must be true or false");
    return j_.at(key).get<bool>();
  }

  std::string string(const std::string& key) const {
    if (!has(key)) throw ConfigError(field(key), "required");
    if (!j_.at(key).is_string()) throw ConfigError(field(key), "must be a string");
    return j_.at(key).get<std::string>();
  }
  std::string string(const std::string& key, const std::string& def) const { return has(key) ? string(key) : def; }

  std::vector<double> numbers(const std::string& key) const {
    if (!has(key)) throw ConfigError(field(key), "required");
    const json& v = j_.at(key);
    if (!v.is_array()) throw ConfigError(field(key), "must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) throw ConfigError(field(key), "must be an array of numbers");
      out.push_back(x.get<double>());
      if (!std::isfinite(out.back())) throw ConfigError(field(key), "entries must be finite");
    }
    return out;
  }
  std::vector<double> numbers(const std::string& key, std::vector<double> def) const {
    return has(key) ? numbers(key) : def;
  }

  Obj object(const std::string& key) const {
    if (!has(key)) throw ConfigError(field(key), "required");
    return Obj(j_.at(key), field(key));
  }

 private:
  const json& j_;
  std::string path_;
};

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field, what);
}

DelayKind parse_delay_kind(const std::string& s, const std::string& field) {
  if (s == "tanh_of_inner") return DelayKind::tanh_of_inner;
  if (s == "norm_sigmoid") return DelayKind::norm_sigmoid;
  if (s == "constant") return DelayKind::constant;
  throw ConfigError(field, "unknown kind '" + s + "' (tanh_of_inner, norm_sigmoid, constant)");
}

BirthFunction parse_birth(const Obj& b) {
  const std::string kind = b.string("kind");
  if (kind == "nicholson") {
    b.only({"kind", "c1", "c2"});
    const double c2 = b.number("c2", 1.0);
    require(c2 > 0.0, b.field("c2"), "must be > 0");
    return BirthFunction::nicholson(b.number("c1"), c2);
  }
  if (kind == "linear") {
    b.only({"kind", "slope"});
    return BirthFunction::linear(b.number("slope"));
  }
  if (kind == "bounded_saturating") {
    b.only({"kind", "c"});
    return BirthFunction::bounded_saturating(b.number("c"));
  }
  throw ConfigError(b.field("kind"), "unknown kind '" + kind + "' (nicholson, linear, bounded_saturating)");
}

Smoothing parse_smoothing(const Obj& B) {
  const std::string kind = B.string("kind");
  if (kind == "identity") {
    B.only({"kind"});
    return Smoothing::identity();
  }
  if (kind == "lowpass") {
    B.only({"kind", "K"});
    const long long K = B.integer("K");
    require(K >= 1, B.field("K"), "must be >= 1");
    return Smoothing::lowpass(static_cast<Eigen::Index>(K));
  }
  if (kind == "diag") {
    B.only({"kind", "sigma"});
    const auto sigma = B.numbers("sigma");
    return Smoothing::diag(Eigen::Map<const Vector>(sigma.data(), static_cast<Eigen::Index>(sigma.size())));
  }
  throw ConfigError(B.field("kind"), "unknown kind '" + kind + "' (identity, lowpass, diag)");
}

std::vector<double> padded(const Obj& o, const std::string& key, Eigen::Index m) {
  auto v = o.numbers(key);
  require(static_cast<Eigen::Index>(v.size()) <= m, o.field(key),
          "has " + std::to_string(v.size()) + " entries but the model has m = " + std::to_string(m));
  v.resize(static_cast<std::size_t>(m), 0.0);
  return v;
}

std::string short_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", x);
  return buf;
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

ExperimentKind parse_experiment_kind(const std::string& name) {
  if (name == "simulate") return ExperimentKind::simulate;
  if (name == "pair") return ExperimentKind::pair;
  if (name == "dissipativity") return ExperimentKind::dissipativity;
  if (name == "dimension") return ExperimentKind::dimension;
  if (name == "validate") return ExperimentKind::validate;
  throw ConfigError("experiment.kind", "unknown kind '" + name + "' (simulate, pair, dissipativity, dimension, validate)");
}

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::simulate: return "simulate";
    case ExperimentKind::pair: return "pair";
    case ExperimentKind::dissipativity: return "dissipativity";
    case ExperimentKind::dimension: return "dimension";
    case ExperimentKind::validate: return "validate";
  }
  return "?";
}

ModelParams parse_model(const json& j) {
  const Obj model(j, "model");
  model.only({"spectrum", "eta", "fmap", "g", "h", "x_space_includes_h"});
  ModelParams p;

  const Obj spectrum = model.object("spectrum");
  spectrum.only({"m", "L", "eigenvalues"});
  const long long m = spectrum.integer("m");
  require(m >= 1, spectrum.field("m"), "must be >= 1");
  p.m = static_cast<Eigen::Index>(m);
  p.length = spectrum.number("L", p.length);
  require(p.length > 0.0, spectrum.field("L"), "must be > 0");
  if (spectrum.has("eigenvalues")) {
    p.eigenvalues = spectrum.numbers("eigenvalues");
    require(static_cast<Eigen::Index>(p.eigenvalues.size()) == p.m, spectrum.field("eigenvalues"),
            "must have exactly m entries");
  }

  const Obj eta = model.object("eta");
  eta.only({"kind", "r", "weight", "rate", "value"});
  p.eta_kind = parse_delay_kind(eta.string("kind"), eta.field("kind"));
  p.r = eta.number("r", 1.0);
  require(p.r > 0.0, eta.field("r"), "must be > 0");
  switch (p.eta_kind) {
    case DelayKind::tanh_of_inner:
      p.eta_weight = padded(eta, "weight", p.m);
      p.eta_rate = eta.number("rate", 1.0);
      break;
    case DelayKind::norm_sigmoid:
      p.eta_rate = eta.number("rate", 1.0);
      require(p.eta_rate > 0.0, eta.field("rate"), "must be > 0");
      break;
    case DelayKind::constant:
      p.eta_value = eta.number("value");
      require(p.eta_value >= 0.0 && p.eta_value <= p.r, eta.field("value"), "must lie in [0, r]");
      break;
  }

  const Obj fmap = model.object("fmap");
  fmap.only({"b", "B"});
  p.birth = parse_birth(fmap.object("b"));
  p.smoothing = parse_smoothing(fmap.object("B"));

  if (model.has("g")) {
    const Obj g = model.object("g");
    g.only({"a1", "a2", "a3"});
    p.g.a1 = g.number("a1", 0.0);
    p.g.a2 = g.number("a2", 0.0);
    p.g.a3 = g.number("a3", 1.0);
    require(p.g.a3 >= 0.0, g.field("a3"), "must be >= 0");
  }
  if (model.has("h")) p.forcing = padded(model, "h", p.m);
  p.x_space_includes_h = model.boolean("x_space_includes_h", true);

  try {
    build_model(p).validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("model", e.what());
  }
  return p;
}

IntegratorConfig parse_integrator(const json& j) {
  const Obj in(j, "integrator");
  in.only({"dt", "scheme", "T_final", "record_every", "mu"});
  IntegratorConfig cfg;
  cfg.dt = in.number("dt");
  require(cfg.dt > 0.0, in.field("dt"), "must be > 0");
  try {
    cfg.scheme = parse_scheme(in.string("scheme", "etd_rk2"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(in.field("scheme"), e.what());
  }
  cfg.T_final = in.number("T_final");
  require(cfg.T_final >= cfg.dt, in.field("T_final"), "must be >= dt");
  const long long every = in.integer("record_every", 1);
  require(every >= 1, in.field("record_every"), "must be >= 1");
  cfg.record_every = static_cast<std::size_t>(every);
  cfg.mu = in.number("mu", kDefaultMu);
  require(cfg.mu > 0.0, in.field("mu"), "must be > 0");
  return cfg;
}

ExperimentConfig parse_config(json j, std::optional<ExperimentKind> kind_override,
                              std::optional<std::uint64_t> seed_override) {
  const Obj root(j, "");
  root.only({"model", "integrator", "experiment", "output"});

  ExperimentConfig cfg;
  json experiment = root.has("experiment") ? root.raw("experiment") : json::object();
  const Obj exp(experiment, "experiment");
  if (kind_override) {
    experiment["kind"] = to_string(*kind_override);
  } else if (!exp.has("kind")) {
    throw ConfigError("experiment.kind", "required (or pass a subcommand)");
  }
  cfg.kind = parse_experiment_kind(Obj(experiment, "experiment").string("kind"));
  if (seed_override) experiment["seed"] = *seed_override;
  j["experiment"] = experiment;

  const Obj e(j.at("experiment"), "experiment");
  if (e.has("seed")) {
    const long long seed = e.integer("seed");
    require(seed >= 0, e.field("seed"), "must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(seed);
  }
  cfg.params = j.at("experiment");

  if (cfg.kind != ExperimentKind::validate) {
    cfg.model = parse_model(root.has("model") ? root.raw("model") : throw ConfigError("model", "required"));
    cfg.integrator =
        parse_integrator(root.has("integrator") ? root.raw("integrator") : throw ConfigError("integrator", "required"));
    const double ratio = cfg.model.r / cfg.integrator.dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio))
      throw ConfigError("integrator.dt", "r / dt must be an integer (r = " + short_number(cfg.model.r) +
                                             ", dt = " + short_number(cfg.integrator.dt) + ")");
  }

  switch (cfg.kind) {
    case ExperimentKind::simulate:
      e.only({"kind", "seed", "initial", "states"});
      break;
    case ExperimentKind::pair:
      e.only({"kind", "seed", "initial", "initial2", "beta"});
      break;
    case ExperimentKind::dissipativity:
      e.only({"kind", "seed", "initials", "quantity", "tail_fraction", "tol", "settle_tol"});
      break;
    case ExperimentKind::dimension:
      e.only({"kind", "seed", "n_traj", "transient", "sample_dt", "embed_modes", "amplitude", "rungs", "ratio"});
      if (!e.has("seed")) throw ConfigError("experiment.seed", "required for randomized experiments");
      break;
    case ExperimentKind::validate:
      e.only({"kind", "seed", "criteria"});
      break;
  }

  if (root.has("output")) {
    const Obj out = root.object("output");
    out.only({"directory", "formats"});
    cfg.output_directory = out.string("directory", "");
    if (out.has("formats")) {
      if (!out.raw("formats").is_array()) throw ConfigError("output.formats", "must be an array of strings");
      for (const auto& f : out.raw("formats"))
        if (!f.is_string() || (f != "csv" && f != "json"))
          throw ConfigError("output.formats", "entries must be \"csv\" or \"json\"");
    }
  }
  cfg.raw = std::move(j);
  return cfg;
}

ExperimentConfig load_config(const fs::path& path, std::optional<ExperimentKind> kind_override,
                             std::optional<std::uint64_t> seed_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("not valid JSON: ") + e.what());
  }
  return parse_config(std::move(j), kind_override, seed_override);
}

HistorySampler parse_initial(const json& j, Eigen::Index m, std::uint64_t seed, const std::string& field) {
  const Obj o(j, field);
  const std::string kind = o.string("kind");
  if (kind == "constant") {
    o.only({"kind", "coeffs"});
    const Vector c = to_vector(padded(o, "coeffs", m));
    return [c](double) { return SpectralState(c); };
  }
  if (kind == "affine") {
    o.only({"kind", "coeffs", "slope"});
    const Vector c = to_vector(padded(o, "coeffs", m));
    const Vector d = to_vector(padded(o, "slope", m));
    return [c, d](double theta) { return SpectralState(c + theta * d, theta); };
  }
  if (kind == "random") {
    o.only({"kind", "amplitude", "seed"});
    const double a = o.number("amplitude", 1.0);
    const long long own = o.integer("seed", static_cast<long long>(seed));
    std::mt19937_64 rng(static_cast<std::uint64_t>(own));
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Vector c(m);
    for (Eigen::Index k = 0; k < m; ++k) c[k] = a * unit(rng) / static_cast<double>(k + 1);
    return [c](double) { return SpectralState(c); };
  }
  throw ConfigError(o.field("kind"), "unknown kind '" + kind + "' (constant, affine, random)");
}

fs::path resolve_output_dir(const ExperimentConfig& cfg, const std::optional<std::string>& cli_out) {
  if (cli_out && !cli_out->empty()) return *cli_out;
  if (!cfg.output_directory.empty()) return cfg.output_directory;
  if (const char* env = std::getenv("SDD_OUT_DIR"); env && *env) return env;
  return "out";
}

namespace {

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return json::parse(in);
}

bool wants(const ExperimentConfig& cfg, const std::string& format) {
  if (!cfg.raw.contains("output") || !cfg.raw["output"].contains("formats")) return true;
  for (const auto& f : cfg.raw["output"]["formats"])
    if (f == format) return true;
  return false;
}

json row_json(const DiagnosticsRow& d) {
  return {{"t", d.t},     {"norm_H", d.norm_H}, {"norm_H12", d.norm_H12}, {"norm_dot_Hm12", d.norm_dot_Hm12},
          {"eta", d.eta}, {"V_lyap", d.V_lyap}, {"cl_norm", d.cl_norm}};
}

json model_constants(const ModelSpec& spec) {
  return {{"m_F_times_r", linear_growth_mF(spec.fmap, spec.spectrum) * spec.r},
          {"L_eta", spec.eta.lipschitz()},
          {"L_F_H", spec.fmap.lipschitz_H(spec.spectrum)},
          {"L_F_Hm12", spec.fmap.lipschitz_Hm12(spec.spectrum)},
          {"almost_lipschitz_constant", almost_lipschitz_constant(spec)},
          {"within_verified_hypotheses", spec.fmap.within_verified_hypotheses()}};
}

HistorySampler initial_or_default(const ExperimentConfig& cfg, const std::string& key, std::uint64_t seed) {
  if (cfg.params.contains(key)) return parse_initial(cfg.params.at(key), cfg.model.m, seed, "experiment." + key);
  const Eigen::Index m = cfg.model.m;
  return [m](double) { return SpectralState::unit(m, 1); };
}

void write_series(const ExperimentConfig& cfg, const fs::path& out, const TrajectoryRecord& traj,
                  const std::string& suffix, json& artifacts) {
  if (!wants(cfg, "csv")) return;
  io::write_trajectory_csv(out / ("trajectory" + suffix + ".csv"), traj);
  io::write_monitors_csv(out / ("monitors" + suffix + ".csv"), traj);
  artifacts.push_back("trajectory" + suffix + ".csv");
  artifacts.push_back("monitors" + suffix + ".csv");
  if (!traj.states.empty()) {
    io::write_states_csv(out / ("states" + suffix + ".csv"), traj.states);
    artifacts.push_back("states" + suffix + ".csv");
  }
}

void write_summary(const ExperimentConfig& cfg, const ModelSpec& spec, const Simulation& sim,
                   const TrajectoryRecord& traj, const fs::path& out, json& artifacts) {
  if (!wants(cfg, "json")) return;
  // sup_norm_H covers the steps integrated by this process only.
  write_json(out / "summary.json", {{"kind", "simulate"},
                                    {"steps", sim.step_index()},
                                    {"final", row_json(traj.diag.back())},
                                    {"sup_norm_H", traj.sup_norm_H},
                                    {"model", model_constants(spec)}});
  artifacts.push_back("summary.json");
}

// Simulation with the state dump needed by resume.
int run_simulate(const ExperimentConfig& cfg, const ModelSpec& spec, const fs::path& out, json& artifacts) {
  IntegratorConfig ic = cfg.integrator;
  ic.keep_states = cfg.params.value("states", true);
  Simulation sim(spec, ic, initial_history(spec, initial_or_default(cfg, "initial", cfg.seed), ic));
  TrajectoryRecord traj;
  sim.record(traj);
  try {
    sim.run_until(ic.total_steps(), traj);
  } catch (const BlowUp&) {
    write_series(cfg, out, traj, "", artifacts);
    throw;
  }
  write_series(cfg, out, traj, "", artifacts);
  io::write_history(out, sim.history());
  write_json(out / "resume_state.json", {{"step", sim.step_index()}, {"dissipation", sim.dissipation()}});
  artifacts.push_back("history_final.csv");
  artifacts.push_back("history_final_derivs.csv");
  artifacts.push_back("resume_state.json");
  write_summary(cfg, spec, sim, traj, out, artifacts);
  return kOk;
}

int run_pair(const ExperimentConfig& cfg, const ModelSpec& spec, const fs::path& out, json& artifacts) {
  const auto phi1 = initial_or_default(cfg, "initial", cfg.seed);
  HistorySampler phi2;
  if (cfg.params.contains("initial2")) {
    phi2 = parse_initial(cfg.params.at("initial2"), spec.m(), cfg.seed + 1, "experiment.initial2");
  } else {
    const Eigen::Index m = spec.m();
    phi2 = [m](double) { return SpectralState(0.5 * SpectralState::unit(m, 1).coeffs); };
  }
  const double beta = cfg.params.value("beta", 0.5);
  require(beta >= 0.0 && beta <= 0.5, "experiment.beta", "must lie in [0, 1/2]");
  const SeparationReport rep = pair_separation(spec, phi1, phi2, cfg.integrator, beta);
  if (wants(cfg, "csv")) {
    io::Table t;
    t.header = {"t", "cl_dist", "weak_term"};
    for (std::size_t i = 0; i < rep.times.size(); ++i) t.rows.push_back({rep.times[i], rep.cl_dist[i], rep.weak_term[i]});
    io::write_csv(out / "separation.csv", t);
    artifacts.push_back("separation.csv");
  }
  if (wants(cfg, "json")) {
    write_json(out / "separation.json", {{"kind", "pair"},
                                         {"beta", beta},
                                         {"initial", rep.initial},
                                         {"fitted_C", rep.fitted_C},
                                         {"fitted_rate", rep.fitted_rate},
                                         {"decay_rate", rep.decay_rate},
                                         {"lambda_1", spec.spectrum.lambda(0)},
                                         {"model", model_constants(spec)}});
    artifacts.push_back("separation.json");
  }
  return kOk;
}

int run_dissipativity(const ExperimentConfig& cfg, const ModelSpec& spec, const fs::path& out, json& artifacts) {
  std::vector<HistorySampler> phis;
  if (cfg.params.contains("initials")) {
    const json& list = cfg.params.at("initials");
    require(list.is_array() && !list.empty(), "experiment.initials", "must be a nonempty array");
    for (std::size_t i = 0; i < list.size(); ++i)
      phis.push_back(parse_initial(list[i], spec.m(), cfg.seed + i, "experiment.initials[" + std::to_string(i) + "]"));
  } else {
    for (const double c : {1.0, 100.0}) {
      const Eigen::Index m = spec.m();
      phis.push_back([m, c](double) { return SpectralState(c * SpectralState::unit(m, 1).coeffs); });
    }
  }
  const std::string quantity = cfg.params.value("quantity", std::string("energy"));
  const double tail = cfg.params.value("tail_fraction", 0.5);
  const double tol = cfg.params.value("tol", 0.05);
  const double settle = cfg.params.value("settle_tol", 1e-9);
  require(tail > 0.0 && tail < 1.0, "experiment.tail_fraction", "must lie in (0, 1)");

  const auto trajs = integrate_ensemble(spec, phis, cfg.integrator);
  json runs = json::array();
  double r_min = INFINITY, r_max = 0.0;
  bool dissipative = true;
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    const auto& traj = trajs[i];
    write_series(cfg, out, traj, "_" + std::to_string(i), artifacts);
    json run = {{"index", i}, {"C_norm_initial", traj.diag.front().norm_H}};
    try {
      const AbsorbingRadius ar = absorbing_radius(traj, quantity, tail, tol);
      const auto V = column(traj, "V_lyap");
      const double t_a = ar.t_entry + 2.0 * spec.r;
      const double t_b = settling_time(traj.times, V, settle);
      run["R_star"] = ar.R_star;
      run["t_entry"] = ar.t_entry;
      if (t_b > t_a) {
        const DecayFit f = fit_decay(traj.times, V, t_a, t_b);
        run["V_fit"] = {{"rate", f.rate},          {"floor", f.floor},     {"amplitude", f.amplitude},
                        {"residual", f.residual},  {"samples", f.samples}, {"window", {t_a, t_b}}};
      }
      r_min = std::min(r_min, ar.R_star);
      r_max = std::max(r_max, ar.R_star);
    } catch (const NonDissipative& e) {
      run["non_dissipative"] = e.what();
      dissipative = false;
    }
    runs.push_back(run);
  }
  if (wants(cfg, "json")) {
    json report = {{"kind", "dissipativity"}, {"quantity", quantity},   {"tail_fraction", tail},
                   {"runs", runs},            {"dissipative", dissipative}, {"model", model_constants(spec)}};
    if (dissipative && r_max > 0.0) report["R_star_relative_spread"] = (r_max - r_min) / r_max;
    write_json(out / "dissipativity.json", report);
    artifacts.push_back("dissipativity.json");
  }
  return dissipative ? kOk : kFailed;
}

int run_dimension(const ExperimentConfig& cfg, const ModelSpec& spec, const fs::path& out, json& artifacts) {
  AttractorSampling opts;
  opts.seed = cfg.seed;
  opts.n_traj = cfg.params.value("n_traj", opts.n_traj);
  opts.transient = cfg.params.value("transient", opts.transient);
  opts.sample_dt = cfg.params.value("sample_dt", opts.sample_dt);
  opts.amplitude = cfg.params.value("amplitude", opts.amplitude);
  std::vector<Eigen::Index> modes;
  if (cfg.params.contains("embed_modes")) {
    const json& em = cfg.params.at("embed_modes");
    if (em.is_array()) {
      for (const auto& k : em) modes.push_back(k.get<Eigen::Index>());
    } else {
      modes.push_back(em.get<Eigen::Index>());
    }
  } else {
    modes.push_back(std::min<Eigen::Index>(opts.embed_modes, spec.m()));
  }
  const std::size_t rungs = cfg.params.value("rungs", std::size_t{8});
  const double ratio = cfg.params.value("ratio", 0.5);
  require(opts.n_traj >= 1, "experiment.n_traj", "must be >= 1");
  require(rungs >= 2, "experiment.rungs", "must be >= 2");
  require(ratio > 0.0 && ratio < 1.0, "experiment.ratio", "must lie in (0, 1)");
  for (const auto k : modes) require(k >= 1 && k <= spec.m(), "experiment.embed_modes", "must lie in [1, m]");

  std::vector<PointCloud> clouds;
  try {
    clouds = sample_attractor_embeddings(spec, cfg.integrator, opts, modes);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("experiment", e.what());
  }
  json estimates = json::array();
  json warnings = json::array();
  for (const auto& cloud : clouds) {
    const DimensionEstimate est = box_counting(cloud, default_ladder(cloud, rungs, ratio));
    const std::string name = "cloud_" + std::to_string(cloud.dim()) + ".csv";
    if (wants(cfg, "csv")) {
      io::write_point_cloud_csv(out / name, cloud);
      artifacts.push_back(name);
    }
    estimates.push_back({{"embed_modes", cloud.dim()},
                         {"points", cloud.size()},
                         {"meta", cloud.meta},
                         {"epsilons", est.epsilons},
                         {"counts", est.counts},
                         {"slope", est.slope},
                         {"stderr", est.residual},
                         {"window", {est.window.first, est.window.second}}});
    for (const auto& w : cloud.warnings) warnings.push_back(w);
  }
  if (wants(cfg, "json")) {
    write_json(out / "dimension.json",
               {{"kind", "dimension"}, {"seed", cfg.seed}, {"estimates", estimates}, {"warnings", warnings}});
    artifacts.push_back("dimension.json");
  }
  for (const auto& w : warnings) std::cerr << "warning: " << w.get<std::string>() << '\n';
  return kOk;
}

int run_validate(const ExperimentConfig& cfg, const fs::path& out, json& artifacts) {
  std::vector<int> ids;
  if (cfg.params.contains("criteria")) {
    for (const auto& v : cfg.params.at("criteria")) {
      require(v.is_number_integer() && v.get<int>() >= 1 && v.get<int>() <= 12, "experiment.criteria",
              "entries must be integers in [1, 12]");
      ids.push_back(v.get<int>());
    }
  }
  const auto results = run_acceptance(ids);
  json list = json::array();
  bool all = true;
  for (const auto& r : results) {
    std::cout << format_result(r) << std::endl;
    list.push_back({{"id", r.id},
                    {"name", r.name},
                    {"passed", r.ok()},
                    {"numeric_pass", r.passed},
                    {"detail", r.detail},
                    {"seconds", r.seconds},
                    {"limit_seconds", r.limit_seconds}});
    all = all && r.ok();
  }
  write_json(out / "report.json", {{"kind", "validate"}, {"passed", all}, {"criteria", list}});
  artifacts.push_back("report.json");
  return all ? kOk : kFailed;
}

void write_manifest(const fs::path& out, const json& config, const std::string& kind, std::uint64_t seed,
                    double seconds, const json& artifacts, int status, const json& extra = json::object()) {
  json m = {{"version", SDD_VERSION}, {"kind", kind},           {"seed", seed},        {"wall_time_seconds", seconds},
            {"status", status},       {"artifacts", artifacts}, {"config", config}};
  for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
  write_json(out / "manifest.json", m);
}

}  // namespace

int run_experiment(const ExperimentConfig& cfg, const fs::path& out) {
  const auto start = std::chrono::steady_clock::now();
  fs::create_directories(out);
  write_json(out / "config.json", cfg.raw);
  json artifacts = json::array({"config.json"});
  int status = kOk;
  try {
    if (cfg.kind == ExperimentKind::validate) {
      status = run_validate(cfg, out, artifacts);
    } else {
      const ModelSpec spec = build_model(cfg.model);
      switch (cfg.kind) {
        case ExperimentKind::simulate: status = run_simulate(cfg, spec, out, artifacts); break;
        case ExperimentKind::pair: status = run_pair(cfg, spec, out, artifacts); break;
        case ExperimentKind::dissipativity: status = run_dissipativity(cfg, spec, out, artifacts); break;
        case ExperimentKind::dimension: status = run_dimension(cfg, spec, out, artifacts); break;
        case ExperimentKind::validate: break;
      }
    }
  } catch (const BlowUp& e) {
    write_json(out / "blowup.json", {{"time", e.time()}, {"message", e.what()}});
    artifacts.push_back("blowup.json");
    std::cerr << "blow-up: " << e.what() << '\n';
    status = kBlowUp;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_manifest(out, cfg.raw, to_string(cfg.kind), cfg.seed, seconds, artifacts, status);
  return status;
}

int resume_run(const fs::path& from, double additional_T, const fs::path& out) {
  if (!(additional_T >= 0.0) || !std::isfinite(additional_T))
    throw ConfigError("additional_T", "must be a finite number >= 0");
  const auto start = std::chrono::steady_clock::now();
  ExperimentConfig cfg = parse_config(read_json(from / "config.json"));
  if (cfg.kind != ExperimentKind::simulate) throw ConfigError("experiment.kind", "only simulate runs can be resumed");
  const json state = read_json(from / "resume_state.json");
  const auto step0 = state.at("step").get<std::size_t>();
  const double dissipation = state.at("dissipation").get<double>();

  const ModelSpec spec = build_model(cfg.model);
  IntegratorConfig ic = cfg.integrator;
  ic.keep_states = fs::exists(from / "states.csv");
  HistorySegment h = io::read_history(from, spec.r, ic.dt);
  if (h.m() != spec.m()) throw std::runtime_error("state dump has a different mode count than the config");

  TrajectoryRecord traj = io::read_trajectory_csv(from / "trajectory.csv");
  io::read_monitors_csv(from / "monitors.csv", traj);
  if (ic.keep_states) traj.states = io::read_states_csv(from / "states.csv");

  if (additional_T == 0.0 && fs::exists(out) && fs::equivalent(from, out)) return kOk;

  const auto extra = static_cast<std::size_t>(std::floor(additional_T / ic.dt + 1e-9));
  Simulation sim(spec, ic, std::move(h), step0, dissipation);
  int status = kOk;
  json artifacts = json::array({"config.json"});
  fs::create_directories(out);
  try {
    sim.run_until(step0 + extra, traj);
  } catch (const BlowUp& e) {
    write_json(out / "blowup.json", {{"time", e.time()}, {"message", e.what()}});
    artifacts.push_back("blowup.json");
    std::cerr << "blow-up: " << e.what() << '\n';
    status = kBlowUp;
  }

  cfg.raw["integrator"]["T_final"] = static_cast<double>(sim.step_index()) * ic.dt;
  write_json(out / "config.json", cfg.raw);
  write_series(cfg, out, traj, "", artifacts);
  if (status == kOk) {
    io::write_history(out, sim.history());
    write_json(out / "resume_state.json", {{"step", sim.step_index()}, {"dissipation", sim.dissipation()}});
    artifacts.push_back("history_final.csv");
    artifacts.push_back("history_final_derivs.csv");
    artifacts.push_back("resume_state.json");
    write_summary(cfg, spec, sim, traj, out, artifacts);
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_manifest(out, cfg.raw, "simulate", cfg.seed, seconds, artifacts, status,
                 {{"resumed_from", fs::absolute(from).string()}, {"additional_T", additional_T}});
  return status;
}

}  // namespace sdd
