#include "sdd/validation.hpp"

#include "sdd/diagnostics.hpp"
#include "sdd/dimension.hpp"
#include "sdd/experiment.hpp"
#include "sdd/io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>

namespace sdd {

namespace fs = std::filesystem;

std::vector<double> delay_rk4_oracle(double a, double tau, const std::function<double(double)>& phi, double T,
                                     double step) {
  const double ratio = tau / step;
  const auto lag = static_cast<std::size_t>(std::llround(ratio));
  if (lag < 1 || std::abs(ratio - static_cast<double>(lag)) > 1e-9 * ratio)
    throw std::invalid_argument("delay_rk4_oracle: tau must be a multiple of step");
  const auto n = static_cast<std::size_t>(std::llround(T / step));

  // y and the right derivative y' on the grid t_i = i step, i >= 0.
  std::vector<double> y{phi(0.0)}, f;
  auto delayed = [&](std::size_t i, double frac) {
    // y(t_i + frac step - tau)
    if (i < lag) return phi((static_cast<double>(i) + frac) * step - tau);
    const std::size_t j = i - lag;
    if (frac == 0.0) return y[j];
    if (frac == 1.0) return y[j + 1];
    // Cubic Hermite on [t_j, t_{j+1}] at the midpoint.
    return 0.5 * (y[j] + y[j + 1]) + 0.125 * step * (f[j] - f[j + 1]);
  };
  for (std::size_t i = 0; i < n; ++i) {
    const double k1 = -a * delayed(i, 0.0);
    const double k2 = -a * delayed(i, 0.5);
    const double k4 = -a * delayed(i, 1.0);
    f.push_back(k1);
    y.push_back(y[i] + step / 6.0 * (k1 + 4.0 * k2 + k4));
  }
  return y;
}

namespace {

using Clock = std::chrono::steady_clock;

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, x);
  return buf;
}

// Pure heat equation: F = 0, G = 0, h = 0.
ModelParams heat_params(Eigen::Index m) {
  ModelParams p;
  p.m = m;
  p.eta_kind = DelayKind::constant;
  p.eta_value = 0.0;
  p.birth = BirthFunction::linear(0.0);
  p.smoothing = Smoothing::identity();
  p.g = {0.0, 0.0, 0.0};
  return p;
}

HistorySampler constant_history(Vector c) {
  return [c = std::move(c)](double) { return SpectralState(c); };
}

CriterionResult spectral_exactness() {
  CriterionResult res;
  const Eigen::Index m = 64;
  const Spectrum s = Spectrum::dirichlet(m, 3.14159265358979323846);
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    Vector c(m);
    for (Eigen::Index k = 0; k < m; ++k) c[k] = unit(rng) / static_cast<double>(k + 1);
    const SpectralState u(c);
    const double alpha = unit(rng), gamma = unit(rng);
    // Oracle: the weighted sum evaluated term by term with std::pow.
    double direct = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) direct += std::pow(s.lambda(k), 2.0 * (alpha + gamma)) * c[k] * c[k];
    direct = std::sqrt(direct);
    const double composed = frac_norm(apply_A_power(u, gamma, s), alpha, s);
    const double summed = frac_norm(u, alpha + gamma, s);
    const Vector back = apply_A_power(apply_A_power(u, alpha, s), -alpha, s).coeffs;
    worst = std::max({worst, std::abs(composed - direct) / direct, std::abs(summed - direct) / direct,
                      (back - c).norm() / c.norm(), std::abs(frac_norm(u, 0.0, s) - c.norm()) / c.norm()});
  }
  res.passed = worst <= 1e-12;
  res.detail = "max relative deviation " + fmt("%.3g", worst) + " (tol 1e-12)";
  return res;
}

CriterionResult etd_heat() {
  CriterionResult res;
  const ModelSpec spec = build_model(heat_params(16));
  IntegratorConfig cfg;
  cfg.dt = 1e-3;
  cfg.T_final = 1.0;
  cfg.record_every = 1000;
  cfg.keep_states = true;
  Vector c(16);
  for (Eigen::Index k = 0; k < 16; ++k) c[k] = 1.0 / static_cast<double>(k + 1);
  const auto traj = integrate(spec, constant_history(c), cfg);
  const SpectralState& u = traj.states.back();
  double worst = 0.0;
  for (Eigen::Index k = 0; k < 16; ++k) {
    const double lam = static_cast<double>((k + 1) * (k + 1));
    const double exact = c[k] * std::exp(-lam * u.time);
    worst = std::max(worst, std::abs(u.coeffs[k] - exact) / std::abs(exact));
  }
  res.passed = traj.states.size() == 2 && std::abs(u.time - 1.0) < 1e-12 && worst <= 1e-12;
  res.detail = "1000 steps, max per-mode relative error " + fmt("%.3g", worst) + " (tol 1e-12)";
  return res;
}

// y' = -y(t - 1), y = 1 on [-1, 0] as a one-mode model with lambda = 0.
CriterionResult delay_orders() {
  CriterionResult res;
  ModelParams p;
  p.m = 1;
  p.eigenvalues = {0.0};
  p.r = 1.0;
  p.eta_kind = DelayKind::constant;
  p.eta_value = 1.0;
  p.birth = BirthFunction::linear(1.0);
  p.smoothing = Smoothing::identity();
  p.g = {0.0, 0.0, 0.0};
  const ModelSpec spec = build_model(p);
  const double T = 5.0;
  const double out_dt = 0.1;
  const double oracle_step = 1e-3;
  const auto oracle = delay_rk4_oracle(1.0, 1.0, [](double) { return 1.0; }, T, oracle_step);
  const std::size_t stride = static_cast<std::size_t>(std::llround(out_dt / oracle_step));
  Vector c(1);
  c[0] = 1.0;

  std::ostringstream detail;
  bool ok = true;
  for (const Scheme scheme : {Scheme::etd1, Scheme::etd_rk2}) {
    const double expected = scheme == Scheme::etd1 ? 1.0 : 2.0;
    std::vector<double> errors;
    for (const double dt : {0.1, 0.05, 0.025, 0.0125}) {
      IntegratorConfig cfg;
      cfg.dt = dt;
      cfg.scheme = scheme;
      cfg.T_final = T;
      cfg.record_every = static_cast<std::size_t>(std::llround(out_dt / dt));
      cfg.keep_states = true;
      const auto traj = integrate(spec, constant_history(c), cfg);
      double e = 0.0;
      for (std::size_t i = 0; i < traj.states.size(); ++i)
        e = std::max(e, std::abs(traj.states[i].coeffs[0] - oracle[i * stride]));
      errors.push_back(e);
    }
    detail << to_string(scheme) << " orders";
    for (std::size_t i = 1; i < errors.size(); ++i) {
      const double order = std::log2(errors[i - 1] / errors[i]);
      ok = ok && std::abs(order - expected) <= 0.3;
      detail << ' ' << fmt("%.3f", order);
    }
    detail << " (expect " << expected << " +- 0.3); ";
  }
  res.passed = ok;
  res.detail = detail.str();
  return res;
}

CriterionResult potentiality() {
  CriterionResult res;
  Nonlinearity g;
  g.a1 = 0.5;
  g.a2 = -1.0;
  const Spectrum s = Spectrum::dirichlet(32, 3.14159265358979323846);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double eps = 1e-4;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Vector a(32), b(32);
    for (Eigen::Index k = 0; k < 32; ++k) {
      a[k] = unit(rng) / static_cast<double>(k + 1);
      b[k] = unit(rng) / static_cast<double>(k + 1);
    }
    const SpectralState u(a), v(b);
    const double exact = inner(eval_G(g, u, s), v);
    const double fd =
        (eval_Pi(g, SpectralState(a + eps * b), s) - eval_Pi(g, SpectralState(a - eps * b), s)) / (2.0 * eps);
    worst = std::max(worst, std::abs(fd - exact) / std::abs(exact));
  }
  res.passed = worst <= 1e-6;
  res.detail = "100 pairs, max relative error " + fmt("%.3g", worst) + " (tol 1e-6)";
  return res;
}

CriterionResult eta_lipschitz() {
  CriterionResult res;
  const Eigen::Index m = 8;
  const double r = 1.0, dt = 0.25;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> logscale(-3.0, 1.0);

  Vector w = Vector::Zero(m);
  w[0] = 1.0;
  w[1] = -0.5;
  const std::vector<DelayFunctional> kinds = {DelayFunctional::tanh_of_inner(w, 3.0, r),
                                              DelayFunctional::norm_sigmoid(2.0, r),
                                              DelayFunctional::constant(0.3, r)};
  auto random_history = [&](double scale) {
    std::deque<SpectralState> states;
    for (int i = 0; i <= 4; ++i) {
      Vector c(m);
      for (Eigen::Index k = 0; k < m; ++k) c[k] = scale * unit(rng);
      states.emplace_back(std::move(c), -r + i * dt);
    }
    return HistorySegment(std::move(states), {}, r, dt);
  };

  std::ostringstream detail;
  bool ok = true;
  std::size_t pairs = 0;
  for (const auto& eta : kinds) {
    double worst = 0.0;  // max of |eta(a) - eta(b)| / (L |a - b|_C)
    for (int trial = 0; trial < 10000; ++trial) {
      const double scale = std::pow(10.0, logscale(rng));
      const HistorySegment a = random_history(scale);
      // Nearby and far partners both occur.
      const HistorySegment b = trial % 2 ? random_history(scale) : [&] {
        std::deque<SpectralState> states;
        const double eps = std::pow(10.0, logscale(rng) - 3.0);
        for (std::size_t i = 0; i < a.size(); ++i) {
          Vector c = a.state(i).coeffs;
          for (Eigen::Index k = 0; k < m; ++k) c[k] += eps * unit(rng);
          states.emplace_back(std::move(c), a.state(i).time);
        }
        return HistorySegment(std::move(states), {}, r, dt);
      }();
      const double lhs = std::abs(eval_eta(eta, a) - eval_eta(eta, b));
      const double rhs = eta.lipschitz() * c_distance(a, b);
      ++pairs;
      if (rhs > 0.0) worst = std::max(worst, lhs / rhs);
      else if (lhs > 0.0) worst = INFINITY;
    }
    ok = ok && worst <= 1.0 + 1e-12;
    detail << to_string(eta.kind) << " max ratio " << fmt("%.4f", worst) << "; ";
  }
  res.passed = ok;
  res.detail = std::to_string(pairs) + " pairs, " + detail.str();
  return res;
}

CriterionResult dissipativity() {
  CriterionResult res;
  const ModelParams p;  // Nicholson instance, m = 32, r = 1
  const ModelSpec spec = build_model(p);
  IntegratorConfig cfg;
  cfg.dt = 2e-4;
  cfg.T_final = 200.0;
  cfg.record_every = 500;
  std::vector<HistorySampler> phis;
  for (const double c : {1.0, 100.0}) phis.push_back(constant_history(c * SpectralState::unit(32, 1).coeffs));
  const auto trajs = integrate_ensemble(spec, phis, cfg, 2);

  std::ostringstream detail;
  detail << "m_F r = " << linear_growth_mF(spec.fmap, spec.spectrum) * spec.r << "; ";
  bool ok = true;
  std::vector<double> radii;
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    const auto& traj = trajs[i];
    const AbsorbingRadius ar = absorbing_radius(traj, "energy", 0.5);
    radii.push_back(ar.R_star);
    const auto V = column(traj, "V_lyap");
    const DecayFit f = fit_decay(traj.times, V, ar.t_entry + 2.0 * spec.r, settling_time(traj.times, V, 1e-9));
    ok = ok && f.rate > 0.0 && f.residual < 0.1;
    detail << "|phi|_C=" << traj.diag.front().norm_H << ": R*=" << fmt("%.6g", ar.R_star)
           << " t_entry=" << fmt("%.2f", ar.t_entry) << " gamma=" << fmt("%.4f", f.rate)
           << " residual=" << fmt("%.4f", f.residual) << "; ";
  }
  const double spread = std::abs(radii[0] - radii[1]) / std::max(radii[0], radii[1]);
  ok = ok && spread <= 0.1;
  detail << "R* spread " << fmt("%.3g", spread) << " (tol 0.1)";
  res.passed = ok;
  res.detail = detail.str();
  return res;
}

HistorySampler unit_direction(Eigen::Index m) {
  Vector d = Vector::Zero(m);
  d[0] = 1.0;
  d[1] = 0.5;
  d[2] = -0.25;
  d /= d.norm();
  return constant_history(d);
}

CriterionResult continuous_dependence_slope() {
  CriterionResult res;
  const ModelSpec spec = build_model(ModelParams{});
  IntegratorConfig cfg;
  cfg.dt = 0.01;
  cfg.T_final = 10.0;
  const auto probe = continuous_dependence(spec, constant_history(SpectralState::unit(32, 1).coeffs),
                                           unit_direction(32), {1e-2, 1e-3, 1e-4}, cfg);
  res.passed = std::abs(probe.exponent - 1.0) <= 0.1;
  res.detail = "slope " + fmt("%.4f", probe.exponent) + " (expect 1 +- 0.1)";
  return res;
}

CriterionResult holder_half() {
  CriterionResult res;
  const ModelSpec spec = build_model(ModelParams{});
  IntegratorConfig cfg;
  cfg.dt = 0.01;
  cfg.T_final = 2.0 * spec.r;
  const auto probe = holder_probe(spec, constant_history(SpectralState::unit(32, 1).coeffs), unit_direction(32),
                                  {1e-2, 1e-3, 1e-4, 1e-5}, cfg);
  res.passed = probe.exponent >= 0.45;
  res.detail = "exponent " + fmt("%.4f", probe.exponent) + " at t = 2r (expect >= 0.45)";
  return res;
}

CriterionResult galerkin_convergence() {
  CriterionResult res;
  const ModelParams p;
  Vector c(64);
  for (Eigen::Index k = 0; k < 64; ++k) c[k] = 1.0 / static_cast<double>((k + 1) * (k + 1));
  IntegratorConfig cfg;
  cfg.dt = 1e-3;
  cfg.T_final = 5.0;
  const auto rows = galerkin_refine(p, constant_history(c), cfg, {8, 16, 32, 64});
  bool ok = true;
  std::ostringstream detail;
  detail << "error_H12 vs m=64:";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0) ok = ok && rows[i].error_H <= rows[i - 1].error_H && rows[i].error_H12 <= rows[i - 1].error_H12;
    detail << " m=" << rows[i].m << ' ' << fmt("%.3g", rows[i].error_H12);
  }
  res.passed = ok;
  res.detail = detail.str();
  return res;
}

CriterionResult dimension_validation() {
  CriterionResult res;
  std::ostringstream detail;

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  PointCloud square;
  square.points.resize(100000, 2);
  for (Eigen::Index i = 0; i < square.size(); ++i) square.points.row(i) << unit(rng), unit(rng);
  std::vector<double> ladder;
  for (int k = 1; k <= 7; ++k) ladder.push_back(std::ldexp(1.0, -k));
  const double d_square = box_counting(square, ladder).slope;

  // Left endpoints of the 2^10 intervals of the depth-10 Cantor construction,
  // kept on the integer grid 3^10 so boxes of side 3^-k are counted exactly.
  const int depth = 10;
  std::vector<long long> ends{0};
  long long width = 1;
  for (int k = 0; k < depth; ++k) width *= 3;
  for (int k = 0; k < depth; ++k) {
    width /= 3;
    const std::size_t n = ends.size();
    for (std::size_t i = 0; i < n; ++i) ends.push_back(ends[i] + 2 * width);
  }
  PointCloud cantor;
  cantor.points.resize(static_cast<Eigen::Index>(ends.size()), 1);
  for (std::size_t i = 0; i < ends.size(); ++i)
    cantor.points(static_cast<Eigen::Index>(i), 0) = static_cast<double>(ends[i]) / std::pow(3.0, depth);
  std::vector<double> cantor_ladder;
  for (int k = 1; k <= 6; ++k) cantor_ladder.push_back(std::pow(3.0, -k) * (1.0 - 1e-9));
  const double d_cantor = box_counting(cantor, cantor_ladder, std::make_pair<std::size_t, std::size_t>(0, 6)).slope;

  PointCloud point;
  point.points = Matrix::Constant(50, 3, 0.7);
  const double d_point = box_counting(point, default_ladder(point)).slope;

  const double cantor_exact = std::log(2.0) / std::log(3.0);
  res.passed = std::abs(d_square - 2.0) <= 0.1 && std::abs(d_cantor - cantor_exact) <= 0.05 * cantor_exact &&
               d_point == 0.0;
  detail << "square " << fmt("%.4f", d_square) << ", Cantor " << fmt("%.4f", d_cantor) << " (exact "
         << fmt("%.4f", cantor_exact) << "), point " << d_point;
  res.detail = detail.str();
  return res;
}

// Oscillatory Nicholson regime: long delay, strong delayed feedback.
ModelParams attractor_params() {
  ModelParams p;
  p.r = 2.0;
  p.birth = BirthFunction::nicholson(-80.0, 1.0);
  p.g.a3 = 0.1;
  return p;
}

CriterionResult attractor_stability() {
  CriterionResult res;
  const ModelSpec spec = build_model(attractor_params());
  IntegratorConfig cfg;
  cfg.dt = 0.01;
  cfg.T_final = 400.0;
  AttractorSampling opts;
  opts.n_traj = 4;
  opts.transient = 100.0;
  opts.sample_dt = 0.1;
  opts.seed = 1;
  const auto clouds = sample_attractor_embeddings(spec, cfg, opts, {8, 16, 32});
  double lo = INFINITY, hi = -INFINITY, diam = 0.0;
  std::ostringstream detail;
  for (const auto& cloud : clouds) {
    const auto ladder = default_ladder(cloud);
    const double slope = box_counting(cloud, ladder).slope;
    lo = std::min(lo, slope);
    hi = std::max(hi, slope);
    diam = std::max(diam, ladder.front() * 2.0);
    detail << "d=" << cloud.dim() << " slope " << fmt("%.4f", slope) << "; ";
  }
  res.passed = hi - lo < 0.5 && diam > 1e-3 && clouds.front().size() >= 1000;
  detail << clouds.front().size() << " points, extent " << fmt("%.3g", diam) << ", spread " << fmt("%.3g", hi - lo)
         << " (tol 0.5)";
  res.detail = detail.str();
  return res;
}

fs::path scratch_dir(const std::string& tag) {
  std::random_device rd;
  const fs::path dir = fs::temp_directory_path() / ("sdd_" + tag + "_" + std::to_string(rd()));
  fs::create_directories(dir);
  return dir;
}

nlohmann::json simulate_config(const nlohmann::json& model, double T) {
  return {{"model", model},
          {"integrator", {{"dt", 0.01}, {"scheme", "etd_rk2"}, {"T_final", T}, {"record_every", 10}}},
          {"experiment", {{"kind", "simulate"}, {"seed", 0}, {"initial", {{"kind", "constant"}, {"coeffs", {1.0, 0.0, 0.3}}}}}}};
}

CriterionResult resume_equivalence() {
  CriterionResult res;
  const nlohmann::json nicholson = {
      {"spectrum", {{"m", 32}, {"L", 3.14159265358979323846}}},
      {"eta", {{"kind", "tanh_of_inner"}, {"r", 1.0}, {"weight", {1.0}}, {"rate", 1.0}}},
      {"fmap", {{"b", {{"kind", "nicholson"}, {"c1", -6.0}, {"c2", 1.0}}}, {"B", {{"kind", "lowpass"}, {"K", 8}}}}},
      {"g", {{"a1", 0.0}, {"a2", 0.0}, {"a3", 1.0}}}};
  const nlohmann::json linear = {
      {"spectrum", {{"m", 16}, {"L", 3.14159265358979323846}}},
      {"eta", {{"kind", "constant"}, {"r", 1.0}, {"value", 0.5}}},
      {"fmap", {{"b", {{"kind", "linear"}, {"slope", 0.5}}}, {"B", {{"kind", "identity"}}}}},
      {"g", {{"a1", 0.0}, {"a2", 0.0}, {"a3", 0.0}}}};

  const fs::path root = scratch_dir("resume");
  bool ok = true;
  std::ostringstream detail;
  for (const auto& [name, model] : {std::pair{"nicholson", nicholson}, std::pair{"linear", linear}}) {
    const fs::path split = root / (std::string(name) + "_split"), whole = root / (std::string(name) + "_whole");
    ok = ok && run_experiment(parse_config(simulate_config(model, 10.0)), split) == kOk;
    ok = ok && resume_run(split, 10.0, split) == kOk;
    ok = ok && run_experiment(parse_config(simulate_config(model, 20.0)), whole) == kOk;
    double worst = 0.0;
    std::size_t rows = 0;
    for (const char* file : {"trajectory.csv", "monitors.csv", "states.csv", "history_final.csv"}) {
      const auto a = io::read_csv(split / file), b = io::read_csv(whole / file);
      if (a.rows.size() != b.rows.size() || a.header != b.header) {
        ok = false;
        worst = INFINITY;
        continue;
      }
      for (std::size_t i = 0; i < a.rows.size(); ++i)
        for (std::size_t j = 0; j < a.rows[i].size(); ++j) {
          const double x = a.rows[i][j], y = b.rows[i][j];
          worst = std::max(worst, std::abs(x - y) / std::max(1.0, std::abs(y)));
        }
      if (std::string(file) == "trajectory.csv") rows = a.rows.size();
    }
    ok = ok && worst <= 1e-12;
    detail << name << ": " << rows << " rows, max deviation " << fmt("%.3g", worst) << "; ";
  }
  std::error_code ec;
  fs::remove_all(root, ec);
  res.passed = ok;
  res.detail = detail.str() + "(tol 1e-12)";
  return res;
}

}  // namespace

std::vector<Criterion> acceptance_criteria() {
  return {
      {1, "spectral exactness", 1.0, spectral_exactness},
      {2, "ETD linear exactness", 1.0, etd_heat},
      {3, "delay-ODE convergence orders", 10.0, delay_orders},
      {4, "potentiality of G", 5.0, potentiality},
      {5, "delay Lipschitz fuzz", 10.0, eta_lipschitz},
      {6, "dissipativity", 60.0, dissipativity},
      {7, "continuous dependence", 60.0, continuous_dependence_slope},
      {8, "Hoelder-1/2 probe", 60.0, holder_half},
      {9, "Galerkin convergence", 120.0, galerkin_convergence},
      {10, "dimension estimator validation", 30.0, dimension_validation},
      {11, "attractor dimension stability", 600.0, attractor_stability},
      {12, "resume equivalence", 30.0, resume_equivalence},
  };
}

std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids) {
  std::vector<CriterionResult> out;
  for (const auto& c : acceptance_criteria()) {
    if (!ids.empty() && std::find(ids.begin(), ids.end(), c.id) == ids.end()) continue;
    const auto start = Clock::now();
    CriterionResult r;
    try {
      r = c.run();
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    r.id = c.id;
    r.name = c.name;
    r.limit_seconds = c.limit_seconds;
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_result(const CriterionResult& r) {
  std::string detail = r.detail;
  while (!detail.empty() && (detail.back() == ' ' || detail.back() == ';')) detail.pop_back();
  std::ostringstream s;
  s << (r.ok() ? "PASS" : "FAIL") << "  [" << (r.id < 10 ? " " : "") << r.id << "] " << r.name << "  ("
    << fmt("%.2f", r.seconds) << " s / limit " << fmt("%g", r.limit_seconds) << " s)  " << detail;
  if (r.passed && !r.ok()) s << "  [over time limit]";
  return s.str();
}

}  // namespace sdd
