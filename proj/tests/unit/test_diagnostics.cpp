#include "sdd/diagnostics.hpp"
#include "sdd/lyapunov.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace sdd;

namespace {

ModelParams heat(Eigen::Index m) {
  ModelParams p;
  p.m = m;
  p.eta_kind = DelayKind::constant;
  p.eta_value = 0.0;
  p.birth = BirthFunction::linear(0.0);
  p.smoothing = Smoothing::identity();
  p.g = {0.0, 0.0, 0.0};
  return p;
}

HistorySampler constant(const Vector& c) {
  return [c](double) { return SpectralState(c); };
}

IntegratorConfig config(double dt, double T, std::size_t every = 1) {
  IntegratorConfig cfg;
  cfg.dt = dt;
  cfg.T_final = T;
  cfg.record_every = every;
  return cfg;
}

}  // namespace

TEST(Lyapunov, ZeroState) {
  const ModelSpec spec = build_model(ModelParams{});
  const auto h = HistorySegment::from_function([](double) { return SpectralState::zero(32); }, 1.0, 0.1, 32);
  const auto v = lyapunov_V(spec, h);
  EXPECT_EQ(v.total, 0.0);
  EXPECT_EQ(v.delay_compensator, 0.0);
}

TEST(Lyapunov, ConstantHistoryHasNoCompensator) {
  ModelParams p = heat(1);
  p.g = {1.0, 0.0, 0.0};
  const ModelSpec spec = build_model(p);
  const double u = 0.7;
  const auto h = HistorySegment::from_function([u](double) { return SpectralState(Vector::Constant(1, u)); }, 1.0, 0.1, 1);
  const auto v = lyapunov_V(spec, h);
  EXPECT_NEAR(v.delay_compensator, 0.0, 1e-25);
  const double Pi = eval_Pi(spec.gterm, SpectralState(Vector::Constant(1, u)), spec.spectrum);
  EXPECT_NEAR(v.total, 0.5 * (u * u + u * u) + Pi, 1e-15);
  EXPECT_DOUBLE_EQ(v.total, v.kinetic + v.potential + v.delay_compensator);
}

TEST(Lyapunov, LinearHistoryCompensator) {
  const ModelSpec spec = build_model(heat(2));
  // u(tau) = tau e_1: ||u'|| = 1, so (mu / r) int_0^r s ds = mu r / 2 = 1/8.
  const auto h = HistorySegment::from_function(
      [](double t) { return SpectralState(t * SpectralState::unit(2, 1).coeffs, t); }, 1.0, 0.01, 2);
  EXPECT_NEAR(lyapunov_V(spec, h, 0.25).delay_compensator, 0.125, 1e-12);
  const HistorySegment bare({SpectralState::zero(2, -1.0), SpectralState::zero(2, 0.0)}, {}, 1.0, 1.0);
  EXPECT_THROW(lyapunov_V(spec, bare), std::invalid_argument);
}

TEST(Lyapunov, CompensatorNonnegativeAlongTrajectory) {
  const ModelSpec spec = build_model(ModelParams{});
  auto cfg = config(0.01, 10.0, 10);
  Vector c = Vector::Zero(32);
  c[0] = 3.0;
  c[2] = -1.0;
  const auto traj = integrate(spec, constant(c), cfg);
  for (const auto& row : traj.diag) {
    // V >= 1/2 ||A^{1/2} u||^2 + Pi since the kinetic part contains it and the compensator is >= 0.
    EXPECT_GE(row.V_lyap + 1e-12, 0.5 * row.norm_H12 * row.norm_H12);
  }
}

TEST(FitDecay, SyntheticExponentialWithFloor) {
  std::vector<double> t, v;
  for (int i = 0; i <= 200; ++i) {
    t.push_back(0.05 * i);
    v.push_back(3.0 * std::exp(-0.7 * t.back()) + 2.0);
  }
  const DecayFit f = fit_decay(t, v, 0.0, 10.0);
  EXPECT_NEAR(f.rate, 0.7, 1e-6);
  EXPECT_NEAR(f.floor, 2.0, 1e-6);
  EXPECT_LT(f.residual, 1e-4);
}

TEST(FitDecay, ApproachFromBelow) {
  std::vector<double> t, v;
  for (int i = 0; i <= 200; ++i) {
    t.push_back(0.05 * i);
    v.push_back(5.0 - 2.0 * std::exp(-1.3 * t.back()));
  }
  const DecayFit f = fit_decay(t, v, 0.0, 10.0);
  EXPECT_NEAR(f.rate, 1.3, 1e-5);
  EXPECT_NEAR(f.floor, 5.0, 1e-5);
}

TEST(FitDecay, ConstantSeries) {
  std::vector<double> t, v;
  for (int i = 0; i < 50; ++i) {
    t.push_back(i);
    v.push_back(4.2);
  }
  const DecayFit f = fit_decay(t, v, 0.0, 49.0);
  EXPECT_EQ(f.rate, 0.0);
  EXPECT_DOUBLE_EQ(f.floor, 4.2);
}

TEST(FitDecay, DegenerateWindow) {
  std::vector<double> t{0, 1, 2, 3}, v{1, 2, 3, 4};
  EXPECT_THROW(fit_decay(t, v, 2.0, 1.0), std::invalid_argument);
  EXPECT_THROW(fit_decay(t, v, 0.0, 3.0), std::invalid_argument);
}

TEST(FitDecay, HeatDecayRate) {
  const ModelSpec spec = build_model(heat(4));
  const auto traj = integrate(spec, constant(SpectralState::unit(4, 1).coeffs), config(0.01, 5.0, 10));
  std::vector<double> sq;
  for (const auto& row : traj.diag) sq.push_back(row.norm_H * row.norm_H);
  const DecayFit f = fit_decay(traj.times, sq, 0.0, 5.0);
  EXPECT_NEAR(f.rate, 2.0 * spec.spectrum.lambda(0), 1e-4);
}

TEST(AbsorbingRadius, HeatDecayShrinks) {
  const ModelSpec spec = build_model(heat(4));
  double previous = INFINITY;
  for (const double T : {5.0, 10.0, 20.0}) {
    const auto traj = integrate(spec, constant(SpectralState::unit(4, 1).coeffs), config(0.01, T, 10));
    const auto ar = absorbing_radius(traj, "norm_H", 0.5);
    EXPECT_LT(ar.R_star, previous);
    EXPECT_LT(ar.t_entry, T);
    previous = ar.R_star;
  }
  EXPECT_LT(previous, 1e-4);
}

TEST(AbsorbingRadius, EquilibriumTrajectory) {
  // Constant forcing with u = A^{-1} h is an exact equilibrium of the heat model.
  ModelParams p = heat(3);
  p.forcing = {2.0};
  const ModelSpec spec = build_model(p);
  const auto traj = integrate(spec, constant(2.0 * SpectralState::unit(3, 1).coeffs), config(0.01, 5.0, 10));
  const auto ar = absorbing_radius(traj, "norm_H", 0.5);
  EXPECT_NEAR(ar.R_star, 2.0, 1e-12);
  EXPECT_EQ(ar.t_entry, 0.0);
}

TEST(AbsorbingRadius, GrowingQuantityIsNonDissipative) {
  TrajectoryRecord traj;
  for (int i = 0; i < 100; ++i) {
    DiagnosticsRow row;
    row.t = i;
    row.norm_H = std::exp(0.1 * i);
    traj.times.push_back(row.t);
    traj.diag.push_back(row);
  }
  EXPECT_THROW(absorbing_radius(traj, "norm_H", 0.5), NonDissipative);
  EXPECT_THROW(absorbing_radius(traj, "no_such_column", 0.5), std::invalid_argument);
}

TEST(AbsorbingRadius, NicholsonRunsAgree) {
  // Cheaper version of the acceptance check: initial C-norms 1 and 10.
  const ModelSpec spec = build_model(ModelParams{});
  std::vector<double> radii;
  for (const double c : {1.0, 10.0}) {
    const auto traj = integrate(spec, constant(c * SpectralState::unit(32, 1).coeffs), config(0.002, 40.0, 50));
    radii.push_back(absorbing_radius(traj, "energy", 0.5).R_star);
  }
  EXPECT_NEAR(radii[0], radii[1], 0.1 * std::max(radii[0], radii[1]));
}

TEST(PairSeparation, IdenticalDataGivesZero) {
  const ModelSpec spec = build_model(ModelParams{});
  const auto phi = constant(SpectralState::unit(32, 1).coeffs);
  const auto rep = pair_separation(spec, phi, phi, config(0.01, 3.0, 10), 0.25);
  for (std::size_t i = 0; i < rep.times.size(); ++i) {
    EXPECT_EQ(rep.cl_dist[i], 0.0);
    EXPECT_EQ(rep.weak_term[i], 0.0);
  }
}

TEST(PairSeparation, SymmetricInArguments) {
  const ModelSpec spec = build_model(ModelParams{});
  Vector a = Vector::Zero(32), b = Vector::Zero(32);
  a[0] = 1.0;
  b[0] = 0.5;
  b[1] = 0.2;
  const auto cfg = config(0.01, 3.0, 10);
  const auto ab = pair_separation(spec, constant(a), constant(b), cfg, 0.25);
  const auto ba = pair_separation(spec, constant(b), constant(a), cfg, 0.25);
  ASSERT_EQ(ab.cl_dist.size(), ba.cl_dist.size());
  for (std::size_t i = 0; i < ab.cl_dist.size(); ++i) {
    EXPECT_NEAR(ab.cl_dist[i], ba.cl_dist[i], 1e-14 * (1 + ab.cl_dist[i]));
    EXPECT_NEAR(ab.weak_term[i], ba.weak_term[i], 1e-14 * (1 + ab.weak_term[i]));
  }
  for (std::size_t i = 1; i < ab.weak_term.size(); ++i) EXPECT_GE(ab.weak_term[i], ab.weak_term[i - 1]);
}

TEST(PairSeparation, LinearModelDecaysAtLambdaOne) {
  const ModelSpec spec = build_model(heat(8));
  Vector a = Vector::Zero(8);
  a[0] = 1.0;
  a[3] = 0.5;
  const auto rep = pair_separation(spec, constant(a), constant(Vector::Zero(8)), config(0.01, 8.0, 10), 0.5);
  EXPECT_GE(rep.decay_rate, 0.95 * spec.spectrum.lambda(0));
  // The weak term never exceeds its initial value for decoupled heat modes.
  EXPECT_LE(rep.weak_term.back(), a.norm() * (1 + 1e-12));
  EXPECT_GT(rep.fitted_C, 0.0);
}

TEST(Probes, ContinuousDependenceIsLinear) {
  const ModelSpec spec = build_model(ModelParams{});
  Vector d = Vector::Zero(32);
  d[0] = 0.6;
  d[1] = 0.8;
  const auto probe = continuous_dependence(spec, constant(SpectralState::unit(32, 1).coeffs), constant(d),
                                           {1e-2, 1e-3, 1e-4}, config(0.01, 5.0));
  EXPECT_NEAR(probe.exponent, 1.0, 0.1);
  EXPECT_GE(probe.values[0], 1e-2 * (1 - 1e-12));
}

TEST(Probes, HolderExponentAtTwoDelays) {
  const ModelSpec spec = build_model(ModelParams{});
  Vector d = Vector::Zero(32);
  d[0] = 1.0;
  const auto probe = holder_probe(spec, constant(SpectralState::unit(32, 1).coeffs), constant(d),
                                  {1e-2, 1e-3, 1e-4, 1e-5}, config(0.01, 2.0));
  EXPECT_GE(probe.exponent, 0.45);
  EXPECT_THROW(holder_probe(spec, constant(d), constant(d), {1e-2, 1e-3}, config(0.01, 1.0)), std::invalid_argument);
}

TEST(SettlingTime, FindsTail) {
  std::vector<double> t, v;
  for (int i = 0; i <= 100; ++i) {
    t.push_back(i);
    v.push_back(i < 50 ? 10.0 - i * 0.1 : 1.0);
  }
  EXPECT_LE(settling_time(t, v, 1e-9), 50.0);
  EXPECT_GE(settling_time(t, v, 1e-9), 49.0);
}
