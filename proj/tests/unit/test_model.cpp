#include "sdd/diagnostics.hpp"
#include "sdd/model.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace sdd;

namespace {

constexpr double kPi = 3.14159265358979323846;

ModelParams linear_params(Eigen::Index m) {
  ModelParams p;
  p.m = m;
  p.eta_kind = DelayKind::constant;
  p.eta_value = 0.0;
  p.birth = BirthFunction::linear(0.0);
  p.smoothing = Smoothing::identity();
  p.g = {0.0, 0.0, 0.0};
  return p;
}

HistorySegment constant_segment(const SpectralState& u, double r = 1.0, double dt = 0.1) {
  return HistorySegment::from_function([u](double t) { return SpectralState(u.coeffs, t); }, r, dt, u.m());
}

Vector random_vector(std::mt19937_64& rng, Eigen::Index m, double scale) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Vector c(m);
  for (Eigen::Index k = 0; k < m; ++k) c[k] = scale * unit(rng);
  return c;
}

HistorySegment random_segment(std::mt19937_64& rng, Eigen::Index m, double scale, double r = 1.0, double dt = 0.25) {
  std::deque<SpectralState> states;
  const auto n = checked_step_count(r, dt);
  for (std::size_t i = 0; i <= n; ++i) states.emplace_back(random_vector(rng, m, scale), -r + i * dt);
  return HistorySegment(std::move(states), {}, r, dt);
}

}  // namespace

TEST(DelayFunctional, TanhAtZeroIsHalfDelay) {
  const auto eta = DelayFunctional::tanh_of_inner(Vector::Ones(3), 2.0, 1.5);
  EXPECT_DOUBLE_EQ(eta(SpectralState::zero(3)), 0.75);
  EXPECT_DOUBLE_EQ(eta.lipschitz(), 0.5 * 1.5 * 2.0 * std::sqrt(3.0));
}

TEST(DelayFunctional, ConstantIgnoresHistory) {
  const auto eta = DelayFunctional::constant(0.3, 1.0);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(eval_eta(eta, random_segment(rng, 4, 10.0)), 0.3);
}

TEST(DelayFunctional, NormSigmoidClosedForm) {
  const auto eta = DelayFunctional::norm_sigmoid(2.0, 1.0);
  Vector c(2);
  c << 3.0, 4.0;
  EXPECT_NEAR(eta(SpectralState(c)), 10.0 / 11.0, 1e-15);
  EXPECT_EQ(eta.lipschitz(), 2.0);
}

TEST(DelayFunctional, CodomainAndLipschitzFuzz) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> logscale(-3.0, 2.0);
  const std::vector<DelayFunctional> kinds = {DelayFunctional::tanh_of_inner(Vector::LinSpaced(4, 1.0, -1.0), 5.0, 2.0),
                                              DelayFunctional::norm_sigmoid(0.7, 2.0),
                                              DelayFunctional::constant(1.1, 2.0)};
  for (const auto& eta : kinds) {
    for (int trial = 0; trial < 10000; ++trial) {
      const double scale = std::pow(10.0, logscale(rng));
      const auto a = random_segment(rng, 4, scale, 2.0, 0.5);
      const auto b = random_segment(rng, 4, scale, 2.0, 0.5);
      const double ea = eval_eta(eta, a), eb = eval_eta(eta, b);
      ASSERT_GE(ea, 0.0);
      ASSERT_LE(ea, 2.0);
      ASSERT_LE(std::abs(ea - eb), eta.lipschitz() * c_distance(a, b) * (1.0 + 1e-12) + 1e-15);
    }
  }
}

TEST(DelayFunctional, ValidateRejectsBadParameters) {
  EXPECT_THROW(DelayFunctional::constant(1.5, 1.0).validate(), std::invalid_argument);
  EXPECT_THROW(DelayFunctional::norm_sigmoid(-1.0, 1.0).validate(), std::invalid_argument);
}

TEST(BirthFunction, ValuesAndConstants) {
  const auto n = BirthFunction::nicholson(2.0, 1.0);
  EXPECT_DOUBLE_EQ(n(1.0), 2.0 * std::exp(-1.0));
  EXPECT_DOUBLE_EQ(n(-1.0), -n(1.0));
  EXPECT_EQ(n(0.0), 0.0);
  EXPECT_EQ(n.lipschitz(), 2.0);
  EXPECT_TRUE(n.bounded());
  // Lipschitz constant bounds every difference quotient.
  for (double x = -5.0; x < 5.0; x += 0.01) EXPECT_LE(std::abs(n(x + 0.01) - n(x)) / 0.01, 2.0 + 1e-12);
  EXPECT_EQ(BirthFunction::linear(-3.0).lipschitz(), 3.0);
  EXPECT_FALSE(BirthFunction::linear(-3.0).bounded());
  EXPECT_DOUBLE_EQ(BirthFunction::bounded_saturating(2.0)(100.0), 2.0);
}

TEST(EvalF, IdentityChain) {
  ModelParams p = linear_params(6);
  p.birth = BirthFunction::linear(1.0);
  const ModelSpec spec = build_model(p);
  std::mt19937_64 rng(3);
  const SpectralState u(random_vector(rng, 6, 1.0));
  const auto h = constant_segment(u);
  EXPECT_LE((eval_F(spec, h).coeffs - u.coeffs).norm(), 1e-14);
}

TEST(EvalF, NicholsonOfZeroIsZero) {
  const ModelSpec spec = build_model(ModelParams{});
  EXPECT_EQ(eval_F(spec, constant_segment(SpectralState::zero(32))).coeffs.norm(), 0.0);
}

TEST(EvalF, ConstantDelayOnLinearHistory) {
  ModelParams p = linear_params(3);
  p.birth = BirthFunction::linear(2.0);
  p.eta_value = 0.3;
  const ModelSpec spec = build_model(p);
  const auto h = HistorySegment::from_function(
      [](double t) { return SpectralState((1.0 + t) * SpectralState::unit(3, 1).coeffs, t); }, 1.0, 0.1, 3);
  const SpectralState F = eval_F(spec, h);
  EXPECT_NEAR(F.coeffs[0], 2.0 * (1.0 - 0.3), 1e-13);
  EXPECT_NEAR(F.coeffs.tail(2).norm(), 0.0, 1e-13);
}

TEST(DelayedMap, LinearGrowth) {
  const Spectrum s = Spectrum::dirichlet(8, kPi);
  EXPECT_EQ(linear_growth_mF({BirthFunction::nicholson(-6.0, 1.0), Smoothing::lowpass(4)}, s), 0.0);
  EXPECT_EQ(linear_growth_mF({BirthFunction::linear(2.0), Smoothing::identity()}, s), 2.0);
  Vector sigma(8);
  for (int k = 0; k < 8; ++k) sigma[k] = 1.0 / (k + 1);
  EXPECT_EQ(linear_growth_mF({BirthFunction::linear(1.0), Smoothing::diag(sigma)}, s), 1.0);
  EXPECT_EQ(linear_growth_mF({BirthFunction::bounded_saturating(3.0), Smoothing::identity()}, s), 0.0);
}

TEST(DelayedMap, DiagMultipliersBeyondListAreZero) {
  Vector sigma(2);
  sigma << 0.5, 0.25;
  const Vector full = Smoothing::diag(sigma).multipliers_for(4);
  EXPECT_EQ(full[1], 0.25);
  EXPECT_EQ(full[3], 0.0);
}

TEST(DelayedMap, LipschitzConstantsHoldOnRandomPairs) {
  const Spectrum s = Spectrum::dirichlet(16, kPi);
  const DelayedMap f{BirthFunction::nicholson(-6.0, 1.0), Smoothing::lowpass(5)};
  EXPECT_TRUE(f.within_verified_hypotheses());
  EXPECT_FALSE((DelayedMap{BirthFunction::linear(1.0), Smoothing::identity()}).within_verified_hypotheses());
  std::mt19937_64 rng(4);
  for (int i = 0; i < 200; ++i) {
    const SpectralState v(random_vector(rng, 16, 2.0)), w(random_vector(rng, 16, 2.0));
    const Vector dF = f.apply(v, s).coeffs - f.apply(w, s).coeffs;
    const Vector dv = v.coeffs - w.coeffs;
    EXPECT_LE(dF.norm(), f.lipschitz_H(s) * dv.norm() * (1 + 1e-12));
    EXPECT_LE(frac_norm(dF, -0.5, s), f.lipschitz_Hm12(s) * frac_norm(dv, -0.5, s) * (1 + 1e-12));
  }
}

TEST(EvalF, LinearBoundInCNorm) {
  const ModelSpec spec = build_model(ModelParams{});
  const double c1 = eval_F(spec, constant_segment(SpectralState::zero(32))).coeffs.norm();
  const double c2 = spec.fmap.lipschitz_H(spec.spectrum);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const auto h = random_segment(rng, 32, 3.0);
    EXPECT_LE(eval_F(spec, h).coeffs.norm(), c1 + c2 * c_norm(h) + 1e-12);
  }
}

TEST(EvalF, AlmostLipschitzEstimate) {
  // Histories with bounded lip_seminorm: smooth in time, random in space.
  const ModelSpec spec = build_model(ModelParams{});
  const double L = almost_lipschitz_constant(spec);
  std::mt19937_64 rng(6);
  auto smooth_segment = [&](const Vector& a, const Vector& b) {
    return HistorySegment::from_function([a, b](double t) { return SpectralState(a + std::sin(2.0 * t) * b, t); },
                                         1.0, 0.01, 32);
  };
  for (int i = 0; i < 100; ++i) {
    const Vector a = random_vector(rng, 32, 1.0), b = random_vector(rng, 32, 1.0);
    const Vector da = random_vector(rng, 32, 1e-2), db = random_vector(rng, 32, 1e-2);
    const auto phi = smooth_segment(a, b), psi = smooth_segment(a + da, b + db);
    const double K = lip_seminorm(phi, spec.spectrum);
    const double lhs = frac_norm(eval_F(spec, phi).coeffs - eval_F(spec, psi).coeffs, -0.5, spec.spectrum);
    EXPECT_LE(lhs, 1.1 * L * (1.0 + K) * c_distance(phi, psi));
  }
}

TEST(Nonlinearity, ZeroAtZero) {
  const Spectrum s = Spectrum::dirichlet(8, kPi);
  const Nonlinearity g;
  EXPECT_EQ(eval_G(g, SpectralState::zero(8), s).coeffs.norm(), 0.0);
  EXPECT_EQ(eval_Pi(g, SpectralState::zero(8), s), 0.0);
}

TEST(Nonlinearity, PotentialityByCentralDifference) {
  const Spectrum s = Spectrum::dirichlet(32, kPi);
  std::mt19937_64 rng(7);
  const std::vector<Nonlinearity> gs = {{1.0, 0.0, 0.0}, {1.0, 0.5, -1.0}, {0.0, 0.0, 2.0}, {0.2, -1.0, 0.0}};
  const double eps = 1e-4;
  for (const auto& g : gs) {
    for (int i = 0; i < 100; ++i) {
      const Vector a = random_vector(rng, 32, 1.0), b = random_vector(rng, 32, 1.0);
      const double exact = inner(eval_G(g, SpectralState(a), s), SpectralState(b));
      const double fd =
          (eval_Pi(g, SpectralState(a + eps * b), s) - eval_Pi(g, SpectralState(a - eps * b), s)) / (2.0 * eps);
      // Scale-aware relative error: |<G(u), v>| can be near zero for some pairs.
      const double scale = std::max(std::abs(exact), 1e-3 * eval_G(g, SpectralState(a), s).coeffs.norm() * b.norm());
      EXPECT_LE(std::abs(fd - exact), 1e-6 * scale);
    }
  }
}

TEST(Nonlinearity, DissipativityFitHoldsOnSample) {
  const Spectrum s = Spectrum::dirichlet(16, kPi);
  const Nonlinearity g{1.0, 0.5, -2.0};
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> logscale(-2.0, 1.0);
  auto sample = [&](int n) {
    std::vector<SpectralState> out;
    for (int i = 0; i < n; ++i) out.emplace_back(random_vector(rng, 16, std::pow(10.0, logscale(rng))));
    return out;
  };
  const auto us = sample(1000);
  const auto fit = fit_G_dissipativity(g, s, us);
  EXPECT_GE(fit.c1, 0.0);
  EXPECT_GE(fit.c2, 0.0);
  EXPECT_LE(G_dissipativity_violation(g, s, fit, us), 1e-9);
}

TEST(Rhs, PureHeat) {
  const ModelSpec spec = build_model(linear_params(4));
  const auto h = constant_segment(SpectralState::unit(4, 1));
  EXPECT_LE((rhs(spec, h).coeffs + SpectralState::unit(4, 1).coeffs).norm(), 1e-15);
}

TEST(Rhs, ZeroStateWithForcing) {
  ModelParams p;
  p.forcing = {1.0};
  const ModelSpec spec = build_model(p);
  const auto h = constant_segment(SpectralState::zero(32));
  EXPECT_LE((rhs(spec, h).coeffs - SpectralState::unit(32, 1).coeffs).norm(), 1e-15);
}

TEST(Rhs, OneModeEquilibriumByBisection) {
  // With m = 1 the Galerkin system is the scalar ODE
  //   u' = h - lambda u - c g(u / c'),  nodal quadrature at x = L/2.
  ModelParams p = linear_params(1);
  p.g = {1.0, 0.0, 0.5};
  p.forcing = {2.0};
  const ModelSpec spec = build_model(p);
  const double L = kPi, e = std::sqrt(2.0 / L), w = L / 2.0;
  auto scalar = [&](double u) {
    const double s = e * u;
    return 2.0 - u - w * e * (s * s * s + 0.5 * s);
  };
  double lo = 0.0, hi = 5.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (scalar(mid) > 0.0 ? lo : hi) = mid;
  }
  Vector c(1);
  c << 0.5 * (lo + hi);
  EXPECT_LE(std::abs(rhs(spec, constant_segment(SpectralState(c))).coeffs[0]), 1e-12);
}

TEST(CompatibilityResidual, Examples) {
  const ModelSpec spec = build_model(linear_params(4));
  // Not at equilibrium: residual = ||A e_1||_{-1/2} = 1.
  EXPECT_NEAR(compatibility_residual(spec, constant_segment(SpectralState::unit(4, 1))), 1.0, 1e-14);
  // At the zero equilibrium.
  EXPECT_EQ(compatibility_residual(spec, constant_segment(SpectralState::zero(4))), 0.0);
  const HistorySegment bare({SpectralState::zero(4, -1.0), SpectralState::zero(4, 0.0)}, {}, 1.0, 1.0);
  EXPECT_THROW(compatibility_residual(spec, bare), std::invalid_argument);
}

TEST(CompatibilityResidual, ForcingSwitch) {
  ModelParams p = linear_params(2);
  p.forcing = {1.0};
  const auto h = constant_segment(SpectralState::unit(2, 1));
  // u = e_1, h = e_1: A u - h = 0 with the switch on, A u with it off.
  EXPECT_NEAR(compatibility_residual(build_model(p), h), 0.0, 1e-15);
  p.x_space_includes_h = false;
  EXPECT_NEAR(compatibility_residual(build_model(p), h), 1.0, 1e-15);
}

TEST(BuildModel, PadsAndValidates) {
  ModelParams p;
  p.m = 6;
  p.forcing = {1.0, 2.0};
  const ModelSpec spec = build_model(p);
  EXPECT_EQ(spec.forcing.m(), 6);
  EXPECT_EQ(spec.forcing.coeffs[1], 2.0);
  EXPECT_EQ(spec.eta.weight.size(), 6);
  const ModelSpec bigger = build_model(p, 12);
  EXPECT_EQ(bigger.m(), 12);
  EXPECT_EQ(bigger.forcing.coeffs[11], 0.0);
}
