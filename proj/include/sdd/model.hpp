#pragma once

// Right-hand side of  u' + A u + F(u_t) + G(u) = h  with
//   F(u_t) = F0(u(t - eta(u_t))),  F0 = b o B  (pointwise b on the grid),
//   G = Nemytskii operator of g(s) = a3 s^3 + a1 s^2 + a2 s, G = Pi'.

#include "sdd/history.hpp"
#include "sdd/spectral.hpp"

#include <string>
#include <vector>

namespace sdd {

enum class DelayKind { tanh_of_inner, norm_sigmoid, constant };

// State-dependent delay eta : C([-r, 0]; H) -> [0, r]. The built-ins depend on
// u(t_now) only, which makes them globally Lipschitz in the C-norm.
struct DelayFunctional {
  DelayKind kind = DelayKind::constant;
  double r = 1.0;
  Vector weight;        // tanh_of_inner
  double rate = 1.0;    // kappa, tanh_of_inner and norm_sigmoid
  double value = 0.0;   // tau0, constant

  // (r/2)(1 + tanh(kappa <u, w>))
  static DelayFunctional tanh_of_inner(Vector w, double kappa, double r);
  // r s / (1 + s), s = kappa ||u||
  static DelayFunctional norm_sigmoid(double kappa, double r);
  static DelayFunctional constant(double tau0, double r);

  double operator()(const SpectralState& u_now) const;
  // L_eta with |eta(phi) - eta(psi)| <= L_eta |phi - psi|_C.
  double lipschitz() const;
  void validate() const;
};

double eval_eta(const DelayFunctional& eta, const HistorySegment& h);

enum class BirthKind { nicholson, linear, bounded_saturating };

// Scalar birth function b.
//   nicholson:          c1 s exp(-c2 |s|)   (odd extension of c1 s e^{-c2 s})
//   linear:             slope * s
//   bounded_saturating: c tanh(s)
struct BirthFunction {
  BirthKind kind = BirthKind::linear;
  double c1 = 0.0;
  double c2 = 1.0;
  double slope = 0.0;
  double c = 0.0;

  static BirthFunction nicholson(double c1, double c2);
  static BirthFunction linear(double slope);
  static BirthFunction bounded_saturating(double c);

  double operator()(double s) const;
  double lipschitz() const;
  bool bounded() const { return kind != BirthKind::linear || slope == 0.0; }
};

enum class SmoothingKind { identity, lowpass, diag };

// Linear smoothing B acting as a spectral multiplier sigma_k.
struct Smoothing {
  SmoothingKind kind = SmoothingKind::lowpass;
  Eigen::Index cutoff = 8;   // lowpass: keep modes 1..cutoff
  Vector multipliers;        // diag: sigma_k, missing entries are zero

  static Smoothing identity();
  static Smoothing lowpass(Eigen::Index k);
  static Smoothing diag(Vector sigma);

  Vector multipliers_for(Eigen::Index m) const;
};

struct DelayedMap {
  BirthFunction b;
  Smoothing B;

  // F0(v) = from_grid(b(to_grid(B v))).
  SpectralState apply(const SpectralState& v, const Spectrum& s) const;
  // Lipschitz constant of F0 on H.
  double lipschitz_H(const Spectrum& s) const;
  // Lipschitz constant of F0 on H_{-1/2}.
  double lipschitz_Hm12(const Spectrum& s) const;
  // false for B = identity: the H_{-1/2} constant then grows with m.
  bool within_verified_hypotheses() const { return B.kind != SmoothingKind::identity; }
};

// limsup ||F0(u)|| / ||u|| as ||u|| -> infinity.
double linear_growth_mF(const DelayedMap& fmap, const Spectrum& s);

struct Nonlinearity {
  double a3 = 1.0;
  double a1 = 0.0;
  double a2 = 0.0;

  double g(double s) const { return ((a3 * s + a1) * s + a2) * s; }
  double dg(double s) const { return (3.0 * a3 * s + 2.0 * a1) * s + a2; }
  // s^4 a3/4 + a1 s^3/3 + a2 s^2/2
  double potential_density(double s) const { return s * s * ((a3 / 4.0 * s + a1 / 3.0) * s + a2 / 2.0); }
  bool is_zero() const { return a3 == 0.0 && a1 == 0.0 && a2 == 0.0; }
};

SpectralState eval_G(const Nonlinearity& gterm, const SpectralState& u, const Spectrum& s);
// Nodal quadrature (L/(m+1)) sum_j P(u(x_j)).
double eval_Pi(const Nonlinearity& gterm, const SpectralState& u, const Spectrum& s);

struct ModelSpec {
  Spectrum spectrum = Spectrum::dirichlet(1, 1.0);
  DelayFunctional eta;
  DelayedMap fmap;
  Nonlinearity gterm;
  SpectralState forcing;
  double r = 1.0;
  // Whether the compatibility residual subtracts the forcing h.
  bool x_space_includes_h = true;

  Eigen::Index m() const { return spectrum.size(); }
  void validate() const;
};

// Mode-count independent description of a model, used to build the Galerkin
// system at any order m.
struct ModelParams {
  Eigen::Index m = 32;
  double length = 3.14159265358979323846;
  double r = 1.0;
  DelayKind eta_kind = DelayKind::tanh_of_inner;
  std::vector<double> eta_weight{1.0};
  double eta_rate = 1.0;
  double eta_value = 0.0;
  BirthFunction birth = BirthFunction::nicholson(-6.0, 1.0);
  Smoothing smoothing = Smoothing::lowpass(8);
  Nonlinearity g;
  std::vector<double> forcing{};
  bool x_space_includes_h = true;
  // Custom spectra (e.g. lambda = 0 checks); empty means Dirichlet.
  std::vector<double> eigenvalues{};
};

ModelSpec build_model(const ModelParams& p);
ModelSpec build_model(const ModelParams& p, Eigen::Index m);

// F(u_t) = F0(u(t_now - eta(u_t))).
SpectralState eval_F(const ModelSpec& spec, const HistorySegment& h);

// Nonlinear part N = h - F(u_t) - G(u(t_now)).
SpectralState nonlinear_part(const ModelSpec& spec, const HistorySegment& h);

// u' = h - A u(t_now) - F(u_t) - G(u(t_now)).
SpectralState rhs(const ModelSpec& spec, const HistorySegment& h);

// ||phi'(0) + A phi(0) + F(phi) + G(phi(0)) - h||_{-1/2} (h omitted when
// x_space_includes_h is false).
double compatibility_residual(const ModelSpec& spec, const HistorySegment& h);

// Constant L with ||F(phi) - F(psi)||_{-1/2} <= L (1 + Lip(A^{-1/2} phi)) |phi - psi|_C.
double almost_lipschitz_constant(const ModelSpec& spec);

std::string to_string(DelayKind k);
std::string to_string(BirthKind k);
std::string to_string(SmoothingKind k);

}  // namespace sdd
