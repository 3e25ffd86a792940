#pragma once

// Post-processing of trajectories: exponential decay fits, absorbing radii,
// trajectory-pair separation (quasi-stability), Hölder and continuous
// dependence probes, and the G-dissipativity constants.

#include "sdd/fit.hpp"
#include "sdd/integrator.hpp"
#include "sdd/lyapunov.hpp"
#include "sdd/model.hpp"

#include <functional>
#include <string>
#include <vector>

namespace sdd {

struct DecayFit {
  double rate = 0.0;       // gamma
  double floor = 0.0;      // asymptotic value c
  double amplitude = 0.0;  // a in v ~ a e^{-gamma (t - t_a)} + c
  double residual = 0.0;   // RMS misfit of log|v - c| against the fitted line
  std::size_t samples = 0;
};

// Fits v(t) ~ c + a e^{-gamma (t - t_a)} on [t_a, t_b] by least squares of
// ln|v - c| against t. The floor c is chosen to maximize R^2 of that line
// (scan over the log gap between c and the data, refined by golden section);
// both decay from above and approach from below are considered. A constant
// series gives gamma = 0, floor = value.
DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& v, double t_a, double t_b);

// First time after which |v - v_final| <= rel_tol |v_final| for good. Used to
// end a decay-fit window before the series reaches roundoff level.
double settling_time(const std::vector<double>& t, const std::vector<double>& v, double rel_tol);

// Diagnostics column by CSV name (norm_H, norm_H12, norm_dot_Hm12, eta,
// V_lyap, cl_norm) or "energy" / "dissipation".
std::vector<double> column(const TrajectoryRecord& traj, const std::string& name);

struct AbsorbingRadius {
  double R_star = 0.0;
  double t_entry = 0.0;
};

class NonDissipative : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// R_star = max of the quantity over the trailing tail_fraction of samples;
// t_entry = first time after which the quantity stays <= R_star (1 + tol).
// Throws NonDissipative when the second half of the tail exceeds the first
// half's maximum by more than tol.
AbsorbingRadius absorbing_radius(const TrajectoryRecord& traj, const std::string& quantity, double tail_fraction,
                                 double tol = 0.05);

struct SeparationReport {
  std::vector<double> times;
  std::vector<double> cl_dist;    // |S_t phi1 - S_t phi2|_CL
  std::vector<double> weak_term;  // max_{s <= t} ||A^{1/2 - beta}(u1(s) - u2(s))||
  double initial = 0.0;           // ||phi1(0) - phi2(0)||_{1/2} + |phi1 - phi2|_C
  double fitted_C = 0.0;
  double fitted_rate = 0.0;
  // Log-linear decay rate of cl_dist over the second half of the samples.
  double decay_rate = 0.0;
};

// Steps two trajectories in lockstep; on_step sees both histories after every
// step (including the initial one).
void co_integrate(const ModelSpec& spec, const HistorySampler& phi1, const HistorySampler& phi2,
                  const IntegratorConfig& cfg,
                  const std::function<void(std::size_t, const HistorySegment&, const HistorySegment&)>& on_step);

// Co-integrates both trajectories and fits
//   cl_dist(t) <= C e^{-rate t} initial + C weak_term(t)
// by scanning rate over lambda_1 {0.1, 0.2, ..., 2.0}; for each rate the
// smallest admissible C is computed, and the largest rate attaining the
// overall minimum C is reported.
SeparationReport pair_separation(const ModelSpec& spec, const HistorySampler& phi1, const HistorySampler& phi2,
                                 const IntegratorConfig& cfg, double beta);

struct ScalingProbe {
  std::vector<double> deltas;
  std::vector<double> values;
  double exponent = 0.0;  // least-squares slope of ln value vs ln delta
};

// sup_{[0, T]} ||u1 - u2|| for phi2 = phi + delta * direction, |direction|_C = 1.
ScalingProbe continuous_dependence(const ModelSpec& spec, const HistorySampler& phi, const HistorySampler& direction,
                                   const std::vector<double>& deltas, const IntegratorConfig& cfg);

// (t - r)^{1/2} ||A^{1/2}(u1(t) - u2(t))|| at t = T_final for the same family.
ScalingProbe holder_probe(const ModelSpec& spec, const HistorySampler& phi, const HistorySampler& direction,
                          const std::vector<double>& deltas, const IntegratorConfig& cfg);

struct DissipativityConstants {
  double c1 = 0.0;
  double c2 = 0.0;
};

// <G(u), A u> >= -c1 ||A^{1/2} u||^2 - c2. c1 is the least-squares slope of
// -<G(u), Au> against ||A^{1/2}u||^2 (clamped at 0); c2 the largest remaining
// excess over the samples.
DissipativityConstants fit_G_dissipativity(const Nonlinearity& g, const Spectrum& s,
                                           const std::vector<SpectralState>& samples);
// Largest violation of the inequality over the samples (<= 0 when it holds).
double G_dissipativity_violation(const Nonlinearity& g, const Spectrum& s, const DissipativityConstants& c,
                                 const std::vector<SpectralState>& samples);

}  // namespace sdd
