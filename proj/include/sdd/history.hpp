#pragma once

// History segment u_t on [t - r, t] stored on a uniform time grid.

#include "sdd/spectral.hpp"

#include <cstddef>
#include <deque>
#include <functional>

namespace sdd {

// theta in [-r, 0] -> phi(theta).
using HistorySampler = std::function<SpectralState(double theta)>;

class HistorySegment {
 public:
  // states (and derivs, when nonempty) must be chronological with spacing dt
  // and span exactly r.
  HistorySegment(std::deque<SpectralState> states, std::deque<SpectralState> derivs, double r, double dt);

  // Samples phi on the grid t0 - r, ..., t0. Derivatives by centered
  // differences, second-order one-sided at both ends.
  static HistorySegment from_function(const HistorySampler& phi, double r, double dt, Eigen::Index m,
                                      double t0 = 0.0);

  // Drops the oldest entry and appends (u_new, udot_new); u_new.time must be
  // t_now() + dt.
  void push(SpectralState u_new, SpectralState udot_new);
  HistorySegment pushed(SpectralState u_new, SpectralState udot_new) const;

  // Linear interpolation in time; bit-exact at grid times.
  SpectralState sample(double t_query) const;

  double r() const { return r_; }
  double dt() const { return dt_; }
  // Number of intervals N = r / dt; the buffer holds N + 1 entries.
  std::size_t intervals() const { return steps_; }
  std::size_t size() const { return states_.size(); }
  Eigen::Index m() const { return states_.front().m(); }
  double t_now() const { return states_.back().time; }
  double t_oldest() const { return states_.front().time; }

  const SpectralState& state(std::size_t i) const { return states_[i]; }
  const SpectralState& newest() const { return states_.back(); }
  bool has_derivs() const { return !derivs_.empty(); }
  const SpectralState& deriv(std::size_t i) const;
  const SpectralState& newest_deriv() const;
  void set_newest_deriv(SpectralState udot);

  const std::deque<SpectralState>& states() const { return states_; }
  const std::deque<SpectralState>& derivs() const { return derivs_; }

  // Appends without dropping the oldest entry, so the buffer temporarily spans
  // r + dt. Used for provisional evaluations inside a time step; undo with
  // retract().
  void extend(SpectralState u_new, SpectralState udot_new);
  void retract();

 private:
  void check_next_time(double t) const;

  std::deque<SpectralState> states_;
  std::deque<SpectralState> derivs_;
  double r_;
  double dt_;
  std::size_t steps_;
};

// Number of dt steps in r; throws when r / dt is not an integer within 1e-9.
std::size_t checked_step_count(double r, double dt);

// max_i ||u(tau_i)||.
double c_norm(const HistorySegment& h);

// max over adjacent pairs of ||A^{-1/2}(u_{i+1} - u_i)|| / dt. Discrete
// surrogate for Lip(A^{-1/2} phi); exact for the piecewise-linear interpolant.
double lip_seminorm(const HistorySegment& h, const Spectrum& s);

// c_norm + lip_seminorm + ||A^{1/2} u(t_now)||.
double cl_norm(const HistorySegment& h, const Spectrum& s);

// max over grid pairs of ||A^{1-beta}(u_i - u_j)|| / |tau_i - tau_j|^alpha.
double holder_seminorm(const HistorySegment& h, double alpha, double beta, const Spectrum& s);

// max_i ||u_i - v_i|| for two segments on the same grid.
double c_distance(const HistorySegment& a, const HistorySegment& b);

// Pointwise difference a - b (states and, when both present, derivatives).
HistorySegment difference(const HistorySegment& a, const HistorySegment& b);

}  // namespace sdd
