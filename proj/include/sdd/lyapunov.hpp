#pragma once

#include "sdd/history.hpp"
#include "sdd/model.hpp"

namespace sdd {

inline constexpr double kDefaultMu = 0.25;

// V(t) = 1/2 (||u||^2 + ||A^{1/2} u||^2) + Pi(u) + (mu/r) int_0^r int_{t-s}^t ||u'(xi)||^2 dxi ds
struct LyapunovSample {
  double t = 0.0;
  double kinetic = 0.0;
  double potential = 0.0;
  double delay_compensator = 0.0;
  double total = 0.0;
};

// The double integral uses the trapezoid rule on the history grid: inner
// cumulative integral over [t - s_i, t] for s_i = i dt, then an outer
// trapezoid over s in [0, r]. Exact when ||u'||^2 is piecewise linear.
LyapunovSample lyapunov_V(const ModelSpec& spec, const HistorySegment& h, double mu = kDefaultMu);

}  // namespace sdd
