#include "sdd/lyapunov.hpp"

#include <stdexcept>

namespace sdd {

LyapunovSample lyapunov_V(const ModelSpec& spec, const HistorySegment& h, double mu) {
  if (!h.has_derivs()) throw std::invalid_argument("lyapunov_V: history has no derivative buffer");
  const SpectralState& u = h.newest();
  LyapunovSample out;
  out.t = u.time;
  const double n12 = frac_norm(u, 0.5, spec.spectrum);
  out.kinetic = 0.5 * (u.coeffs.squaredNorm() + n12 * n12);
  out.potential = eval_Pi(spec.gterm, u, spec.spectrum);

  const std::size_t last = h.size() - 1;
  const double dt = h.dt();
  double inner = 0.0;
  double outer = 0.0;
  double prev_q = h.deriv(last).coeffs.squaredNorm();
  for (std::size_t i = 1; i <= last; ++i) {
    const double q = h.deriv(last - i).coeffs.squaredNorm();
    const double next = inner + 0.5 * dt * (prev_q + q);
    outer += 0.5 * dt * (inner + next);
    inner = next;
    prev_q = q;
  }
  out.delay_compensator = mu / h.r() * outer;
  out.total = out.kinetic + out.potential + out.delay_compensator;
  return out;
}

}  // namespace sdd
