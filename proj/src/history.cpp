#include "sdd/history.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdd {

namespace {

double time_tolerance(double t) { return 1e-12 * std::max(1.0, std::abs(t)); }

}  // namespace

std::size_t checked_step_count(double r, double dt) {
  if (!(r > 0.0)) throw std::invalid_argument("history: delay horizon r must be > 0");
  if (!(dt > 0.0)) throw std::invalid_argument("history: dt must be > 0");
  const double ratio = r / dt;
  const double n = std::round(ratio);
  if (n < 1.0 || std::abs(ratio - n) > 1e-9 * std::max(1.0, n))
    throw std::invalid_argument("history: dt = " + std::to_string(dt) + " does not divide r = " +
                                std::to_string(r));
  return static_cast<std::size_t>(n);
}

HistorySegment::HistorySegment(std::deque<SpectralState> states, std::deque<SpectralState> derivs, double r,
                               double dt)
    : states_(std::move(states)), derivs_(std::move(derivs)), r_(r), dt_(dt), steps_(checked_step_count(r, dt)) {
  if (states_.size() != steps_ + 1)
    throw std::invalid_argument("history: expected " + std::to_string(steps_ + 1) + " states, got " +
                                std::to_string(states_.size()));
  if (!derivs_.empty() && derivs_.size() != states_.size())
    throw std::invalid_argument("history: derivative buffer length differs from state buffer");
  const Eigen::Index m = states_.front().m();
  for (std::size_t i = 0; i < states_.size(); ++i) {
    if (states_[i].m() != m) throw std::invalid_argument("history: inconsistent mode count");
    if (i > 0) {
      const double gap = states_[i].time - states_[i - 1].time;
      if (std::abs(gap - dt_) > time_tolerance(states_[i].time))
        throw std::invalid_argument("history: timestamps are not uniformly spaced by dt");
    }
    if (!derivs_.empty()) {
      if (derivs_[i].m() != m) throw std::invalid_argument("history: inconsistent derivative mode count");
      derivs_[i].time = states_[i].time;
    }
  }
}

HistorySegment HistorySegment::from_function(const HistorySampler& phi, double r, double dt, Eigen::Index m,
                                             double t0) {
  const std::size_t n = checked_step_count(r, dt);
  std::deque<SpectralState> states;
  for (std::size_t i = 0; i <= n; ++i) {
    const double theta = (i == n) ? 0.0 : (static_cast<double>(i) - static_cast<double>(n)) * dt;
    SpectralState u = phi(theta);
    if (u.m() != m)
      throw std::invalid_argument("history: sampler returned " + std::to_string(u.m()) + " modes, expected " +
                                  std::to_string(m));
    u.time = t0 + theta;
    states.push_back(std::move(u));
  }

  std::deque<SpectralState> derivs;
  for (std::size_t i = 0; i <= n; ++i) {
    Vector d;
    if (n == 1) {
      d = (states[1].coeffs - states[0].coeffs) / dt;
    } else if (i == 0) {
      d = (-3.0 * states[0].coeffs + 4.0 * states[1].coeffs - states[2].coeffs) / (2.0 * dt);
    } else if (i == n) {
      d = (3.0 * states[n].coeffs - 4.0 * states[n - 1].coeffs + states[n - 2].coeffs) / (2.0 * dt);
    } else {
      d = (states[i + 1].coeffs - states[i - 1].coeffs) / (2.0 * dt);
    }
    derivs.emplace_back(std::move(d), states[i].time);
  }
  return HistorySegment(std::move(states), std::move(derivs), r, dt);
}

void HistorySegment::check_next_time(double t) const {
  const double expected = t_now() + dt_;
  if (std::abs(t - expected) > time_tolerance(expected))
    throw std::invalid_argument("history: pushed state time " + std::to_string(t) + " != t_now + dt = " +
                                std::to_string(expected));
}

void HistorySegment::extend(SpectralState u_new, SpectralState udot_new) {
  check_next_time(u_new.time);
  if (u_new.m() != m()) throw std::invalid_argument("history: pushed state has wrong mode count");
  if (has_derivs()) {
    udot_new.time = u_new.time;
    derivs_.push_back(std::move(udot_new));
  }
  states_.push_back(std::move(u_new));
}

void HistorySegment::retract() {
  if (states_.size() <= steps_ + 1) throw std::logic_error("history: retract without matching extend");
  states_.pop_back();
  if (has_derivs()) derivs_.pop_back();
}

void HistorySegment::push(SpectralState u_new, SpectralState udot_new) {
  extend(std::move(u_new), std::move(udot_new));
  states_.pop_front();
  if (has_derivs()) derivs_.pop_front();
}

HistorySegment HistorySegment::pushed(SpectralState u_new, SpectralState udot_new) const {
  HistorySegment copy = *this;
  copy.push(std::move(u_new), std::move(udot_new));
  return copy;
}

const SpectralState& HistorySegment::deriv(std::size_t i) const {
  if (!has_derivs()) throw std::logic_error("history: no derivative buffer");
  return derivs_[i];
}

const SpectralState& HistorySegment::newest_deriv() const { return deriv(derivs_.size() - 1); }

void HistorySegment::set_newest_deriv(SpectralState udot) {
  if (!has_derivs()) throw std::logic_error("history: no derivative buffer");
  udot.time = t_now();
  derivs_.back() = std::move(udot);
}

SpectralState HistorySegment::sample(double t_query) const {
  const double pos = (t_query - t_oldest()) / dt_;
  const double last = static_cast<double>(states_.size() - 1);
  constexpr double slack = 1e-9;
  if (!(pos >= -slack) || !(pos <= last + slack))
    throw std::out_of_range("history: query time " + std::to_string(t_query) + " outside [" +
                            std::to_string(t_oldest()) + ", " + std::to_string(t_now()) + "]");
  const double nearest = std::round(pos);
  if (std::abs(pos - nearest) <= slack) return states_[static_cast<std::size_t>(std::clamp(nearest, 0.0, last))];
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const double w = pos - static_cast<double>(i);
  return SpectralState((1.0 - w) * states_[i].coeffs + w * states_[i + 1].coeffs, t_query);
}

double c_norm(const HistorySegment& h) {
  double best = 0.0;
  for (const auto& u : h.states()) best = std::max(best, u.coeffs.norm());
  return best;
}

double lip_seminorm(const HistorySegment& h, const Spectrum& s) {
  detail::require_fits(h.m(), s);
  const Vector w = power_weights(s, h.m(), -0.5).matrix();
  double best = 0.0;
  for (std::size_t i = 0; i + 1 < h.size(); ++i) {
    const double q = ((h.state(i + 1).coeffs - h.state(i).coeffs).array() * w.array()).matrix().norm();
    best = std::max(best, q);
  }
  return best / h.dt();
}

double cl_norm(const HistorySegment& h, const Spectrum& s) {
  return c_norm(h) + lip_seminorm(h, s) + frac_norm(h.newest(), 0.5, s);
}

double holder_seminorm(const HistorySegment& h, double alpha, double beta, const Spectrum& s) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("holder_seminorm: alpha must lie in (0, 1]");
  detail::require_fits(h.m(), s);
  const Vector w = power_weights(s, h.m(), 1.0 - beta).matrix();
  std::vector<Vector> scaled;
  scaled.reserve(h.size());
  for (const auto& u : h.states()) scaled.emplace_back(u.coeffs.cwiseProduct(w));
  double best = 0.0;
  for (std::size_t i = 0; i < scaled.size(); ++i) {
    for (std::size_t j = i + 1; j < scaled.size(); ++j) {
      const double gap = static_cast<double>(j - i) * h.dt();
      best = std::max(best, (scaled[j] - scaled[i]).norm() / std::pow(gap, alpha));
    }
  }
  return best;
}

double c_distance(const HistorySegment& a, const HistorySegment& b) {
  if (a.size() != b.size() || a.m() != b.m()) throw std::invalid_argument("c_distance: incompatible segments");
  double best = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) best = std::max(best, (a.state(i).coeffs - b.state(i).coeffs).norm());
  return best;
}

HistorySegment difference(const HistorySegment& a, const HistorySegment& b) {
  if (a.size() != b.size() || a.m() != b.m()) throw std::invalid_argument("difference: incompatible segments");
  std::deque<SpectralState> states;
  std::deque<SpectralState> derivs;
  const bool with_derivs = a.has_derivs() && b.has_derivs();
  for (std::size_t i = 0; i < a.size(); ++i) {
    states.emplace_back(a.state(i).coeffs - b.state(i).coeffs, a.state(i).time);
    if (with_derivs) derivs.emplace_back(a.deriv(i).coeffs - b.deriv(i).coeffs, a.state(i).time);
  }
  return HistorySegment(std::move(states), std::move(derivs), a.r(), a.dt());
}

}  // namespace sdd
