#include "sdd/integrator.hpp"

#include "sdd/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <thread>

namespace sdd {

Scheme parse_scheme(const std::string& name) {
  if (name == "etd1") return Scheme::etd1;
  if (name == "etd_rk2") return Scheme::etd_rk2;
  throw std::invalid_argument("unknown scheme '" + name + "' (expected etd1 or etd_rk2)");
}

std::string to_string(Scheme s) { return s == Scheme::etd1 ? "etd1" : "etd_rk2"; }

void IntegratorConfig::validate(double r) const {
  if (!(dt > 0.0)) throw std::invalid_argument("integrator: dt must be > 0");
  checked_step_count(r, dt);
  if (!(T_final >= dt * (1.0 - 1e-12))) throw std::invalid_argument("integrator: T_final must be >= dt");
  if (record_every < 1) throw std::invalid_argument("integrator: record_every must be >= 1");
}

std::size_t IntegratorConfig::total_steps() const {
  return static_cast<std::size_t>(std::floor(T_final / dt + 1e-9));
}

double phi1(double z) {
  if (std::abs(z) > 1e-5) return std::expm1(z) / z;
  return 1.0 + z * (1.0 / 2.0 + z * (1.0 / 6.0 + z / 24.0));
}

double phi2(double z) {
  if (std::abs(z) >= 0.1) return (std::expm1(z) - z) / (z * z);
  // sum_{k>=0} z^k / (k+2)!
  double term = 0.5;
  double sum = term;
  for (int k = 1; k <= 10; ++k) {
    term *= z / static_cast<double>(k + 2);
    sum += term;
  }
  return sum;
}

EtdStepper::EtdStepper(const ModelSpec& spec, const IntegratorConfig& cfg) : spec_(&spec), scheme_(cfg.scheme) {
  const Eigen::Index m = spec.m();
  decay_.resize(m);
  w1_.resize(m);
  w2_.resize(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const double z = -spec.spectrum.lambda(k) * cfg.dt;
    decay_[k] = std::exp(z);
    w1_[k] = cfg.dt * phi1(z);
    w2_[k] = cfg.dt * phi2(z);
  }
}

void EtdStepper::advance(HistorySegment& h, double t_next) const {
  const Eigen::Index m = h.m();
  const SpectralState n0 = nonlinear_part(*spec_, h);
  SpectralState next(decay_.cwiseProduct(h.newest().coeffs) + w1_.cwiseProduct(n0.coeffs), t_next);

  if (scheme_ == Scheme::etd_rk2) {
    if (!next.coeffs.allFinite()) throw BlowUp(t_next, "non-finite predictor state");
    h.extend(next, SpectralState::zero(m));
    SpectralState n1;
    try {
      n1 = nonlinear_part(*spec_, h);
    } catch (...) {
      h.retract();
      throw;
    }
    h.retract();
    next.coeffs += w2_.cwiseProduct(n1.coeffs - n0.coeffs);
  }
  if (!next.coeffs.allFinite()) throw BlowUp(t_next, "non-finite state");

  h.push(std::move(next), SpectralState::zero(m));
  if (h.has_derivs()) h.set_newest_deriv(rhs(*spec_, h));
}

std::pair<SpectralState, SpectralState> step(const ModelSpec& spec, const HistorySegment& h,
                                             const IntegratorConfig& cfg) {
  cfg.validate(spec.r);
  const EtdStepper stepper(spec, cfg);
  HistorySegment work = h;
  stepper.advance(work, h.t_now() + cfg.dt);
  return {work.newest(), work.has_derivs() ? work.newest_deriv() : rhs(spec, work)};
}

DiagnosticsRow diagnostics_row(const ModelSpec& spec, const HistorySegment& h, double mu) {
  const auto& s = spec.spectrum;
  DiagnosticsRow row;
  row.t = h.t_now();
  row.norm_H = h.newest().coeffs.norm();
  row.norm_H12 = frac_norm(h.newest(), 0.5, s);
  row.norm_dot_Hm12 = frac_norm(h.newest_deriv(), -0.5, s);
  row.eta = eval_eta(spec.eta, h);
  row.V_lyap = lyapunov_V(spec, h, mu).total;
  row.cl_norm = cl_norm(h, s);
  return row;
}

Simulation::Simulation(const ModelSpec& spec, const IntegratorConfig& cfg, HistorySegment initial,
                       std::size_t start_step, double dissipation)
    : spec_(&spec),
      cfg_(cfg),
      stepper_(spec, cfg),
      history_(std::move(initial)),
      step_(start_step),
      origin_(0.0),
      dissipation_(dissipation) {
  cfg_.validate(spec.r);
  if (history_.m() != spec.m()) throw std::invalid_argument("simulation: history order differs from model order");
  if (std::abs(history_.dt() - cfg_.dt) > 1e-15 * cfg_.dt || std::abs(history_.r() - spec.r) > 1e-12 * spec.r)
    throw std::invalid_argument("simulation: history grid does not match dt / r");
  if (!history_.has_derivs()) throw std::invalid_argument("simulation: history needs a derivative buffer");
  origin_ = history_.t_now() - static_cast<double>(step_) * cfg_.dt;
}

double Simulation::dissipation_rate() const {
  const auto& lam = spec_->spectrum.eigenvalues();
  return history_.newest_deriv().coeffs.squaredNorm() + history_.newest().coeffs.cwiseProduct(lam).squaredNorm();
}

void Simulation::record(TrajectoryRecord& out) const {
  const DiagnosticsRow row = diagnostics_row(*spec_, history_, cfg_.mu);
  out.times.push_back(row.t);
  out.diag.push_back(row);
  const double a = frac_norm(history_.newest_deriv(), -0.5, spec_->spectrum);
  out.energy.push_back(a * a + row.norm_H12 * row.norm_H12);
  out.dissipation.push_back(dissipation_);
  if (cfg_.keep_states) out.states.push_back(history_.newest());
  out.sup_norm_H = std::max(out.sup_norm_H, row.norm_H);
}

void Simulation::run_until(std::size_t end_step, TrajectoryRecord& out) {
  while (step_ < end_step) {
    const double before = dissipation_rate();
    const double t_next = origin_ + static_cast<double>(step_ + 1) * cfg_.dt;
    stepper_.advance(history_, t_next);
    ++step_;
    dissipation_ += 0.5 * cfg_.dt * (before + dissipation_rate());
    out.sup_norm_H = std::max(out.sup_norm_H, history_.newest().coeffs.norm());
    if (step_ % cfg_.record_every == 0) record(out);
  }
}

HistorySegment initial_history(const ModelSpec& spec, const HistorySampler& phi, const IntegratorConfig& cfg) {
  cfg.validate(spec.r);
  return HistorySegment::from_function(phi, spec.r, cfg.dt, spec.m(), 0.0);
}

TrajectoryRecord integrate(const ModelSpec& spec, const HistorySampler& phi, const IntegratorConfig& cfg) {
  Simulation sim(spec, cfg, initial_history(spec, phi, cfg));
  TrajectoryRecord out;
  sim.record(out);
  sim.run_until(cfg.total_steps(), out);
  return out;
}

HistorySegment integrate_final(const ModelSpec& spec, const HistorySampler& phi, const IntegratorConfig& cfg) {
  IntegratorConfig quiet = cfg;
  quiet.keep_states = false;
  quiet.record_every = quiet.total_steps() + 1;
  Simulation sim(spec, quiet, initial_history(spec, phi, quiet));
  TrajectoryRecord sink;
  sim.run_until(quiet.total_steps(), sink);
  return sim.history();
}

std::vector<RefinementRow> galerkin_refine(const ModelParams& params, const HistorySampler& phi,
                                           const IntegratorConfig& cfg, const std::vector<Eigen::Index>& m_list) {
  if (m_list.empty()) throw std::invalid_argument("galerkin_refine: empty m_list");
  if (!std::is_sorted(m_list.begin(), m_list.end()) || m_list.front() < 1)
    throw std::invalid_argument("galerkin_refine: m_list must be ascending and positive");
  const Eigen::Index m_max = m_list.back();

  std::vector<SpectralState> finals;
  for (const Eigen::Index m : m_list) {
    const ModelSpec spec = build_model(params, m);
    const HistorySampler projected = [&phi, m](double theta) { return project(phi(theta), m); };
    finals.push_back(resize_modes(integrate_final(spec, projected, cfg).newest(), m_max));
  }

  const Spectrum s = build_model(params, m_max).spectrum;
  const SpectralState& ref = finals.back();
  std::vector<RefinementRow> rows;
  for (std::size_t i = 0; i < m_list.size(); ++i) {
    const Vector diff = finals[i].coeffs - ref.coeffs;
    rows.push_back({m_list[i], diff.norm(), frac_norm(diff, 0.5, s)});
  }
  return rows;
}

std::vector<TrajectoryRecord> integrate_ensemble(const ModelSpec& spec, const std::vector<HistorySampler>& phis,
                                                 const IntegratorConfig& cfg, unsigned threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  std::vector<TrajectoryRecord> out(phis.size());
  std::size_t next = 0;
  while (next < phis.size()) {
    std::vector<std::future<void>> batch;
    for (unsigned w = 0; w < threads && next < phis.size(); ++w, ++next) {
      batch.push_back(std::async(std::launch::async, [&, i = next] { out[i] = integrate(spec, phis[i], cfg); }));
    }
    for (auto& f : batch) f.get();
  }
  return out;
}

}  // namespace sdd
