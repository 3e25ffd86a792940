#pragma once

// Exponential time differencing for the Galerkin system
//   <u' + A u + F(u_t) + G(u) - h, e_k> = 0,  k = 1..m.
// The linear part is integrated exactly; the delay is read explicitly from the
// history buffer, which always contains t_now - eta because eta >= 0.

#include "sdd/history.hpp"
#include "sdd/model.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sdd {

enum class Scheme { etd1, etd_rk2 };

Scheme parse_scheme(const std::string& name);
std::string to_string(Scheme s);

struct IntegratorConfig {
  double dt = 0.01;
  Scheme scheme = Scheme::etd_rk2;
  double T_final = 1.0;
  std::size_t record_every = 1;
  bool keep_states = false;
  double mu = 0.25;

  // dt | r, T_final >= dt, record_every >= 1.
  void validate(double r) const;
  std::size_t total_steps() const;
};

class BlowUp : public std::runtime_error {
 public:
  BlowUp(double time, const std::string& what)
      : std::runtime_error(what + " at t = " + std::to_string(time)), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

// One persisted diagnostics row; column order is the CSV header order.
struct DiagnosticsRow {
  double t = 0.0;
  double norm_H = 0.0;
  double norm_H12 = 0.0;
  double norm_dot_Hm12 = 0.0;
  double eta = 0.0;
  double V_lyap = 0.0;
  double cl_norm = 0.0;
};

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<DiagnosticsRow> diag;
  // ||A^{-1/2} u'||^2 + ||A^{1/2} u||^2 at each recorded time.
  std::vector<double> energy;
  // int_0^t (||u'||^2 + ||A u||^2) at each recorded time.
  std::vector<double> dissipation;
  std::vector<SpectralState> states;  // filled when keep_states
  // Supremum over every step (not only recorded ones) of ||u(t)||.
  double sup_norm_H = 0.0;
};

// (e^z - 1)/z with the Taylor branch 1 + z/2 + z^2/6 + z^3/24 for |z| <= 1e-5.
double phi1(double z);
// (e^z - 1 - z)/z^2.
double phi2(double z);

// Precomputed per-mode ETD weights for one (spectrum, dt, scheme).
class EtdStepper {
 public:
  EtdStepper(const ModelSpec& spec, const IntegratorConfig& cfg);

  // Advances h by one step in place: pushes u(t+dt) and stores u'(t+dt) from
  // the right-hand side at the new state.
  void advance(HistorySegment& h, double t_next) const;

 private:
  const ModelSpec* spec_;
  Scheme scheme_;
  Vector decay_;  // e^{-lambda dt}
  Vector w1_;     // dt phi1(-lambda dt)
  Vector w2_;     // dt phi2(-lambda dt)
};

// Pure single step: returns (u(t+dt), u'(t+dt)).
std::pair<SpectralState, SpectralState> step(const ModelSpec& spec, const HistorySegment& h,
                                             const IntegratorConfig& cfg);

DiagnosticsRow diagnostics_row(const ModelSpec& spec, const HistorySegment& h, double mu);

// Resumable trajectory. Times are start_time + n dt with an integer step count
// so that split and continuous runs land on identical timestamps.
class Simulation {
 public:
  Simulation(const ModelSpec& spec, const IntegratorConfig& cfg, HistorySegment initial, std::size_t start_step = 0,
             double dissipation = 0.0);

  // Appends rows for steps in (step(), end_step] that are multiples of record_every.
  void run_until(std::size_t end_step, TrajectoryRecord& out);
  void record(TrajectoryRecord& out) const;

  const HistorySegment& history() const { return history_; }
  std::size_t step_index() const { return step_; }
  double time() const { return history_.t_now(); }
  double dissipation() const { return dissipation_; }

 private:
  double dissipation_rate() const;

  const ModelSpec* spec_;
  IntegratorConfig cfg_;
  EtdStepper stepper_;
  HistorySegment history_;
  std::size_t step_;
  double origin_;
  double dissipation_;
};

HistorySegment initial_history(const ModelSpec& spec, const HistorySampler& phi, const IntegratorConfig& cfg);

// Integrates from t = 0 to T_final; the first row is t = 0.
TrajectoryRecord integrate(const ModelSpec& spec, const HistorySampler& phi, const IntegratorConfig& cfg);

// Final history after integrating to T_final without recording.
HistorySegment integrate_final(const ModelSpec& spec, const HistorySampler& phi, const IntegratorConfig& cfg);

struct RefinementRow {
  Eigen::Index m = 0;
  double error_H = 0.0;
  double error_H12 = 0.0;
};

// Integrates the order-m Galerkin system for each m in m_list (ascending) with
// projected initial data P_m phi and reports ||u^m(T) - u^{m_max}(T)||.
// phi must produce states of order m_list.back().
std::vector<RefinementRow> galerkin_refine(const ModelParams& params, const HistorySampler& phi,
                                           const IntegratorConfig& cfg, const std::vector<Eigen::Index>& m_list);

// Runs independent trajectories on worker threads; results keep input order.
std::vector<TrajectoryRecord> integrate_ensemble(const ModelSpec& spec, const std::vector<HistorySampler>& phis,
                                                 const IntegratorConfig& cfg, unsigned threads = 0);

}  // namespace sdd
