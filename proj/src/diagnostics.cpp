#include "sdd/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sdd {

namespace {

struct LogFit {
  double r2_deficit = 1.0;  // 1 - R^2 of ln|v - c| against t
  LineFit line;
};

LogFit log_linear(const std::vector<double>& s, const std::vector<double>& v, double floor) {
  std::vector<double> y(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) y[i] = std::log(std::abs(v[i] - floor));
  LogFit out;
  out.line = fit_line(s, y);
  double mean = 0.0;
  for (double x : y) mean += x;
  mean /= static_cast<double>(y.size());
  double total = 0.0;
  for (double x : y) total += (x - mean) * (x - mean);
  const double n = static_cast<double>(y.size());
  out.r2_deficit = total > 0.0 ? out.line.residual * out.line.residual * n / total : 1.0;
  return out;
}

}  // namespace

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& v, double t_a, double t_b) {
  if (t.size() != v.size()) throw std::invalid_argument("fit_decay: series length mismatch");
  if (!(t_b > t_a)) throw std::invalid_argument("fit_decay: degenerate window");
  std::vector<double> s, y;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] >= t_a && t[i] <= t_b) {
      s.push_back(t[i] - t_a);
      y.push_back(v[i]);
    }
  }
  if (s.size() < 10) throw std::invalid_argument("fit_decay: fewer than 10 samples in window");

  DecayFit fit;
  fit.samples = s.size();
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  const double scale = std::max({std::abs(*lo), std::abs(*hi), std::numeric_limits<double>::min()});
  const double spread = *hi - *lo;
  if (spread <= 1e-12 * scale) {
    double mean = 0.0;
    for (double x : y) mean += x;
    fit.floor = mean / static_cast<double>(y.size());
    return fit;
  }

  // The floor sits either below the data (decay from above) or above it
  // (approach from below). Parametrize by the log of its gap to the data and
  // maximize R^2 of the log-linear fit.
  struct Candidate {
    double deficit;
    double floor;
  };
  Candidate best{std::numeric_limits<double>::infinity(), 0.0};
  for (const double side : {-1.0, 1.0}) {
    const double edge = side < 0.0 ? *lo : *hi;
    auto floor_at = [&](double log_gap) { return edge + side * std::exp(log_gap); };
    auto objective = [&](double log_gap) { return log_linear(s, y, floor_at(log_gap)).r2_deficit; };
    const double g_lo = std::log(1e-14 * spread + std::numeric_limits<double>::min());
    const double g_hi = std::log(1e8 * spread);
    constexpr int kScan = 221;
    double step = (g_hi - g_lo) / (kScan - 1);
    int arg = 0;
    double fbest = std::numeric_limits<double>::infinity();
    for (int i = 0; i < kScan; ++i) {
      const double f = objective(g_lo + step * i);
      if (f < fbest) {
        fbest = f;
        arg = i;
      }
    }
    double a = g_lo + step * std::max(arg - 1, 0);
    double b = g_lo + step * std::min(arg + 1, kScan - 1);
    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - ratio * (b - a);
    double x2 = a + ratio * (b - a);
    double f1 = objective(x1);
    double f2 = objective(x2);
    for (int it = 0; it < 200 && (b - a) > 1e-13; ++it) {
      if (f1 < f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - ratio * (b - a);
        f1 = objective(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + ratio * (b - a);
        f2 = objective(x2);
      }
    }
    const double g = 0.5 * (a + b);
    const double f = objective(g);
    if (f < best.deficit) best = {f, floor_at(g)};
  }

  const LogFit lf = log_linear(s, y, best.floor);
  fit.floor = best.floor;
  fit.rate = -lf.line.slope;
  fit.amplitude = (y.front() > best.floor ? 1.0 : -1.0) * std::exp(lf.line.intercept);
  fit.residual = lf.line.residual;
  return fit;
}

double settling_time(const std::vector<double>& t, const std::vector<double>& v, double rel_tol) {
  if (t.size() != v.size() || t.empty()) throw std::invalid_argument("settling_time: bad series");
  const double final_value = v.back();
  const double band = rel_tol * std::max(std::abs(final_value), std::numeric_limits<double>::min());
  std::size_t i = v.size();
  while (i > 0 && std::abs(v[i - 1] - final_value) <= band) --i;
  return t[std::min(i, v.size() - 1)];
}

std::vector<double> column(const TrajectoryRecord& traj, const std::string& name) {
  if (name == "energy") return traj.energy;
  if (name == "dissipation") return traj.dissipation;
  double DiagnosticsRow::*field = nullptr;
  if (name == "t") field = &DiagnosticsRow::t;
  else if (name == "norm_H") field = &DiagnosticsRow::norm_H;
  else if (name == "norm_H12") field = &DiagnosticsRow::norm_H12;
  else if (name == "norm_dot_Hm12") field = &DiagnosticsRow::norm_dot_Hm12;
  else if (name == "eta") field = &DiagnosticsRow::eta;
  else if (name == "V_lyap") field = &DiagnosticsRow::V_lyap;
  else if (name == "cl_norm") field = &DiagnosticsRow::cl_norm;
  else throw std::invalid_argument("unknown trajectory column '" + name + "'");
  std::vector<double> out;
  out.reserve(traj.diag.size());
  for (const auto& row : traj.diag) out.push_back(row.*field);
  return out;
}

AbsorbingRadius absorbing_radius(const TrajectoryRecord& traj, const std::string& quantity, double tail_fraction,
                                 double tol) {
  if (!(tail_fraction > 0.0 && tail_fraction < 1.0))
    throw std::invalid_argument("absorbing_radius: tail_fraction must lie in (0, 1)");
  const std::vector<double> q = column(traj, quantity);
  if (q.size() < 4) throw std::invalid_argument("absorbing_radius: trajectory too short");
  const auto n = q.size();
  const auto tail_len = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(tail_fraction * n)));
  const std::size_t tail_start = n - tail_len;

  AbsorbingRadius out;
  out.R_star = *std::max_element(q.begin() + static_cast<std::ptrdiff_t>(tail_start), q.end());
  const double bound = out.R_star * (1.0 + tol) + std::numeric_limits<double>::min();
  std::size_t entry = n;
  for (std::size_t i = n; i-- > 0;) {
    if (q[i] > bound) break;
    entry = i;
  }
  // A quantity still growing across the tail has no radius to report.
  const std::size_t mid = tail_start + tail_len / 2;
  const double early = *std::max_element(q.begin() + static_cast<std::ptrdiff_t>(tail_start),
                                         q.begin() + static_cast<std::ptrdiff_t>(std::max(mid, tail_start + 1)));
  if (out.R_star > early * (1.0 + tol) + std::numeric_limits<double>::min())
    throw NonDissipative("absorbing_radius: " + quantity + " is still growing in the tail window");
  out.t_entry = traj.times[entry];
  return out;
}

void co_integrate(const ModelSpec& spec, const HistorySampler& phi1, const HistorySampler& phi2,
                  const IntegratorConfig& cfg,
                  const std::function<void(std::size_t, const HistorySegment&, const HistorySegment&)>& on_step) {
  HistorySegment h1 = initial_history(spec, phi1, cfg);
  HistorySegment h2 = initial_history(spec, phi2, cfg);
  const EtdStepper stepper(spec, cfg);
  on_step(0, h1, h2);
  const std::size_t n = cfg.total_steps();
  for (std::size_t k = 1; k <= n; ++k) {
    const double t_next = static_cast<double>(k) * cfg.dt;
    stepper.advance(h1, t_next);
    stepper.advance(h2, t_next);
    on_step(k, h1, h2);
  }
}

SeparationReport pair_separation(const ModelSpec& spec, const HistorySampler& phi1, const HistorySampler& phi2,
                                 const IntegratorConfig& cfg, double beta) {
  const Spectrum& s = spec.spectrum;
  const Vector weak_w = power_weights(s, s.size(), 0.5 - beta).matrix();
  SeparationReport rep;
  double weak = 0.0;
  co_integrate(spec, phi1, phi2, cfg, [&](std::size_t k, const HistorySegment& a, const HistorySegment& b) {
    const Vector diff = a.newest().coeffs - b.newest().coeffs;
    weak = std::max(weak, diff.cwiseProduct(weak_w).norm());
    if (k == 0) rep.initial = frac_norm(diff, 0.5, s) + c_distance(a, b);
    if (k % cfg.record_every != 0) return;
    rep.times.push_back(a.t_now());
    rep.cl_dist.push_back(cl_norm(difference(a, b), s));
    rep.weak_term.push_back(weak);
  });

  const double lambda1 = s.lambda(0);
  double best_c = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= 20; ++i) {
    const double rate = 0.1 * i * lambda1;
    double c = 0.0;
    for (std::size_t j = 0; j < rep.times.size(); ++j) {
      const double denom = std::exp(-rate * rep.times[j]) * rep.initial + rep.weak_term[j];
      if (rep.cl_dist[j] > 0.0) c = std::max(c, denom > 0.0 ? rep.cl_dist[j] / denom : 1e300);
    }
    if (c <= best_c * (1.0 + 1e-9)) {
      if (c < best_c) best_c = c;
      rep.fitted_C = best_c;
      rep.fitted_rate = rate;
    }
  }

  std::vector<double> tt, ll;
  for (std::size_t j = rep.times.size() / 2; j < rep.times.size(); ++j) {
    if (rep.cl_dist[j] > 0.0) {
      tt.push_back(rep.times[j]);
      ll.push_back(std::log(rep.cl_dist[j]));
    }
  }
  if (tt.size() >= 2) rep.decay_rate = -fit_line(tt, ll).slope;
  return rep;
}

namespace {

template <typename Probe>
ScalingProbe scaling_probe(const HistorySampler& phi, const HistorySampler& direction,
                           const std::vector<double>& deltas, Probe&& probe) {
  if (deltas.size() < 2) throw std::invalid_argument("scaling probe: need >= 2 deltas");
  ScalingProbe out;
  out.deltas = deltas;
  std::vector<double> lx, ly;
  for (const double delta : deltas) {
    const HistorySampler shifted = [&phi, &direction, delta](double theta) {
      SpectralState u = phi(theta);
      u.coeffs += delta * direction(theta).coeffs;
      return u;
    };
    const double value = probe(shifted);
    out.values.push_back(value);
    if (value > 0.0) {
      lx.push_back(std::log(delta));
      ly.push_back(std::log(value));
    }
  }
  if (lx.size() >= 2) out.exponent = fit_line(lx, ly).slope;
  return out;
}

}  // namespace

ScalingProbe continuous_dependence(const ModelSpec& spec, const HistorySampler& phi, const HistorySampler& direction,
                                   const std::vector<double>& deltas, const IntegratorConfig& cfg) {
  return scaling_probe(phi, direction, deltas, [&](const HistorySampler& shifted) {
    double sup = 0.0;
    co_integrate(spec, phi, shifted, cfg, [&](std::size_t, const HistorySegment& a, const HistorySegment& b) {
      sup = std::max(sup, (a.newest().coeffs - b.newest().coeffs).norm());
    });
    return sup;
  });
}

ScalingProbe holder_probe(const ModelSpec& spec, const HistorySampler& phi, const HistorySampler& direction,
                          const std::vector<double>& deltas, const IntegratorConfig& cfg) {
  if (!(cfg.T_final > spec.r)) throw std::invalid_argument("holder_probe: T_final must exceed r");
  return scaling_probe(phi, direction, deltas, [&](const HistorySampler& shifted) {
    const HistorySegment a = integrate_final(spec, phi, cfg);
    const HistorySegment b = integrate_final(spec, shifted, cfg);
    const double t = a.t_now();
    return std::sqrt(t - spec.r) * frac_norm(a.newest().coeffs - b.newest().coeffs, 0.5, spec.spectrum);
  });
}

namespace {

struct DissipativitySample {
  double energy;  // ||A^{1/2} u||^2
  double deficit; // -<G(u), A u>
};

std::vector<DissipativitySample> dissipativity_samples(const Nonlinearity& g, const Spectrum& s,
                                                       const std::vector<SpectralState>& samples) {
  std::vector<DissipativitySample> out;
  out.reserve(samples.size());
  for (const auto& u : samples) {
    const double e = frac_norm(u, 0.5, s);
    const SpectralState gu = eval_G(g, u, s);
    const double pairing = gu.coeffs.dot(u.coeffs.cwiseProduct(s.eigenvalues().head(u.m())));
    out.push_back({e * e, -pairing});
  }
  return out;
}

}  // namespace

DissipativityConstants fit_G_dissipativity(const Nonlinearity& g, const Spectrum& s,
                                           const std::vector<SpectralState>& samples) {
  if (samples.size() < 2) throw std::invalid_argument("fit_G_dissipativity: need >= 2 samples");
  const auto pts = dissipativity_samples(g, s, samples);
  std::vector<double> x, y;
  for (const auto& p : pts) {
    x.push_back(p.energy);
    y.push_back(p.deficit);
  }
  DissipativityConstants c;
  c.c1 = std::max(0.0, fit_line(x, y).slope);
  for (const auto& p : pts) c.c2 = std::max(c.c2, p.deficit - c.c1 * p.energy);
  return c;
}

double G_dissipativity_violation(const Nonlinearity& g, const Spectrum& s, const DissipativityConstants& c,
                                 const std::vector<SpectralState>& samples) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& p : dissipativity_samples(g, s, samples)) worst = std::max(worst, p.deficit - c.c1 * p.energy - c.c2);
  return worst;
}

}  // namespace sdd
