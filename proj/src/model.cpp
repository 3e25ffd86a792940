#include "sdd/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sdd {

DelayFunctional DelayFunctional::tanh_of_inner(Vector w, double kappa, double r) {
  DelayFunctional d;
  d.kind = DelayKind::tanh_of_inner;
  d.weight = std::move(w);
  d.rate = kappa;
  d.r = r;
  d.validate();
  return d;
}

DelayFunctional DelayFunctional::norm_sigmoid(double kappa, double r) {
  DelayFunctional d;
  d.kind = DelayKind::norm_sigmoid;
  d.rate = kappa;
  d.r = r;
  d.validate();
  return d;
}

DelayFunctional DelayFunctional::constant(double tau0, double r) {
  DelayFunctional d;
  d.kind = DelayKind::constant;
  d.value = tau0;
  d.r = r;
  d.validate();
  return d;
}

void DelayFunctional::validate() const {
  if (!(r > 0.0)) throw std::invalid_argument("eta: r must be > 0");
  switch (kind) {
    case DelayKind::tanh_of_inner:
      if (!(rate > 0.0)) throw std::invalid_argument("eta: rate kappa must be > 0");
      if (weight.size() == 0 || !weight.allFinite()) throw std::invalid_argument("eta: weight vector required");
      break;
    case DelayKind::norm_sigmoid:
      if (!(rate > 0.0)) throw std::invalid_argument("eta: rate kappa must be > 0");
      break;
    case DelayKind::constant:
      if (!(value >= 0.0 && value <= r)) throw std::invalid_argument("eta: constant delay must lie in [0, r]");
      break;
  }
}

double DelayFunctional::operator()(const SpectralState& u) const {
  double tau = 0.0;
  switch (kind) {
    case DelayKind::tanh_of_inner: {
      const Eigen::Index n = std::min(u.m(), weight.size());
      tau = 0.5 * r * (1.0 + std::tanh(rate * u.coeffs.head(n).dot(weight.head(n))));
      break;
    }
    case DelayKind::norm_sigmoid: {
      const double s = rate * u.coeffs.norm();
      tau = std::isinf(s) ? r : r * s / (1.0 + s);
      break;
    }
    case DelayKind::constant:
      tau = value;
      break;
  }
  return std::clamp(tau, 0.0, r);
}

double DelayFunctional::lipschitz() const {
  switch (kind) {
    case DelayKind::tanh_of_inner:
      return 0.5 * r * rate * weight.norm();
    case DelayKind::norm_sigmoid:
      return r * rate;
    case DelayKind::constant:
      return 0.0;
  }
  return 0.0;
}

double eval_eta(const DelayFunctional& eta, const HistorySegment& h) { return eta(h.newest()); }

BirthFunction BirthFunction::nicholson(double c1, double c2) {
  if (!(c2 > 0.0)) throw std::invalid_argument("birth: nicholson c2 must be > 0");
  BirthFunction b;
  b.kind = BirthKind::nicholson;
  b.c1 = c1;
  b.c2 = c2;
  return b;
}

BirthFunction BirthFunction::linear(double slope) {
  BirthFunction b;
  b.kind = BirthKind::linear;
  b.slope = slope;
  return b;
}

BirthFunction BirthFunction::bounded_saturating(double c) {
  BirthFunction b;
  b.kind = BirthKind::bounded_saturating;
  b.c = c;
  return b;
}

double BirthFunction::operator()(double s) const {
  switch (kind) {
    case BirthKind::nicholson:
      return c1 * s * std::exp(-c2 * std::abs(s));
    case BirthKind::linear:
      return slope * s;
    case BirthKind::bounded_saturating:
      return c * std::tanh(s);
  }
  return 0.0;
}

double BirthFunction::lipschitz() const {
  switch (kind) {
    case BirthKind::nicholson:
      // |d/ds s e^{-c2 s}| = |1 - c2 s| e^{-c2 s} <= 1 for s >= 0.
      return std::abs(c1);
    case BirthKind::linear:
      return std::abs(slope);
    case BirthKind::bounded_saturating:
      return std::abs(c);
  }
  return 0.0;
}

Smoothing Smoothing::identity() {
  Smoothing b;
  b.kind = SmoothingKind::identity;
  return b;
}

Smoothing Smoothing::lowpass(Eigen::Index k) {
  if (k < 1) throw std::invalid_argument("smoothing: lowpass cutoff must be >= 1");
  Smoothing b;
  b.kind = SmoothingKind::lowpass;
  b.cutoff = k;
  return b;
}

Smoothing Smoothing::diag(Vector sigma) {
  if (sigma.size() == 0 || !sigma.allFinite()) throw std::invalid_argument("smoothing: diag multipliers required");
  Smoothing b;
  b.kind = SmoothingKind::diag;
  b.multipliers = std::move(sigma);
  return b;
}

Vector Smoothing::multipliers_for(Eigen::Index m) const {
  Vector sigma = Vector::Zero(m);
  switch (kind) {
    case SmoothingKind::identity:
      sigma.setOnes();
      break;
    case SmoothingKind::lowpass:
      sigma.head(std::min(m, cutoff)).setOnes();
      break;
    case SmoothingKind::diag: {
      const Eigen::Index n = std::min(m, multipliers.size());
      sigma.head(n) = multipliers.head(n);
      break;
    }
  }
  return sigma;
}

SpectralState DelayedMap::apply(const SpectralState& v, const Spectrum& s) const {
  SpectralState smoothed(v.coeffs.cwiseProduct(B.multipliers_for(v.m())), v.time);
  GridState grid = to_grid(smoothed, s);
  for (Eigen::Index j = 0; j < grid.m(); ++j) grid.values[j] = b(grid.values[j]);
  return from_grid(grid, s, v.time);
}

double DelayedMap::lipschitz_H(const Spectrum& s) const {
  return b.lipschitz() * B.multipliers_for(s.size()).cwiseAbs().maxCoeff();
}

double DelayedMap::lipschitz_Hm12(const Spectrum& s) const {
  const Vector sigma = B.multipliers_for(s.size()).cwiseAbs();
  const Vector scaled = (sigma.array() * s.eigenvalues().array().sqrt()).matrix();
  return b.lipschitz() * scaled.maxCoeff() / std::sqrt(s.lambda(0));
}

double linear_growth_mF(const DelayedMap& fmap, const Spectrum& s) {
  if (fmap.b.kind != BirthKind::linear) return 0.0;
  return std::abs(fmap.b.slope) * fmap.B.multipliers_for(s.size()).cwiseAbs().maxCoeff();
}

SpectralState eval_G(const Nonlinearity& gterm, const SpectralState& u, const Spectrum& s) {
  if (gterm.is_zero()) return SpectralState::zero(u.m(), u.time);
  GridState grid = to_grid(u, s);
  for (Eigen::Index j = 0; j < grid.m(); ++j) grid.values[j] = gterm.g(grid.values[j]);
  return from_grid(grid, s, u.time);
}

double eval_Pi(const Nonlinearity& gterm, const SpectralState& u, const Spectrum& s) {
  if (gterm.is_zero()) return 0.0;
  const GridState grid = to_grid(u, s);
  double sum = 0.0;
  for (Eigen::Index j = 0; j < grid.m(); ++j) sum += gterm.potential_density(grid.values[j]);
  return s.node_weight() * sum;
}

void ModelSpec::validate() const {
  eta.validate();
  if (std::abs(eta.r - r) > 1e-15 * std::max(1.0, r)) throw std::invalid_argument("model: r differs from eta.r");
  if (forcing.m() != spectrum.size()) throw std::invalid_argument("model: forcing h has wrong mode count");
  if (eta.kind == DelayKind::tanh_of_inner && eta.weight.size() != spectrum.size())
    throw std::invalid_argument("model: eta weight has wrong mode count");
}

ModelSpec build_model(const ModelParams& p) { return build_model(p, p.m); }

ModelSpec build_model(const ModelParams& p, Eigen::Index m) {
  ModelSpec spec;
  if (p.eigenvalues.empty()) {
    spec.spectrum = Spectrum::dirichlet(m, p.length);
  } else {
    if (static_cast<Eigen::Index>(p.eigenvalues.size()) < m)
      throw std::invalid_argument("model: fewer custom eigenvalues than modes");
    spec.spectrum = Spectrum::custom(Eigen::Map<const Vector>(p.eigenvalues.data(), m), p.length);
  }
  auto padded = [m](const std::vector<double>& v) {
    Vector out = Vector::Zero(m);
    const auto n = std::min<Eigen::Index>(m, static_cast<Eigen::Index>(v.size()));
    for (Eigen::Index k = 0; k < n; ++k) out[k] = v[static_cast<std::size_t>(k)];
    return out;
  };
  switch (p.eta_kind) {
    case DelayKind::tanh_of_inner:
      spec.eta = DelayFunctional::tanh_of_inner(padded(p.eta_weight), p.eta_rate, p.r);
      break;
    case DelayKind::norm_sigmoid:
      spec.eta = DelayFunctional::norm_sigmoid(p.eta_rate, p.r);
      break;
    case DelayKind::constant:
      spec.eta = DelayFunctional::constant(p.eta_value, p.r);
      break;
  }
  spec.fmap = DelayedMap{p.birth, p.smoothing};
  spec.gterm = p.g;
  spec.forcing = SpectralState(padded(p.forcing));
  spec.r = p.r;
  spec.x_space_includes_h = p.x_space_includes_h;
  spec.validate();
  return spec;
}

SpectralState eval_F(const ModelSpec& spec, const HistorySegment& h) {
  const double tau = eval_eta(spec.eta, h);
  const SpectralState delayed = h.sample(h.t_now() - tau);
  SpectralState f = spec.fmap.apply(delayed, spec.spectrum);
  f.time = h.t_now();
  return f;
}

SpectralState nonlinear_part(const ModelSpec& spec, const HistorySegment& h) {
  const SpectralState f = eval_F(spec, h);
  const SpectralState g = eval_G(spec.gterm, h.newest(), spec.spectrum);
  return SpectralState(spec.forcing.coeffs - f.coeffs - g.coeffs, h.t_now());
}

SpectralState rhs(const ModelSpec& spec, const HistorySegment& h) {
  SpectralState n = nonlinear_part(spec, h);
  n.coeffs -= h.newest().coeffs.cwiseProduct(spec.spectrum.eigenvalues());
  return n;
}

double compatibility_residual(const ModelSpec& spec, const HistorySegment& h) {
  if (!h.has_derivs()) throw std::invalid_argument("compatibility_residual: history has no derivative buffer");
  const SpectralState& u0 = h.newest();
  Vector res = h.newest_deriv().coeffs + u0.coeffs.cwiseProduct(spec.spectrum.eigenvalues()) +
               eval_F(spec, h).coeffs + eval_G(spec.gterm, u0, spec.spectrum).coeffs;
  if (spec.x_space_includes_h) res -= spec.forcing.coeffs;
  return frac_norm(res, -0.5, spec.spectrum);
}

double almost_lipschitz_constant(const ModelSpec& spec) {
  const double lf = spec.fmap.lipschitz_Hm12(spec.spectrum);
  return lf * std::max(1.0 / std::sqrt(spec.spectrum.lambda(0)), spec.eta.lipschitz());
}

std::string to_string(DelayKind k) {
  switch (k) {
    case DelayKind::tanh_of_inner: return "tanh_of_inner";
    case DelayKind::norm_sigmoid: return "norm_sigmoid";
    case DelayKind::constant: return "constant";
  }
  return "?";
}

std::string to_string(BirthKind k) {
  switch (k) {
    case BirthKind::nicholson: return "nicholson";
    case BirthKind::linear: return "linear";
    case BirthKind::bounded_saturating: return "bounded_saturating";
  }
  return "?";
}

std::string to_string(SmoothingKind k) {
  switch (k) {
    case SmoothingKind::identity: return "identity";
    case SmoothingKind::lowpass: return "lowpass";
    case SmoothingKind::diag: return "diag";
  }
  return "?";
}

}  // namespace sdd
