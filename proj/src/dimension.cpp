#include "sdd/dimension.hpp"

#include "sdd/fit.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace sdd {

void PointCloud::validate() const {
  if (points.rows() == 0) throw std::invalid_argument("point cloud: empty");
  if (points.cols() < 1) throw std::invalid_argument("point cloud: dimension must be >= 1");
  if (!points.allFinite()) throw std::invalid_argument("point cloud: non-finite coordinates");
}

std::vector<double> default_ladder(const PointCloud& cloud, std::size_t rungs, double ratio) {
  cloud.validate();
  const Vector extent = cloud.points.colwise().maxCoeff() - cloud.points.colwise().minCoeff();
  double eps = extent.maxCoeff();
  if (!(eps > 0.0)) eps = 1.0;
  std::vector<double> ladder;
  for (std::size_t k = 0; k < rungs; ++k) {
    eps *= ratio;
    ladder.push_back(eps);
  }
  return ladder;
}

std::size_t box_count(const PointCloud& cloud, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("box_count: eps must be > 0");
  const Eigen::RowVectorXd lo = cloud.points.colwise().minCoeff();
  const Eigen::Index d = cloud.dim();
  std::vector<std::vector<std::int64_t>> keys(static_cast<std::size_t>(cloud.size()),
                                              std::vector<std::int64_t>(static_cast<std::size_t>(d)));
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j)
      keys[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          static_cast<std::int64_t>(std::floor((cloud.points(i, j) - lo[j]) / eps));
  }
  std::sort(keys.begin(), keys.end());
  return static_cast<std::size_t>(std::unique(keys.begin(), keys.end()) - keys.begin());
}

namespace {

void check_ladder(const std::vector<double>& ladder) {
  if (ladder.size() < 2) throw std::invalid_argument("dimension: need at least 2 scales");
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    if (!(ladder[i] > 0.0)) throw std::invalid_argument("dimension: scales must be positive");
    if (i > 0 && !(ladder[i] < ladder[i - 1])) throw std::invalid_argument("dimension: scales must be descending");
  }
}

}  // namespace

DimensionEstimate box_counting(const PointCloud& cloud, const std::vector<double>& eps_ladder,
                               std::optional<std::pair<std::size_t, std::size_t>> window) {
  cloud.validate();
  check_ladder(eps_ladder);
  DimensionEstimate est;
  est.epsilons = eps_ladder;
  for (const double eps : eps_ladder) est.counts.push_back(box_count(cloud, eps));

  const std::size_t n = eps_ladder.size();
  if (window) {
    if (window->first >= window->second || window->second > n || window->second - window->first < 2)
      throw std::invalid_argument("box_counting: invalid fit window");
    est.window = *window;
  } else {
    const double saturation = static_cast<double>(cloud.size()) / 5.0;
    std::size_t last = n;
    while (last > 0 && est.counts[last - 1] > 1 && static_cast<double>(est.counts[last - 1]) >= saturation) --last;
    std::size_t first = std::min<std::size_t>(2, n);
    if (last < first + 2) {
      first = 0;
      last = std::max(last, std::min<std::size_t>(n, 2));
      if (last < 2) last = n;
    }
    est.window = {first, last};
  }

  std::vector<double> x, y;
  for (std::size_t i = est.window.first; i < est.window.second; ++i) {
    x.push_back(std::log(1.0 / est.epsilons[i]));
    y.push_back(std::log(static_cast<double>(est.counts[i])));
  }
  const LineFit f = fit_line(x, y);
  est.slope = std::max(0.0, f.slope);
  est.residual = f.residual;
  return est;
}

DimensionEstimate correlation_dimension(const PointCloud& cloud, const std::vector<double>& radii) {
  cloud.validate();
  check_ladder(radii);
  std::vector<double> dist;
  const Eigen::Index n = cloud.size();
  dist.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) dist.push_back((cloud.points.row(i) - cloud.points.row(j)).norm());
  std::sort(dist.begin(), dist.end());

  DimensionEstimate est;
  est.epsilons = radii;
  std::vector<double> x, y;
  std::size_t first = radii.size(), last = 0;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const auto c = static_cast<std::size_t>(std::lower_bound(dist.begin(), dist.end(), radii[i]) - dist.begin());
    est.counts.push_back(c);
    if (c > 0) {
      x.push_back(std::log(radii[i]));
      y.push_back(std::log(static_cast<double>(c) / static_cast<double>(dist.size())));
      first = std::min(first, i);
      last = std::max(last, i + 1);
    }
  }
  if (x.size() >= 2) {
    const LineFit f = fit_line(x, y);
    est.slope = std::max(0.0, f.slope);
    est.residual = f.residual;
    est.window = {first, last};
  }
  return est;
}

double thmA6_bound(double gamma, double L_K, double mZ_value) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("thmA6_bound: gamma must lie in (0, 1)");
  if (!(L_K > 0.0)) throw std::invalid_argument("thmA6_bound: L_K must be > 0");
  if (!(mZ_value >= 1.0)) throw std::invalid_argument("thmA6_bound: packing count must be >= 1");
  return std::log(mZ_value) / std::log(2.0 / (1.0 + gamma));
}

namespace {

std::vector<HistorySampler> random_histories(const ModelSpec& spec, const AttractorSampling& opts) {
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<HistorySampler> out;
  for (std::size_t i = 0; i < opts.n_traj; ++i) {
    Vector c(spec.m());
    for (Eigen::Index k = 0; k < spec.m(); ++k) c[k] = opts.amplitude * unit(rng) / static_cast<double>(k + 1);
    out.push_back([c](double) { return SpectralState(c); });
  }
  return out;
}

}  // namespace

std::vector<PointCloud> sample_attractor_embeddings(const ModelSpec& spec, const IntegratorConfig& cfg,
                                                    const AttractorSampling& opts,
                                                    const std::vector<Eigen::Index>& modes) {
  if (opts.n_traj == 0) throw std::invalid_argument("sample_attractor: n_traj must be >= 1");
  if (!(opts.transient >= 0.0 && opts.transient < cfg.T_final))
    throw std::invalid_argument("sample_attractor: transient must lie in [0, T_final)");
  for (const auto k : modes)
    if (k < 1 || k > spec.m()) throw std::invalid_argument("sample_attractor: embed_modes must lie in [1, m]");
  const double ratio = opts.sample_dt / cfg.dt;
  const double every = std::round(ratio);
  if (every < 1.0 || std::abs(ratio - every) > 1e-9 * every)
    throw std::invalid_argument("sample_attractor: sample_dt must be a multiple of dt");

  IntegratorConfig run = cfg;
  run.record_every = static_cast<std::size_t>(every);
  run.keep_states = true;
  const auto trajectories = integrate_ensemble(spec, random_histories(spec, opts), run);

  std::vector<const SpectralState*> kept;
  for (const auto& traj : trajectories)
    for (const auto& u : traj.states)
      if (u.time >= opts.transient - 1e-9 * cfg.dt) kept.push_back(&u);

  std::vector<PointCloud> clouds;
  for (const auto k : modes) {
    PointCloud cloud;
    cloud.seed = opts.seed;
    cloud.points.resize(static_cast<Eigen::Index>(kept.size()), k);
    for (std::size_t i = 0; i < kept.size(); ++i)
      cloud.points.row(static_cast<Eigen::Index>(i)) = kept[i]->coeffs.head(k).transpose();
    cloud.meta = "m=" + std::to_string(spec.m()) + " n_traj=" + std::to_string(opts.n_traj) +
                 " transient=" + std::to_string(opts.transient) + " sample_dt=" + std::to_string(opts.sample_dt) +
                 " embed_modes=" + std::to_string(k) + " seed=" + std::to_string(opts.seed);
    if (kept.size() < 1000) cloud.warnings.push_back("fewer than 1000 points sampled");
    clouds.push_back(std::move(cloud));
  }
  return clouds;
}

PointCloud sample_attractor(const ModelSpec& spec, const IntegratorConfig& cfg, const AttractorSampling& opts) {
  return std::move(sample_attractor_embeddings(spec, cfg, opts, {opts.embed_modes}).front());
}

}  // namespace sdd
