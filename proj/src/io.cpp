#include "sdd/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sdd::io {

namespace fs = std::filesystem;

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

Table read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  Table table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) table.header.push_back(cell);
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    const char* p = line.c_str();
    while (*p) {
      char* end = nullptr;
      const double v = std::strtod(p, &end);
      if (end == p) throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": malformed number");
      row.push_back(v);
      p = end;
      if (*p == ',') ++p;
    }
    if (row.size() != table.header.size())
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": expected " +
                               std::to_string(table.header.size()) + " columns");
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_csv(const fs::path& path, const Table& table) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
    out << '\n';
  }
}

void write_trajectory_csv(const fs::path& path, const TrajectoryRecord& traj) {
  Table t;
  t.header = {"t", "norm_H", "norm_H12", "norm_dot_Hm12", "eta", "V_lyap", "cl_norm"};
  for (const auto& d : traj.diag) t.rows.push_back({d.t, d.norm_H, d.norm_H12, d.norm_dot_Hm12, d.eta, d.V_lyap, d.cl_norm});
  write_csv(path, t);
}

TrajectoryRecord read_trajectory_csv(const fs::path& path) {
  const Table t = read_csv(path);
  if (t.header.size() != 7 || t.header.front() != "t")
    throw std::runtime_error(path.string() + ": unexpected trajectory header");
  TrajectoryRecord traj;
  for (const auto& r : t.rows) {
    traj.diag.push_back({r[0], r[1], r[2], r[3], r[4], r[5], r[6]});
    traj.times.push_back(r[0]);
    traj.sup_norm_H = std::max(traj.sup_norm_H, r[1]);
  }
  return traj;
}

void write_monitors_csv(const fs::path& path, const TrajectoryRecord& traj) {
  Table t;
  t.header = {"t", "energy", "dissipation"};
  for (std::size_t i = 0; i < traj.times.size(); ++i) t.rows.push_back({traj.times[i], traj.energy[i], traj.dissipation[i]});
  write_csv(path, t);
}

void read_monitors_csv(const fs::path& path, TrajectoryRecord& traj) {
  const Table t = read_csv(path);
  if (t.rows.size() != traj.times.size()) throw std::runtime_error(path.string() + ": row count differs from trajectory");
  traj.energy.clear();
  traj.dissipation.clear();
  for (const auto& r : t.rows) {
    traj.energy.push_back(r[1]);
    traj.dissipation.push_back(r[2]);
  }
}

namespace {

Table state_table(const std::vector<SpectralState>& states) {
  Table t;
  const Eigen::Index m = states.empty() ? 0 : states.front().m();
  t.header.push_back("t");
  for (Eigen::Index k = 1; k <= m; ++k) t.header.push_back("u" + std::to_string(k));
  for (const auto& u : states) {
    std::vector<double> row{u.time};
    row.insert(row.end(), u.coeffs.data(), u.coeffs.data() + u.m());
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::vector<SpectralState> states_from(const Table& t) {
  std::vector<SpectralState> out;
  for (const auto& r : t.rows) {
    Vector c(static_cast<Eigen::Index>(r.size() - 1));
    for (Eigen::Index k = 0; k < c.size(); ++k) c[k] = r[static_cast<std::size_t>(k) + 1];
    out.emplace_back(std::move(c), r[0]);
  }
  return out;
}

}  // namespace

void write_states_csv(const fs::path& path, const std::vector<SpectralState>& states) {
  write_csv(path, state_table(states));
}

std::vector<SpectralState> read_states_csv(const fs::path& path) { return states_from(read_csv(path)); }

void write_history(const fs::path& dir, const HistorySegment& h) {
  write_states_csv(dir / "history_final.csv", {h.states().begin(), h.states().end()});
  if (h.has_derivs()) write_states_csv(dir / "history_final_derivs.csv", {h.derivs().begin(), h.derivs().end()});
}

HistorySegment read_history(const fs::path& dir, double r, double dt) {
  const auto states = read_states_csv(dir / "history_final.csv");
  const std::size_t n = checked_step_count(r, dt);
  if (states.size() < 2 || std::abs((states.back().time - states.front().time) - r) > 1e-9 * std::max(1.0, r) ||
      states.size() != n + 1)
    throw std::runtime_error("state dump in " + dir.string() + " does not span the delay interval r = " +
                             format_double(r));
  std::vector<SpectralState> derivs;
  if (fs::exists(dir / "history_final_derivs.csv")) derivs = read_states_csv(dir / "history_final_derivs.csv");
  return HistorySegment({states.begin(), states.end()}, {derivs.begin(), derivs.end()}, r, dt);
}

void write_point_cloud_csv(const fs::path& path, const PointCloud& cloud) {
  Table t;
  for (Eigen::Index j = 1; j <= cloud.dim(); ++j) t.header.push_back("x" + std::to_string(j));
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(cloud.dim()));
    for (Eigen::Index j = 0; j < cloud.dim(); ++j) row[static_cast<std::size_t>(j)] = cloud.points(i, j);
    t.rows.push_back(std::move(row));
  }
  write_csv(path, t);
}

PointCloud read_point_cloud_csv(const fs::path& path) {
  const Table t = read_csv(path);
  PointCloud cloud;
  cloud.points.resize(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(t.header.size()));
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    for (std::size_t j = 0; j < t.header.size(); ++j)
      cloud.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = t.rows[i][j];
  cloud.meta = path.filename().string();
  return cloud;
}

}  // namespace sdd::io
