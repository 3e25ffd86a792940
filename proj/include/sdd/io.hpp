#pragma once

// CSV persistence. Every float is written with 17 significant digits, so a
// written value reads back to the identical double.
//
// trajectory.csv        t,norm_H,norm_H12,norm_dot_Hm12,eta,V_lyap,cl_norm
// monitors.csv          t,energy,dissipation
// states.csv            t,u1,...,um              (one row per recorded time)
// history_final.csv     t,u1,...,um              (every step of [T - r, T])
// history_final_derivs.csv  t,u1,...,um          (u' at the same times)
// cloud.csv             x1,...,xd                (one point per row)

#include "sdd/dimension.hpp"
#include "sdd/history.hpp"
#include "sdd/integrator.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace sdd::io {

inline constexpr const char* kTrajectoryHeader = "t,norm_H,norm_H12,norm_dot_Hm12,eta,V_lyap,cl_norm";

std::string format_double(double x);

void write_trajectory_csv(const std::filesystem::path& path, const TrajectoryRecord& traj);
// Reads diagnostics rows (and nothing else) back.
TrajectoryRecord read_trajectory_csv(const std::filesystem::path& path);

void write_monitors_csv(const std::filesystem::path& path, const TrajectoryRecord& traj);
void read_monitors_csv(const std::filesystem::path& path, TrajectoryRecord& traj);

void write_states_csv(const std::filesystem::path& path, const std::vector<SpectralState>& states);
std::vector<SpectralState> read_states_csv(const std::filesystem::path& path);

void write_history(const std::filesystem::path& dir, const HistorySegment& h);
// Rebuilds a segment from history_final*.csv; throws when the dump does not
// span r with spacing dt.
HistorySegment read_history(const std::filesystem::path& dir, double r, double dt);

void write_point_cloud_csv(const std::filesystem::path& path, const PointCloud& cloud);
PointCloud read_point_cloud_csv(const std::filesystem::path& path);

// Generic numeric table with a header row.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};
Table read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const Table& table);

}  // namespace sdd::io
