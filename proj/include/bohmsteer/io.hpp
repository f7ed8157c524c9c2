#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bohmsteer/trajectory.hpp"
#include "bohmsteer/weakmeas.hpp"

namespace bohmsteer {

/// Scientific notation with 17 significant digits; parses back bit-exactly.
std::string format_number(double value);
double parse_number(const std::string& text);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

std::string outcome_name(Outcome outcome);
Outcome parse_outcome(const std::string& name);

struct TrajectoryRow {
  std::size_t trajectory_id;
  double z;
  double x;
  bool branched;
  std::optional<double> theta_deg;
  std::optional<Outcome> outcome;
};

inline constexpr const char* kTrajectoryHeader = "trajectory_id,z_m,x_m,branch_flag,theta_deg,outcome";
inline constexpr const char* kMapHeader = "x_m,z_m,dv_over_c";
inline constexpr const char* kVelocityHeader = "x_m,z_m,v_over_c";

/// Rows for a trajectory; points at or beyond branch_z carry branch_flag 1.
std::vector<TrajectoryRow> to_rows(const Trajectory& trajectory, std::size_t id);

std::string write_trajectory_csv(const std::vector<TrajectoryRow>& rows);
std::vector<TrajectoryRow> read_trajectory_csv(const std::string& text);

struct MapRow {
  double x;
  double z;
  std::optional<double> value;
};

/// `header` is kMapHeader for velocity-change maps or kVelocityHeader for
/// reconstructed velocities.
std::string write_map_csv(const std::vector<MapRow>& rows, const char* header = kMapHeader);
std::vector<MapRow> read_map_csv(const std::string& text);
std::vector<MapRow> to_rows(const VelocityChangeMap& map);

/**
 * Detector image file: `key = value` header lines (plane_z, pixel_pitch_mm,
 * beta, center_offset, seed) followed by a `counts` line and 321
 * whitespace-separated integers in window order (pixel -160 first).
 */
std::string write_detector_image(const DetectorImage& image);
DetectorImage read_detector_image(const std::string& text);

}  // namespace bohmsteer
