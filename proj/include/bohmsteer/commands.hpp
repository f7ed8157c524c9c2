#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bohmsteer/config.hpp"
#include "bohmsteer/io.hpp"

namespace bohmsteer {

/// A field to image: the unprojected state or one steering outcome.
struct FieldSpec {
  std::string label;  // "unprojected" or "theta_<deg>_<theta|theta_bar>"
  std::optional<SteeringLabel> steering;
};

std::string field_label(const std::optional<SteeringLabel>& steering);
FieldSpec parse_field_label(const std::string& label);

/// The unprojected field followed by every (theta, outcome) pair.
std::vector<FieldSpec> field_specs(const std::vector<double>& thetas_deg, const std::vector<Outcome>& outcomes);
VelocityField field_for(const SteeringModel& model, const FieldSpec& spec);

/// Each requested switch plane moved to the nearest grid plane.
std::vector<double> snap_to_grid(const std::vector<double>& zs, const PlaneGrid& grid);

std::string trajectories_csv(const std::vector<Trajectory>& trajectories);

std::vector<Trajectory> simulate_trajectories(const ExperimentConfig& config);

/// Unprojected reference trajectories (unlabelled) followed by one group per
/// (theta, outcome), all from the same starts. `z_switch` must be a grid plane.
std::vector<Trajectory> steer_trajectories(const ExperimentConfig& config, double z_switch,
                                           const std::vector<double>& thetas_deg,
                                           const std::vector<Outcome>& outcomes);

VelocityChangeMap velocity_map(const ExperimentConfig& config, double theta_deg, Outcome outcome);

struct EmulatedPlane {
  std::string label;
  std::size_t plane_index;
  AcquiredPlane images;
};

/// Images of every field at the given plane indices. Each (field, plane)
/// draws from its own stream derived from `seed`.
std::vector<EmulatedPlane> emulate(const ExperimentConfig& config, const std::vector<FieldSpec>& fields,
                                   const std::vector<std::size_t>& plane_indices, std::uint64_t seed);

/// "plane_<j>_<label>_<R|L>.txt"
std::string image_file_name(std::size_t plane_index, const std::string& label, char section);
void write_emulated(const std::filesystem::path& dir, const std::vector<EmulatedPlane>& planes);
std::vector<EmulatedPlane> read_emulated(const std::filesystem::path& dir);

/// Per-label reconstructed planes, ordered by z.
std::map<std::string, std::vector<PlaneMomentum>> reconstruct_planes(const ExperimentConfig& config,
                                                                     const std::vector<EmulatedPlane>& planes);

struct Reconstruction {
  std::map<std::string, ReconstructedField> fields;

  const ReconstructedField& at(const std::string& label) const;
};

Reconstruction reconstruct(const ExperimentConfig& config, const std::vector<EmulatedPlane>& planes);

std::vector<Trajectory> reconstructed_trajectories(const ExperimentConfig& config, const Reconstruction& recon);

/// Same layout as steer_trajectories, for every steered field in `recon`.
std::vector<Trajectory> reconstructed_steer(const ExperimentConfig& config, const Reconstruction& recon,
                                            double z_switch);

struct CalibrationReport {
  double zeta;
  double zeta_stderr;
  double phi0;
  double phi0_stderr;
};

/// Synthetic sweep with the configured coupling. photons <= 0 is noiseless;
/// otherwise `seeds` independent sweeps are fitted and averaged, with the
/// standard error of the mean reported.
CalibrationReport calibrate(const ExperimentConfig& config, double photons, std::size_t seeds, PhaseBranch branch);
std::string format_report(const CalibrationReport& report);

}  // namespace bohmsteer
