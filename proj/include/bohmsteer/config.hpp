#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bohmsteer/trajectory.hpp"
#include "bohmsteer/weakmeas.hpp"

namespace bohmsteer {

/**
 * Experiment parameters. Lengths in metres, angles in degrees.
 *
 * The config file is flat `key = value` text with `#` comments; list values
 * are comma separated. Keys match the member names below.
 */
struct ExperimentConfig {
  double wavelength = 808e-9;
  double packet_waist = 3e-4;
  double waist_z = 0.0;  // waist plane; the beam displacer sits at z = 0
  double slit_separation = 3e-3;
  double plane_first = 1.492;  // key: plane_range = first, last
  double plane_last = 4.500;
  std::size_t plane_count = 45;
  double zeta = 336.0;
  double phi0 = 0.0;
  double beta = 1.0;
  double photon_budget = 1e7;
  std::vector<double> theta_list{18.5, 31.4, 45.1, 62.9};
  std::vector<double> z_switch_list{1.492, 2.245, 3.038, 3.749};
  std::uint64_t seed = 1;

  std::size_t starts_per_packet = 16;
  double relative_phase = 0.0;          // rad, between the two paths
  double relative_density_floor = 1e-12;
  double count_floor = 10.0;
  double kernel_bandwidth = 0.0;        // m; 0 selects one pixel pitch / beta
  double map_half_width = 4e-3;
  std::size_t map_points = 641;
  double calibration_photons = 1e6;
  std::size_t calibration_seeds = 20;
  bool alignment_coupling = false;

  /// Throws ErrorKind::Validation naming the violated invariant.
  void validate() const;

  double wavenumber() const { return wavenumber_from_wavelength(wavelength); }
  FieldParams field_params() const;
  GaussianPacket packet_template() const;
  BranchState split_state() const;
  SteeringModel steering_model() const;
  PlaneGrid plane_grid() const;
  AcquisitionSettings acquisition() const;
  CouplingModel coupling() const { return CouplingModel(zeta, phi0); }
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace bohmsteer
