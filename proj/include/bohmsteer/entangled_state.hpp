#pragma once

#include <vector>

#include "bohmsteer/wavepacket.hpp"

namespace bohmsteer {

struct PacketTerm {
  Complex coeff;
  GaussianPacket packet;
};

/// Coherent superposition of packets, tagged by one remote state.
struct Branch {
  Complex weight;
  std::vector<PacketTerm> terms;

  Complex evaluate(double x, Plane plane) const;
  Complex gradient(double x, Plane plane) const;
  /// Squared norm of the coherent sum (weight excluded).
  double norm_sq() const;
};

/**
 * State of the steered photon as a list of mutually incoherent branches.
 *
 * Branches are tagged by orthogonal states of the remote photon, so they add
 * in density and current but never interfere. Construction checks that the
 * total norm is one to within `norm_tolerance`.
 */
class BranchState {
 public:
  explicit BranchState(std::vector<Branch> branches, double norm_tolerance = 1e-9);

  const std::vector<Branch>& branches() const { return branches_; }
  std::size_t size() const { return branches_.size(); }
  double norm() const;

  /// Copy with one branch weight multiplied by a unit phase.
  BranchState with_branch_phase(std::size_t branch, double phase) const;

 private:
  std::vector<Branch> branches_;
};

struct ProjectionBasis {
  explicit ProjectionBasis(double theta);
  static ProjectionBasis from_degrees(double degrees);

  double theta;  // rad, in [0, pi)
};

/// Result of the remote polarization projection: Theta is |theta>, ThetaBar
/// its orthogonal complement.
enum class Outcome { Theta, ThetaBar };

struct Projection {
  BranchState state;
  double probability;
};

/**
 * Two-branch state after the beam displacer: left packet (tagged by the
 * remote |H>) at -d/2, right packet (remote |V>) at +d/2, each branch weight
 * 1/sqrt(2). The template supplies waist, waist plane and wavenumber; its
 * center is ignored. `relative_phase` multiplies the right packet.
 */
BranchState make_split_state(double separation, const GaussianPacket& packet_template,
                             double relative_phase = 0.0);

/**
 * Condition a two-branch state on the remote outcome.
 *
 * Theta keeps cos(theta) * first - sin(theta) * second, ThetaBar keeps
 * sin(theta) * first + cos(theta) * second, summed coherently (the path labels
 * on the steered photon are erased). The returned state is a single
 * normalised branch; `probability` is the squared norm before normalising,
 * with p(ThetaBar) = 1 - p(Theta).
 */
Projection project(const BranchState& state, ProjectionBasis basis, Outcome outcome);

struct FieldParams {
  double wavenumber = 0.0;
  double light_speed = kSpeedOfLight;
  /// Density below this fraction of the plane's peak envelope is a node.
  double relative_density_floor = 1e-12;
  double absolute_density_floor = 1e-300;
};

/// Transverse Bohmian velocity field v_x(x, z) = c <k_x>_w / k of a branch state.
class VelocityField {
 public:
  VelocityField(BranchState state, FieldParams params);

  const BranchState& state() const { return state_; }
  const FieldParams& params() const { return params_; }

  /// Total density sum_b |w_b|^2 |psi_b|^2.
  double density(double x, Plane plane) const;
  /// Probability current in velocity units: (c/k) sum_b |w_b|^2 Im(psi_b^* dpsi_b).
  double current(double x, Plane plane) const;
  /// Upper bound of the density at this plane; reference for the node floor.
  double peak_envelope(Plane plane) const;

  /// Throws ErrorKind::Node below the density floor or where |v| >= c.
  double velocity(double x, Plane plane) const;
  double k_ratio(double x, Plane plane) const { return velocity(x, plane) / params_.light_speed; }

 private:
  BranchState state_;
  FieldParams params_;
};

struct ProjectedField {
  VelocityField field;
  double probability;
};

/// Unprojected state plus the machinery to steer it.
class SteeringModel {
 public:
  SteeringModel(BranchState unprojected, FieldParams params);

  const VelocityField& unprojected() const { return unprojected_; }
  ProjectedField projected(ProjectionBasis basis, Outcome outcome) const;

  /// v_projected - v_unprojected at (x, z); propagates node errors.
  double velocity_change(double x, Plane plane, ProjectionBasis basis, Outcome outcome) const;

 private:
  VelocityField unprojected_;
};

}  // namespace bohmsteer
