#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bohmsteer/entangled_state.hpp"

namespace bohmsteer {

/// Strictly increasing list of imaging planes (at least two).
class PlaneGrid {
 public:
  explicit PlaneGrid(std::vector<double> planes);
  static PlaneGrid uniform(double first, double last, std::size_t count);

  std::size_t size() const { return planes_.size(); }
  double operator[](std::size_t i) const { return planes_[i]; }
  const std::vector<double>& planes() const { return planes_; }
  double front() const { return planes_.front(); }
  double back() const { return planes_.back(); }

  /// Index of the plane equal to z within `tolerance`, if any.
  std::optional<std::size_t> index_of(double z, double tolerance = 1e-9) const;
  std::size_t nearest(double z) const;
  /// Grid with every interval split in two (2n - 1 planes).
  PlaneGrid refined() const;

 private:
  std::vector<double> planes_;
};

struct TrajectoryPoint {
  double x;
  double z;
};

struct SteeringLabel {
  double theta;  // rad
  Outcome outcome;
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;
  std::optional<double> branch_z;
  std::optional<SteeringLabel> label;
  /// Set when a node (or other field failure) stopped the trajectory early.
  std::optional<std::string> error;

  bool complete() const { return !error.has_value(); }
  double final_x() const { return points.back().x; }
};

/// Velocity source queried at (x, plane). Implementations throw Error on nodes.
using VelocityFunction = std::function<double(double, Plane)>;

VelocityFunction as_function(const VelocityField& field);

/// x + (z_next - z) v / sqrt(c^2 - v^2).
double euler_step(double x, double z, double z_next, double velocity, double light_speed = kSpeedOfLight);

enum class StepRule {
  Euler,     // velocity at the left plane of each step
  Midpoint,  // optional refinement; queries half-step positions off the grid
};

struct TraceOptions {
  StepRule rule = StepRule::Euler;
  double light_speed = kSpeedOfLight;
};

Trajectory trace(double x0, const PlaneGrid& grid, const VelocityFunction& field, TraceOptions options = {});

/// Follows `before` while z_j < z_switch and `after` from z_switch on.
/// z_switch must coincide with a grid plane.
Trajectory trace_steered(double x0, const PlaneGrid& grid, double z_switch, const VelocityFunction& before,
                         const VelocityFunction& after, std::optional<SteeringLabel> label = std::nullopt,
                         TraceOptions options = {});

Trajectory trace_steered(double x0, const PlaneGrid& grid, double z_switch, const SteeringModel& model,
                         ProjectionBasis basis, Outcome outcome, TraceOptions options = {});

/// Row-major table of velocity changes (one row per plane); nodes are empty.
struct VelocityChangeMap {
  std::vector<double> xs;
  std::vector<double> zs;
  std::vector<std::optional<double>> dv_over_c;

  const std::optional<double>& at(std::size_t ix, std::size_t iz) const { return dv_over_c[iz * xs.size() + ix]; }
};

VelocityChangeMap velocity_change_map(const SteeringModel& model, std::span<const double> xs, const PlaneGrid& grid,
                                      ProjectionBasis basis, Outcome outcome);

/// n points symmetric about zero, spacing 2*half_width/(n-1); the middle point
/// is exactly zero for odd n.
std::vector<double> symmetric_axis(double half_width, std::size_t n);

/// `per_packet` equally spaced starts within +-2 w(z0) of each packet center.
std::vector<double> default_starts(const BranchState& state, Plane first_plane, std::size_t per_packet = 16);

}  // namespace bohmsteer
