#include "bohmsteer/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bohmsteer/error.hpp"

namespace bohmsteer {

PlaneGrid::PlaneGrid(std::vector<double> planes) : planes_(std::move(planes)) {
  if (planes_.size() < 2) fail(ErrorKind::Validation, "plane grid needs at least 2 planes");
  for (std::size_t i = 0; i < planes_.size(); ++i) {
    if (!std::isfinite(planes_[i])) fail(ErrorKind::Validation, "plane positions must be finite");
    if (i > 0 && !(planes_[i] > planes_[i - 1])) fail(ErrorKind::Validation, "plane positions must increase strictly");
  }
}

PlaneGrid PlaneGrid::uniform(double first, double last, std::size_t count) {
  if (count < 2) fail(ErrorKind::Validation, "plane grid needs at least 2 planes");
  std::vector<double> planes(count);
  const double step = (last - first) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) planes[i] = first + step * static_cast<double>(i);
  planes.back() = last;
  return PlaneGrid(std::move(planes));
}

std::optional<std::size_t> PlaneGrid::index_of(double z, double tolerance) const {
  const std::size_t i = nearest(z);
  if (std::abs(planes_[i] - z) <= tolerance) return i;
  return std::nullopt;
}

std::size_t PlaneGrid::nearest(double z) const {
  const auto it = std::lower_bound(planes_.begin(), planes_.end(), z);
  if (it == planes_.begin()) return 0;
  if (it == planes_.end()) return planes_.size() - 1;
  const auto i = static_cast<std::size_t>(it - planes_.begin());
  return (z - planes_[i - 1] <= planes_[i] - z) ? i - 1 : i;
}

PlaneGrid PlaneGrid::refined() const {
  std::vector<double> planes;
  planes.reserve(2 * planes_.size() - 1);
  for (std::size_t i = 0; i + 1 < planes_.size(); ++i) {
    planes.push_back(planes_[i]);
    planes.push_back(0.5 * (planes_[i] + planes_[i + 1]));
  }
  planes.push_back(planes_.back());
  return PlaneGrid(std::move(planes));
}

VelocityFunction as_function(const VelocityField& field) {
  return [&field](double x, Plane plane) { return field.velocity(x, plane); };
}

double euler_step(double x, double z, double z_next, double velocity, double light_speed) {
  require(z_next > z, "euler step needs z_next > z");
  if (!(std::abs(velocity) < light_speed)) fail(ErrorKind::InvalidArgument, "euler step needs |v| < c");
  return x + (z_next - z) * velocity / std::sqrt(light_speed * light_speed - velocity * velocity);
}

namespace {

double step(double x, double z, double z_next, const VelocityFunction& field, const TraceOptions& options) {
  const double v = field(x, Plane{z});
  if (options.rule == StepRule::Euler) return euler_step(x, z, z_next, v, options.light_speed);
  const double z_mid = 0.5 * (z + z_next);
  const double x_mid = euler_step(x, z, z_mid, v, options.light_speed);
  const double v_mid = field(x_mid, Plane{z_mid});
  return euler_step(x, z, z_next, v_mid, options.light_speed);
}

Trajectory run(double x0, const PlaneGrid& grid, std::optional<std::size_t> switch_index,
               const VelocityFunction& before, const VelocityFunction& after, const TraceOptions& options) {
  Trajectory out;
  out.points.reserve(grid.size());
  out.points.push_back({x0, grid[0]});
  double x = x0;
  for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
    const bool steered = switch_index && j >= *switch_index;
    try {
      x = step(x, grid[j], grid[j + 1], steered ? after : before, options);
    } catch (const Error& e) {
      out.error = e.what();
      return out;
    }
    out.points.push_back({x, grid[j + 1]});
  }
  return out;
}

}  // namespace

Trajectory trace(double x0, const PlaneGrid& grid, const VelocityFunction& field, TraceOptions options) {
  return run(x0, grid, std::nullopt, field, field, options);
}

Trajectory trace_steered(double x0, const PlaneGrid& grid, double z_switch, const VelocityFunction& before,
                         const VelocityFunction& after, std::optional<SteeringLabel> label, TraceOptions options) {
  const auto index = grid.index_of(z_switch);
  if (!index) {
    std::ostringstream msg;
    msg << "steering plane z=" << z_switch << " is not on the plane grid";
    fail(ErrorKind::OffGrid, msg.str());
  }
  Trajectory out = run(x0, grid, index, before, after, options);
  out.branch_z = grid[*index];
  out.label = label;
  return out;
}

Trajectory trace_steered(double x0, const PlaneGrid& grid, double z_switch, const SteeringModel& model,
                         ProjectionBasis basis, Outcome outcome, TraceOptions options) {
  const ProjectedField projected = model.projected(basis, outcome);
  return trace_steered(x0, grid, z_switch, as_function(model.unprojected()), as_function(projected.field),
                       SteeringLabel{basis.theta, outcome}, options);
}

VelocityChangeMap velocity_change_map(const SteeringModel& model, std::span<const double> xs, const PlaneGrid& grid,
                                      ProjectionBasis basis, Outcome outcome) {
  const ProjectedField projected = model.projected(basis, outcome);
  const double c = model.unprojected().params().light_speed;
  VelocityChangeMap map;
  map.xs.assign(xs.begin(), xs.end());
  map.zs = grid.planes();
  map.dv_over_c.reserve(xs.size() * grid.size());
  for (double z : map.zs) {
    for (double x : map.xs) {
      try {
        const double before = model.unprojected().velocity(x, Plane{z});
        map.dv_over_c.emplace_back((projected.field.velocity(x, Plane{z}) - before) / c);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::Node) throw;
        map.dv_over_c.emplace_back(std::nullopt);
      }
    }
  }
  return map;
}

std::vector<double> symmetric_axis(double half_width, std::size_t n) {
  require(n >= 2, "axis needs at least 2 points");
  std::vector<double> axis(n);
  const double half = 0.5 * static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) axis[i] = half_width * (static_cast<double>(i) - half) / half;
  return axis;
}

std::vector<double> default_starts(const BranchState& state, Plane first_plane, std::size_t per_packet) {
  require(per_packet >= 2, "need at least 2 starts per packet");
  std::vector<double> starts;
  for (const auto& branch : state.branches()) {
    for (const auto& term : branch.terms) {
      const double center = term.packet.center_x();
      const double reach = 2.0 * term.packet.width(first_plane);
      for (std::size_t i = 0; i < per_packet; ++i) {
        starts.push_back(center - reach + 2.0 * reach * static_cast<double>(i) / static_cast<double>(per_packet - 1));
      }
    }
  }
  std::sort(starts.begin(), starts.end());
  return starts;
}

}  // namespace bohmsteer
