#include "bohmsteer/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <regex>

#include "bohmsteer/error.hpp"

namespace bohmsteer {
namespace {

std::string degrees_text(double degrees) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%g", degrees);
  return buffer;
}

double to_degrees(double radians) { return radians * 180.0 / std::numbers::pi; }

ReconstructedField make_reconstructed(const ExperimentConfig& config, std::vector<PlaneMomentum> planes) {
  return ReconstructedField(std::move(planes), config.kernel_bandwidth);
}

}  // namespace

std::string field_label(const std::optional<SteeringLabel>& steering) {
  if (!steering) return "unprojected";
  return "theta_" + degrees_text(to_degrees(steering->theta)) + "_" + outcome_name(steering->outcome);
}

FieldSpec parse_field_label(const std::string& label) {
  if (label == "unprojected") return {label, std::nullopt};
  static const std::regex pattern(R"(theta_([0-9.eE+-]+)_(theta|theta_bar))");
  std::smatch m;
  if (!std::regex_match(label, m, pattern)) fail(ErrorKind::Parse, "unknown field label '" + label + "'");
  const double degrees = parse_number(m[1].str());
  return {label, SteeringLabel{ProjectionBasis::from_degrees(degrees).theta, parse_outcome(m[2].str())}};
}

std::vector<FieldSpec> field_specs(const std::vector<double>& thetas_deg, const std::vector<Outcome>& outcomes) {
  std::vector<FieldSpec> specs{{"unprojected", std::nullopt}};
  for (double t : thetas_deg) {
    for (Outcome o : outcomes) {
      const SteeringLabel label{ProjectionBasis::from_degrees(t).theta, o};
      specs.push_back({field_label(label), label});
    }
  }
  return specs;
}

VelocityField field_for(const SteeringModel& model, const FieldSpec& spec) {
  if (!spec.steering) return model.unprojected();
  return model.projected(ProjectionBasis(spec.steering->theta), spec.steering->outcome).field;
}

std::vector<double> snap_to_grid(const std::vector<double>& zs, const PlaneGrid& grid) {
  std::vector<double> out;
  out.reserve(zs.size());
  for (double z : zs) out.push_back(grid[grid.nearest(z)]);
  return out;
}

std::string trajectories_csv(const std::vector<Trajectory>& trajectories) {
  std::vector<TrajectoryRow> rows;
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    auto r = to_rows(trajectories[i], i);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  return write_trajectory_csv(rows);
}

std::vector<Trajectory> simulate_trajectories(const ExperimentConfig& config) {
  const auto model = config.steering_model();
  const auto grid = config.plane_grid();
  const auto v = as_function(model.unprojected());
  std::vector<Trajectory> out;
  for (double x0 : default_starts(model.unprojected().state(), Plane{grid.front()}, config.starts_per_packet))
    out.push_back(trace(x0, grid, v));
  return out;
}

std::vector<Trajectory> steer_trajectories(const ExperimentConfig& config, double z_switch,
                                           const std::vector<double>& thetas_deg,
                                           const std::vector<Outcome>& outcomes) {
  const auto model = config.steering_model();
  const auto grid = config.plane_grid();
  const auto starts = default_starts(model.unprojected().state(), Plane{grid.front()}, config.starts_per_packet);
  std::vector<Trajectory> out;
  const auto v = as_function(model.unprojected());
  for (double x0 : starts) out.push_back(trace(x0, grid, v));
  for (double t : thetas_deg)
    for (Outcome o : outcomes)
      for (double x0 : starts) out.push_back(trace_steered(x0, grid, z_switch, model, ProjectionBasis::from_degrees(t), o));
  return out;
}

VelocityChangeMap velocity_map(const ExperimentConfig& config, double theta_deg, Outcome outcome) {
  const auto model = config.steering_model();
  const auto xs = symmetric_axis(config.map_half_width, config.map_points);
  return velocity_change_map(model, xs, config.plane_grid(), ProjectionBasis::from_degrees(theta_deg), outcome);
}

std::vector<EmulatedPlane> emulate(const ExperimentConfig& config, const std::vector<FieldSpec>& fields,
                                   const std::vector<std::size_t>& plane_indices, std::uint64_t seed) {
  const auto model = config.steering_model();
  const auto grid = config.plane_grid();
  const auto settings = config.acquisition();
  std::vector<EmulatedPlane> out;
  for (std::size_t f = 0; f < fields.size(); ++f) {
    const auto field = field_for(model, fields[f]);
    for (std::size_t j : plane_indices) {
      require(j < grid.size(), "plane index " + std::to_string(j) + " is outside the grid");
      out.push_back({fields[f].label, j, acquire_plane(model, field, Plane{grid[j]}, settings, derive_seed(seed, {f, j}))});
    }
  }
  return out;
}

std::string image_file_name(std::size_t plane_index, const std::string& label, char section) {
  return "plane_" + std::to_string(plane_index) + "_" + label + "_" + section + ".txt";
}

void write_emulated(const std::filesystem::path& dir, const std::vector<EmulatedPlane>& planes) {
  std::filesystem::create_directories(dir);
  for (const auto& p : planes) {
    write_file_atomic(dir / image_file_name(p.plane_index, p.label, 'R'), write_detector_image(p.images.right));
    write_file_atomic(dir / image_file_name(p.plane_index, p.label, 'L'), write_detector_image(p.images.left));
  }
}

std::vector<EmulatedPlane> read_emulated(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) fail(ErrorKind::Io, "no image directory '" + dir.string() + "'");
  static const std::regex pattern(R"(plane_([0-9]+)_(.+)_R\.txt)");
  std::vector<std::filesystem::path> rights;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) rights.push_back(entry.path());
  std::sort(rights.begin(), rights.end());
  std::vector<EmulatedPlane> out;
  for (const auto& path : rights) {
    const std::string name = path.filename().string();
    std::smatch m;
    if (!std::regex_match(name, m, pattern)) continue;
    const std::size_t j = std::stoul(m[1].str());
    const std::string label = m[2].str();
    parse_field_label(label);
    const auto left_path = dir / image_file_name(j, label, 'L');
    EmulatedPlane p{label, j, {read_detector_image(read_file(path)), read_detector_image(read_file(left_path)), 0}};
    out.push_back(std::move(p));
  }
  if (out.empty()) fail(ErrorKind::Io, "no detector images in '" + dir.string() + "'");
  return out;
}

std::map<std::string, std::vector<PlaneMomentum>> reconstruct_planes(const ExperimentConfig& config,
                                                                     const std::vector<EmulatedPlane>& planes) {
  std::map<std::string, std::vector<PlaneMomentum>> out;
  for (const auto& p : planes)
    out[p.label].push_back(reconstruct_plane(p.images.right, p.images.left, config.coupling(), config.count_floor));
  for (auto& [label, list] : out)
    std::sort(list.begin(), list.end(), [](const auto& a, const auto& b) { return a.plane_z < b.plane_z; });
  return out;
}

const ReconstructedField& Reconstruction::at(const std::string& label) const {
  const auto it = fields.find(label);
  if (it == fields.end()) fail(ErrorKind::InvalidArgument, "no reconstructed field '" + label + "'");
  return it->second;
}

Reconstruction reconstruct(const ExperimentConfig& config, const std::vector<EmulatedPlane>& planes) {
  Reconstruction out;
  for (auto& [label, list] : reconstruct_planes(config, planes))
    out.fields.emplace(label, make_reconstructed(config, std::move(list)));
  return out;
}

std::vector<Trajectory> reconstructed_trajectories(const ExperimentConfig& config, const Reconstruction& recon) {
  const auto& field = recon.at("unprojected");
  const auto grid = config.plane_grid();
  const auto v = [&field](double x, Plane p) { return field.velocity(x, p); };
  std::vector<Trajectory> out;
  for (double x0 : default_starts(config.split_state(), Plane{grid.front()}, config.starts_per_packet))
    out.push_back(trace(x0, grid, v));
  return out;
}

std::vector<Trajectory> reconstructed_steer(const ExperimentConfig& config, const Reconstruction& recon,
                                            double z_switch) {
  const auto grid = config.plane_grid();
  const auto& base = recon.at("unprojected");
  const auto before = [&base](double x, Plane p) { return base.velocity(x, p); };
  auto out = reconstructed_trajectories(config, recon);
  const auto starts = default_starts(config.split_state(), Plane{grid.front()}, config.starts_per_packet);
  for (const auto& [label, field] : recon.fields) {
    const auto spec = parse_field_label(label);
    if (!spec.steering) continue;
    const auto after = [&field](double x, Plane p) { return field.velocity(x, p); };
    for (double x0 : starts) out.push_back(trace_steered(x0, grid, z_switch, before, after, spec.steering));
  }
  return out;
}

CalibrationReport calibrate(const ExperimentConfig& config, double photons, std::size_t seeds, PhaseBranch branch) {
  const auto model = config.coupling();
  auto angles = tilt_sweep_angles();
  if (branch == PhaseBranch::Principal) angles = principal_branch_angles(angles, model);
  if (photons <= 0.0) {
    const auto fit = calibrate_zeta(synthesize_sweep(model, angles, 0.0, config.seed), branch);
    return {fit.model.zeta, fit.zeta_stderr, fit.model.phi0, fit.phi0_stderr};
  }
  require(seeds >= 1, "calibration needs at least one seed");
  std::vector<double> zetas, phis;
  for (std::size_t s = 0; s < seeds; ++s) {
    const auto fit = calibrate_zeta(synthesize_sweep(model, angles, photons, derive_seed(config.seed, {s})), branch);
    zetas.push_back(fit.model.zeta);
    phis.push_back(fit.model.phi0);
  }
  const auto mean_and_sem = [](const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    double mean = 0.0;
    for (double x : v) mean += x / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sem = v.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    return std::pair{mean, sem};
  };
  const auto [zeta, zeta_sem] = mean_and_sem(zetas);
  const auto [phi0, phi0_sem] = mean_and_sem(phis);
  return {zeta, zeta_sem, phi0, phi0_sem};
}

std::string format_report(const CalibrationReport& r) {
  char buffer[160];
  std::snprintf(buffer, sizeof buffer, "zeta=%.6g zeta_stderr=%.3g phi0=%.6g phi0_stderr=%.3g", r.zeta, r.zeta_stderr,
                r.phi0, r.phi0_stderr);
  return buffer;
}

}  // namespace bohmsteer
