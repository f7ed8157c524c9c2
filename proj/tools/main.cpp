#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "bohmsteer/commands.hpp"
#include "bohmsteer/error.hpp"
#include "bohmsteer/render.hpp"

namespace fs = std::filesystem;
using namespace bohmsteer;

namespace {

std::vector<Outcome> outcomes_from(const std::string& name) {
  if (name == "both") return {Outcome::Theta, Outcome::ThetaBar};
  return {parse_outcome(name)};
}

std::string theta_file_tag(double degrees, Outcome outcome) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%g", degrees);
  return std::string("theta_") + buffer + "_" + outcome_name(outcome);
}

void report(const fs::path& path) { std::cout << "wrote " << path.string() << "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bohmian trajectories of entangled photons under remote steering"};
  app.require_subcommand(1);

  std::string config_path;
  fs::path out_dir = ".";
  app.add_option("--config", config_path, "key = value config file (defaults when omitted)");
  app.add_option("--out", out_dir, "output directory");

  auto* simulate = app.add_subcommand("simulate", "unprojected trajectories -> trajectories.csv");

  auto* steer = app.add_subcommand("steer", "steered trajectories -> steer_z<k>.csv, one file per switch plane");
  std::vector<double> steer_thetas, steer_switches;
  std::string steer_outcome = "theta";
  steer->add_option("--theta", steer_thetas, "projection angles in degrees (default: theta_list)");
  steer->add_option("--outcome", steer_outcome, "theta, theta_bar or both")->check(CLI::IsMember({"theta", "theta_bar", "both"}));
  steer->add_option("--z-switch", steer_switches, "switch planes in metres, snapped to the grid (default: z_switch_list)");

  auto* vmap = app.add_subcommand("velocity-map", "velocity change maps -> velocity_map_<theta>.csv");
  std::vector<double> map_thetas;
  std::string map_outcome = "theta";
  vmap->add_option("--theta", map_thetas, "projection angles in degrees (default: theta_list)");
  vmap->add_option("--outcome", map_outcome, "theta, theta_bar or both")->check(CLI::IsMember({"theta", "theta_bar", "both"}));

  auto* emulate_cmd = app.add_subcommand("emulate", "detector images -> images/plane_<j>_<label>_<R|L>.txt");
  std::vector<std::size_t> emulate_planes;
  std::optional<std::uint64_t> emulate_seed;
  std::string emulate_outcome = "both";
  emulate_cmd->add_option("--plane", emulate_planes, "plane indices (default: all)");
  emulate_cmd->add_option("--seed", emulate_seed, "base seed (default: config seed)");
  emulate_cmd->add_option("--outcome", emulate_outcome, "theta, theta_bar or both")->check(CLI::IsMember({"theta", "theta_bar", "both"}));

  auto* reconstruct_cmd = app.add_subcommand("reconstruct", "detector images -> velocity and trajectory CSVs");
  fs::path images_dir;
  reconstruct_cmd->add_option("--images", images_dir, "image directory (default: <out>/images)");

  auto* calibrate_cmd = app.add_subcommand("calibrate", "fit the coupling strength to a synthetic tilt sweep");
  std::optional<double> cal_photons;
  std::optional<std::size_t> cal_seeds;
  std::string cal_mode = "unwrap";
  calibrate_cmd->add_option("--photons", cal_photons, "photons per sweep point, 0 for noiseless (default: config)");
  calibrate_cmd->add_option("--seeds", cal_seeds, "number of noisy sweeps to average (default: config)");
  calibrate_cmd->add_option("--mode", cal_mode, "unwrap or principal")->check(CLI::IsMember({"unwrap", "principal"}));

  auto* render_cmd = app.add_subcommand("render", "trajectory or map CSV -> SVG");
  fs::path render_in, render_out;
  render_cmd->add_option("--input", render_in, "CSV file")->required();
  render_cmd->add_option("--output", render_out, "SVG file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << e.what() << "\n";
    return 2;
  }

  try {
    const ExperimentConfig config = config_path.empty() ? parse_config("") : load_config(config_path);
    fs::create_directories(out_dir);

    if (*simulate) {
      const auto path = out_dir / "trajectories.csv";
      write_file_atomic(path, trajectories_csv(simulate_trajectories(config)));
      report(path);
    } else if (*steer) {
      const auto thetas = steer_thetas.empty() ? config.theta_list : steer_thetas;
      const auto requested = steer_switches.empty() ? config.z_switch_list : steer_switches;
      const auto switches = snap_to_grid(requested, config.plane_grid());
      for (std::size_t k = 0; k < switches.size(); ++k) {
        const auto path = out_dir / ("steer_z" + std::to_string(k) + ".csv");
        write_file_atomic(path, trajectories_csv(steer_trajectories(config, switches[k], thetas, outcomes_from(steer_outcome))));
        std::cout << "z_switch " << requested[k] << " -> plane " << format_number(switches[k]) << ": ";
        report(path);
      }
    } else if (*vmap) {
      const auto thetas = map_thetas.empty() ? config.theta_list : map_thetas;
      for (double t : thetas) {
        for (Outcome o : outcomes_from(map_outcome)) {
          const auto path = out_dir / ("velocity_map_" + theta_file_tag(t, o) + ".csv");
          write_file_atomic(path, write_map_csv(to_rows(velocity_map(config, t, o))));
          report(path);
        }
      }
    } else if (*emulate_cmd) {
      std::vector<std::size_t> planes = emulate_planes;
      if (planes.empty())
        for (std::size_t j = 0; j < config.plane_count; ++j) planes.push_back(j);
      const auto fields = field_specs(config.theta_list, outcomes_from(emulate_outcome));
      const auto images = emulate(config, fields, planes, emulate_seed.value_or(config.seed));
      std::size_t warnings = 0;
      for (const auto& p : images) warnings += p.images.phase_warnings;
      write_emulated(out_dir / "images", images);
      std::cout << "wrote " << 2 * images.size() << " images to " << (out_dir / "images").string() << "\n";
      if (warnings > 0) std::cerr << "warning: " << warnings << " pixels with |phase| >= pi/2\n";
    } else if (*reconstruct_cmd) {
      const auto planes = read_emulated(images_dir.empty() ? out_dir / "images" : images_dir);
      for (const auto& [label, list] : reconstruct_planes(config, planes)) {
        std::vector<MapRow> rows;
        for (const auto& p : list)
          for (std::size_t i = 0; i < p.positions.size(); ++i) rows.push_back({p.positions[i], p.plane_z, p.k_ratio[i]});
        const auto path = out_dir / ("velocity_" + label + ".csv");
        write_file_atomic(path, write_map_csv(rows, kVelocityHeader));
        report(path);
      }
      const auto recon = reconstruct(config, planes);
      const auto traj_path = out_dir / "trajectories_reconstructed.csv";
      write_file_atomic(traj_path, trajectories_csv(reconstructed_trajectories(config, recon)));
      report(traj_path);
      const auto switches = snap_to_grid(config.z_switch_list, config.plane_grid());
      for (std::size_t k = 0; k < switches.size(); ++k) {
        const auto path = out_dir / ("steer_reconstructed_z" + std::to_string(k) + ".csv");
        write_file_atomic(path, trajectories_csv(reconstructed_steer(config, recon, switches[k])));
        report(path);
      }
    } else if (*calibrate_cmd) {
      const auto branch = cal_mode == "principal" ? PhaseBranch::Principal : PhaseBranch::Unwrap;
      const auto result = calibrate(config, cal_photons.value_or(config.calibration_photons),
                                    cal_seeds.value_or(config.calibration_seeds), branch);
      std::cout << format_report(result) << "\n";
    } else if (*render_cmd) {
      const std::string text = read_file(render_in);
      const std::string svg = text.rfind(kTrajectoryHeader, 0) == 0 ? render_trajectories_svg(read_trajectory_csv(text))
                                                                    : render_map_svg(read_map_csv(text));
      write_file_atomic(render_out, svg);
      report(render_out);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return 1;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: io: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
