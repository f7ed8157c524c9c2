#include "bohmsteer/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "bohmsteer/error.hpp"

namespace bohmsteer {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

struct ParseFailure {
  std::string message;
};

double to_double(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) throw ParseFailure{"empty value"};
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(t, &used);
  } catch (const std::exception&) {
    throw ParseFailure{"not a number: '" + t + "'"};
  }
  if (used != t.size()) throw ParseFailure{"not a number: '" + t + "'"};
  return value;
}

std::uint64_t to_unsigned(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty() || t.front() == '-') throw ParseFailure{"not a non-negative integer: '" + t + "'"};
  std::size_t used = 0;
  unsigned long long value = 0;
  try {
    value = std::stoull(t, &used);
  } catch (const std::exception&) {
    throw ParseFailure{"not a non-negative integer: '" + t + "'"};
  }
  if (used != t.size()) throw ParseFailure{"not a non-negative integer: '" + t + "'"};
  return value;
}

std::vector<double> to_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) values.push_back(to_double(item));
  if (values.empty()) throw ParseFailure{"empty list"};
  return values;
}

bool to_bool(const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1") return true;
  if (t == "false" || t == "0") return false;
  throw ParseFailure{"not a boolean: '" + t + "'"};
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::unordered_map<std::string, Setter>& setters() {
  static const std::unordered_map<std::string, Setter> table = [] {
    std::unordered_map<std::string, Setter> t;
    auto num = [&t](const char* key, double ExperimentConfig::*member) {
      t[key] = [member](ExperimentConfig& c, const std::string& v) { c.*member = to_double(v); };
    };
    auto count = [&t](const char* key, std::size_t ExperimentConfig::*member) {
      t[key] = [member](ExperimentConfig& c, const std::string& v) {
        c.*member = static_cast<std::size_t>(to_unsigned(v));
      };
    };
    num("wavelength", &ExperimentConfig::wavelength);
    num("packet_waist", &ExperimentConfig::packet_waist);
    num("waist_z", &ExperimentConfig::waist_z);
    num("slit_separation", &ExperimentConfig::slit_separation);
    num("d", &ExperimentConfig::slit_separation);
    num("zeta", &ExperimentConfig::zeta);
    num("phi0", &ExperimentConfig::phi0);
    num("beta", &ExperimentConfig::beta);
    num("photon_budget", &ExperimentConfig::photon_budget);
    num("relative_phase", &ExperimentConfig::relative_phase);
    num("relative_density_floor", &ExperimentConfig::relative_density_floor);
    num("count_floor", &ExperimentConfig::count_floor);
    num("kernel_bandwidth", &ExperimentConfig::kernel_bandwidth);
    num("map_half_width", &ExperimentConfig::map_half_width);
    num("calibration_photons", &ExperimentConfig::calibration_photons);
    count("plane_count", &ExperimentConfig::plane_count);
    count("starts_per_packet", &ExperimentConfig::starts_per_packet);
    count("map_points", &ExperimentConfig::map_points);
    count("calibration_seeds", &ExperimentConfig::calibration_seeds);
    t["plane_range"] = [](ExperimentConfig& c, const std::string& v) {
      const auto range = to_list(v);
      if (range.size() != 2) throw ParseFailure{"plane_range needs two values"};
      c.plane_first = range[0];
      c.plane_last = range[1];
    };
    t["theta_list"] = [](ExperimentConfig& c, const std::string& v) { c.theta_list = to_list(v); };
    t["z_switch_list"] = [](ExperimentConfig& c, const std::string& v) { c.z_switch_list = to_list(v); };
    t["seed"] = [](ExperimentConfig& c, const std::string& v) { c.seed = to_unsigned(v); };
    t["seeds"] = t["seed"];
    t["alignment_coupling"] = [](ExperimentConfig& c, const std::string& v) { c.alignment_coupling = to_bool(v); };
    return t;
  }();
  return table;
}

void check(bool ok, const std::string& invariant) {
  if (!ok) fail(ErrorKind::Validation, invariant);
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

void ExperimentConfig::validate() const {
  check(positive(wavelength), "wavelength must be positive");
  check(positive(packet_waist), "packet_waist must be positive");
  check(std::isfinite(waist_z) && waist_z < plane_first, "waist_z must lie before the first plane");
  check(positive(slit_separation), "slit_separation must be positive");
  check(positive(plane_first) && positive(plane_last), "plane_range must be positive");
  check(plane_last > plane_first, "plane_range must be increasing");
  check(plane_count >= 2, "plane_count must be at least 2");
  check(positive(zeta), "zeta must be positive");
  check(std::isfinite(phi0), "phi0 must be finite");
  check(positive(beta), "beta must be positive");
  check(positive(photon_budget), "photon_budget must be positive");
  for (double t : theta_list) check(std::isfinite(t) && t >= 0.0 && t < 180.0, "theta must lie in [0, 180) degrees");
  for (double z : z_switch_list)
    check(std::isfinite(z) && z >= plane_first && z <= plane_last, "z_switch must lie inside plane_range");
  check(starts_per_packet >= 2, "starts_per_packet must be at least 2");
  check(std::isfinite(relative_phase), "relative_phase must be finite");
  check(relative_density_floor >= 0.0 && relative_density_floor < 1.0, "relative_density_floor must lie in [0, 1)");
  check(count_floor >= 0.0, "count_floor must be non-negative");
  check(std::isfinite(kernel_bandwidth) && kernel_bandwidth >= 0.0, "kernel_bandwidth must be non-negative");
  check(positive(map_half_width), "map_half_width must be positive");
  check(map_points >= 2, "map_points must be at least 2");
  check(calibration_photons >= 0.0, "calibration_photons must be non-negative");
  check(calibration_seeds >= 1, "calibration_seeds must be at least 1");
}

FieldParams ExperimentConfig::field_params() const {
  FieldParams p;
  p.wavenumber = wavenumber();
  p.relative_density_floor = relative_density_floor;
  return p;
}

GaussianPacket ExperimentConfig::packet_template() const {
  return GaussianPacket(0.0, packet_waist, waist_z, wavenumber());
}

BranchState ExperimentConfig::split_state() const {
  return make_split_state(slit_separation, packet_template(), relative_phase);
}

SteeringModel ExperimentConfig::steering_model() const { return SteeringModel(split_state(), field_params()); }

PlaneGrid ExperimentConfig::plane_grid() const { return PlaneGrid::uniform(plane_first, plane_last, plane_count); }

AcquisitionSettings ExperimentConfig::acquisition() const {
  AcquisitionSettings s;
  s.coupling = coupling();
  s.geometry.beta = beta;
  s.photon_budget = photon_budget;
  s.alignment_coupling = alignment_coupling;
  return s;
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig config;
  std::stringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "line " + std::to_string(number) + ": ";
    if (eq == std::string::npos) fail(ErrorKind::Parse, where + "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const auto setter = setters().find(key);
    if (setter == setters().end()) fail(ErrorKind::Parse, where + "unknown key '" + key + "'");
    try {
      setter->second(config, line.substr(eq + 1));
    } catch (const ParseFailure& e) {
      fail(ErrorKind::Parse, where + key + ": " + e.message);
    }
  }
  config.validate();
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open config '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

}  // namespace bohmsteer
