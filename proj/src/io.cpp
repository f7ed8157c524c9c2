#include "bohmsteer/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>
#include <system_error>

#include "bohmsteer/error.hpp"

namespace bohmsteer {
namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::vector<std::string> data_lines(const std::string& text, const char* header) {
  std::stringstream in(text);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::Parse, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) fail(ErrorKind::Parse, "unexpected header '" + line + "'");
  std::vector<std::string> lines;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

std::optional<double> parse_optional(const std::string& text) {
  if (text.empty()) return std::nullopt;
  return parse_number(text);
}

std::string format_optional(const std::optional<double>& value) { return value ? format_number(*value) : ""; }

}  // namespace

std::string format_number(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.16e", value);
  return buffer;
}

double parse_number(const std::string& text) {
  errno = 0;
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || (errno == ERANGE && std::isinf(value)))
    fail(ErrorKind::Parse, "not a number: '" + text + "'");
  return value;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write '" + tmp.string() + "'");
    out << contents;
    out.flush();
    if (!out) fail(ErrorKind::Io, "write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    fail(ErrorKind::Io, "cannot rename onto '" + path.string() + "'");
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string outcome_name(Outcome outcome) { return outcome == Outcome::Theta ? "theta" : "theta_bar"; }

Outcome parse_outcome(const std::string& name) {
  if (name == "theta") return Outcome::Theta;
  if (name == "theta_bar") return Outcome::ThetaBar;
  fail(ErrorKind::Parse, "unknown outcome '" + name + "' (expected theta or theta_bar)");
}

std::vector<TrajectoryRow> to_rows(const Trajectory& trajectory, std::size_t id) {
  std::vector<TrajectoryRow> rows;
  rows.reserve(trajectory.points.size());
  std::optional<double> theta_deg;
  std::optional<Outcome> outcome;
  if (trajectory.label) {
    theta_deg = trajectory.label->theta * 180.0 / std::numbers::pi;
    outcome = trajectory.label->outcome;
  }
  for (const auto& p : trajectory.points) {
    const bool branched = trajectory.branch_z && p.z >= *trajectory.branch_z - 1e-9;
    rows.push_back({id, p.z, p.x, branched, theta_deg, outcome});
  }
  return rows;
}

std::string write_trajectory_csv(const std::vector<TrajectoryRow>& rows) {
  std::string out = std::string(kTrajectoryHeader) + "\n";
  for (const auto& r : rows) {
    out += std::to_string(r.trajectory_id) + "," + format_number(r.z) + "," + format_number(r.x) + "," +
           (r.branched ? "1" : "0") + "," + format_optional(r.theta_deg) + "," +
           (r.outcome ? outcome_name(*r.outcome) : "") + "\n";
  }
  return out;
}

std::vector<TrajectoryRow> read_trajectory_csv(const std::string& text) {
  std::vector<TrajectoryRow> rows;
  for (const auto& line : data_lines(text, kTrajectoryHeader)) {
    const auto f = split_fields(line);
    if (f.size() != 6) fail(ErrorKind::Parse, "trajectory row needs 6 fields: '" + line + "'");
    if (f[3] != "0" && f[3] != "1") fail(ErrorKind::Parse, "branch_flag must be 0 or 1: '" + line + "'");
    TrajectoryRow row{};
    row.trajectory_id = static_cast<std::size_t>(parse_number(f[0]));
    row.z = parse_number(f[1]);
    row.x = parse_number(f[2]);
    row.branched = f[3] == "1";
    row.theta_deg = parse_optional(f[4]);
    if (!f[5].empty()) row.outcome = parse_outcome(f[5]);
    rows.push_back(row);
  }
  return rows;
}

std::string write_map_csv(const std::vector<MapRow>& rows, const char* header) {
  std::string out = std::string(header) + "\n";
  for (const auto& r : rows) out += format_number(r.x) + "," + format_number(r.z) + "," + format_optional(r.value) + "\n";
  return out;
}

std::vector<MapRow> read_map_csv(const std::string& text) {
  std::stringstream in(text);
  std::string header;
  std::getline(in, header);
  if (!header.empty() && header.back() == '\r') header.pop_back();
  const char* expected = header == kVelocityHeader ? kVelocityHeader : kMapHeader;
  std::vector<MapRow> rows;
  for (const auto& line : data_lines(text, expected)) {
    const auto f = split_fields(line);
    if (f.size() != 3) fail(ErrorKind::Parse, "map row needs 3 fields: '" + line + "'");
    rows.push_back({parse_number(f[0]), parse_number(f[1]), parse_optional(f[2])});
  }
  return rows;
}

std::vector<MapRow> to_rows(const VelocityChangeMap& map) {
  std::vector<MapRow> rows;
  rows.reserve(map.dv_over_c.size());
  for (std::size_t iz = 0; iz < map.zs.size(); ++iz)
    for (std::size_t ix = 0; ix < map.xs.size(); ++ix) rows.push_back({map.xs[ix], map.zs[iz], map.at(ix, iz)});
  return rows;
}

std::string write_detector_image(const DetectorImage& image) {
  image.validate();
  std::string out;
  out += "plane_z = " + format_number(image.plane_z) + "\n";
  out += "pixel_pitch_mm = " + format_number(image.pixel_pitch_mm) + "\n";
  out += "beta = " + format_number(image.beta) + "\n";
  out += "center_offset = " + format_number(image.center_offset) + "\n";
  out += "seed = " + std::to_string(image.seed) + "\n";
  out += "counts\n";
  for (std::size_t i = 0; i < image.counts.size(); ++i) {
    out += std::to_string(image.counts[i]);
    out += (i + 1) % 16 == 0 || i + 1 == image.counts.size() ? '\n' : ' ';
  }
  return out;
}

DetectorImage read_detector_image(const std::string& text) {
  DetectorImage image;
  std::stringstream in(text);
  std::string line;
  bool have[5] = {};
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == "counts") break;
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorKind::Parse, "detector image: bad header line '" + line + "'");
    auto key = line.substr(0, eq);
    auto value = line.substr(eq + 1);
    key.erase(key.find_last_not_of(' ') + 1);
    value.erase(0, value.find_first_not_of(' '));
    if (key == "plane_z") image.plane_z = parse_number(value), have[0] = true;
    else if (key == "pixel_pitch_mm") image.pixel_pitch_mm = parse_number(value), have[1] = true;
    else if (key == "beta") image.beta = parse_number(value), have[2] = true;
    else if (key == "center_offset") image.center_offset = parse_number(value), have[3] = true;
    else if (key == "seed") {
      char* end = nullptr;
      image.seed = std::strtoull(value.c_str(), &end, 10);
      if (value.empty() || *end != '\0') fail(ErrorKind::Parse, "detector image: bad seed '" + value + "'");
      have[4] = true;
    } else {
      fail(ErrorKind::Parse, "detector image: unknown key '" + key + "'");
    }
  }
  for (bool h : have)
    if (!h) fail(ErrorKind::Parse, "detector image: incomplete header");
  std::string token;
  while (in >> token) {
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(token.c_str(), &end, 10);
    if (*end != '\0' || errno == ERANGE) fail(ErrorKind::Parse, "detector image: bad count '" + token + "'");
    image.counts.push_back(v);
  }
  image.validate();
  return image;
}

}  // namespace bohmsteer
