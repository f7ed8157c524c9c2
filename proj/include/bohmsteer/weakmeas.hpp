#pragma once

#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "bohmsteer/entangled_state.hpp"

namespace bohmsteer {

inline constexpr double kPixelPitchMm = 0.013;
inline constexpr int kWindowHalfWidth = 160;
inline constexpr int kWindowWidth = 2 * kWindowHalfWidth + 1;

/// Momentum-to-phase coupling of the birefringent crystal:
/// phi = zeta * <k_x>_w / k + phi0.
struct CouplingModel {
  CouplingModel(double zeta, double phi0 = 0.0);

  double zeta;
  double phi0;
};

double phase_of_momentum(double k_ratio, const CouplingModel& model);

/// Mixes a base seed with work-item coordinates (splitmix64), so every plane
/// and image owns an independent stream.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> parts);

/// Two camera sections (right and left circular polarization), each `width`
/// pixels. The imaging optics invert the image: pixel p of a section sees the
/// object-plane position x = (midline - p) * pitch / beta.
///
/// Windows are cut at floor(R_c) and floor(L_c) and then paired pixel by
/// pixel, so the two midlines should share their fractional part and keep it
/// away from an integer; otherwise the pairing slips by one pixel.
struct SensorGeometry {
  int width = 512;
  double right_midline = 255.37;
  double left_midline = 258.37;
  double pixel_pitch_mm = kPixelPitchMm;
  double beta = 1.0;

  /// Object-plane position in metres of pixel p in a section with this midline.
  double position(int pixel, double midline) const;
};

/// Full-section image; counts are integers when sampled, means otherwise.
struct SensorImage {
  std::vector<double> counts;
  double plane_z = 0.0;
  double pixel_pitch_mm = kPixelPitchMm;
  double beta = 1.0;
  std::uint64_t seed = 0;
};

struct ImagePair {
  SensorImage right;
  SensorImage left;
  /// Pixels with appreciable density whose phase left (-pi/2, pi/2).
  std::size_t phase_warnings = 0;
};

struct SynthesisOptions {
  /// false renders the images with the coupling switched off (phi = 0).
  bool coupling = true;
  /// false returns the Poisson means instead of a draw.
  bool sample = true;
};

/**
 * Forward model of the two camera sections at one plane. Expected counts are
 * rho(x)(1 + sin phi(x)) and rho(x)(1 - sin phi(x)) with phi = zeta v/c + phi0,
 * scaled so both sections together expect `photon_budget` photons; each pixel
 * is then an independent Poisson draw seeded by `seed`.
 */
ImagePair synthesize_images(const VelocityField& field, Plane plane, const CouplingModel& model,
                            const SensorGeometry& geometry, double photon_budget, std::uint64_t seed,
                            SynthesisOptions options = {});

struct GaussianFit {
  double amplitude;
  double center;
  double width;
  double offset;
  double residual_norm;
};

/// Least-squares fit of A exp(-(i - c)^2 / s^2) + b; pixel i of `counts` sits
/// at coordinate first_pixel + i. Throws FitFailure when the residual norm
/// exceeds half the data norm.
GaussianFit fit_gaussian(std::span<const double> counts, double first_pixel = 0.0);
double fit_gaussian_center(std::span<const double> counts, double first_pixel = 0.0);

/// R_c = (x1 + x2) / 2 (and likewise L_c).
inline double midpoint_center(double a, double b) { return 0.5 * (a + b); }

/// Sensor pixels floor(center) - 160 .. floor(center) + 160 in object order:
/// element i + 160 holds sensor pixel floor(center) - i. Throws when the
/// window leaves the sensor.
std::vector<double> cut_window(std::span<const double> sensor, double center);

/// Windowed image of one section in object order: window pixel i (-160..160),
/// stored at counts[i + 160], is sensor pixel floor(center_offset) - i.
struct DetectorImage {
  std::vector<std::int64_t> counts;
  double plane_z = 0.0;
  double pixel_pitch_mm = kPixelPitchMm;
  double beta = 1.0;
  double center_offset = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
  std::vector<double> as_doubles() const;
};

DetectorImage make_detector_image(const SensorImage& sensor, double center);

struct NormalizedPair {
  std::vector<double> right;  // N_R / S_R
  std::vector<double> left;   // N_L / S_L
  std::vector<double> total;  // N_R + N_L, raw counts
};

NormalizedPair normalize_pair(std::span<const double> right_window, std::span<const double> left_window);
NormalizedPair window_and_normalize(std::span<const double> right_sensor, std::span<const double> left_sensor,
                                    double right_center, double left_center);
NormalizedPair window_and_normalize(const DetectorImage& right, const DetectorImage& left);

struct MomentumProfile {
  std::vector<std::optional<double>> k_ratio;  // <k_x>_w / k per window pixel
  std::vector<bool> clipped;
  std::size_t clip_count = 0;
};

/// Per pixel (1/zeta) asin((n_R - n_L)/(n_R + n_L)) - phi0/zeta. Pixels whose
/// raw count sum is below `count_floor` are missing; out-of-range asin
/// arguments are clipped to +-1 and flagged.
MomentumProfile extract_weak_momentum(const NormalizedPair& pair, const CouplingModel& model,
                                      double count_floor = 10.0);

/// x in mm of window pixel i: (R_c - floor(R_c) + i) * pitch / beta. Exact for
/// the inverted image, since sensor pixel floor(R_c) - i lies i + R_c - floor(R_c)
/// pixels from R_c on the object side.
double pixel_to_position_mm(double center_offset, int pixel, double pixel_pitch_mm, double beta);
double pixel_to_position_mm(const DetectorImage& image, int pixel);

/// Nadaraya-Watson estimate with a Gaussian kernel of the given bandwidth.
/// Only non-missing samples within five bandwidths contribute; throws
/// NoNeighbor when there are none.
double interpolate_momentum(std::span<const double> positions, std::span<const std::optional<double>> values,
                            double query, double bandwidth);

// ---------------------------------------------------------------------------
// Coupling-strength calibration

struct CalibrationSweep {
  std::vector<double> tilt_angles;  // rad, strictly increasing
  std::vector<double> intensity_right;
  std::vector<double> intensity_left;
};

/// Tilt angles in radians from first_deg to last_deg in step_deg increments.
std::vector<double> tilt_sweep_angles(double first_deg = -0.48, double last_deg = 0.60, double step_deg = 0.03);

/// Angles whose phase zeta * theta + phi0 stays inside (-pi/2, pi/2).
std::vector<double> principal_branch_angles(std::span<const double> angles, const CouplingModel& model);

/// Power-meter readings of the two circular ports. photons_per_point <= 0
/// gives the noiseless intensities; otherwise each port is a Poisson count.
CalibrationSweep synthesize_sweep(const CouplingModel& model, std::span<const double> angles,
                                  double photons_per_point, std::uint64_t seed);

enum class PhaseBranch {
  Unwrap,     // continue the phase across asin folds from the point nearest normal incidence
  Principal,  // use principal asin values; the sweep must stay inside (-pi/2, pi/2)
};

struct Calibration {
  CouplingModel model;
  double zeta_stderr;
  double phi0_stderr;
  std::vector<double> phases;
};

Calibration calibrate_zeta(const CalibrationSweep& sweep, PhaseBranch branch = PhaseBranch::Unwrap);

// ---------------------------------------------------------------------------
// Acquisition and reconstruction of one imaging plane

struct AcquisitionSettings {
  CouplingModel coupling{336.0};
  SensorGeometry geometry;
  double photon_budget = 1e7;
  /// Coupling state while recording the H/V alignment images. With the
  /// coupling on, each single-packet image is displaced by the same amount
  /// the measurement encodes and the centering cancels the signal.
  bool alignment_coupling = false;
};

struct AcquiredPlane {
  DetectorImage right;
  DetectorImage left;
  std::size_t phase_warnings = 0;
};

/**
 * Records `target` at one plane. Alignment images with the remote photon
 * projected on H and on V give the four packet centers x1..x4; R_c and L_c
 * are their midpoints and each section is cut to a 321-pixel window there.
 */
AcquiredPlane acquire_plane(const SteeringModel& model, const VelocityField& target, Plane plane,
                            const AcquisitionSettings& settings, std::uint64_t seed);

struct PlaneMomentum {
  double plane_z = 0.0;
  std::vector<double> positions;  // m, ascending
  std::vector<std::optional<double>> k_ratio;
  std::size_t clip_count = 0;
};

PlaneMomentum reconstruct_plane(const DetectorImage& right, const DetectorImage& left, const CouplingModel& model,
                                double count_floor = 10.0);

/// Velocity field interpolated from reconstructed planes.
class ReconstructedField {
 public:
  /// bandwidth <= 0 selects one pixel pitch in the object plane.
  explicit ReconstructedField(std::vector<PlaneMomentum> planes, double bandwidth = 0.0,
                              double light_speed = kSpeedOfLight);

  double k_ratio(double x, Plane plane) const;
  double velocity(double x, Plane plane) const { return light_speed_ * k_ratio(x, plane); }
  const PlaneMomentum& plane(double z) const;
  double bandwidth() const { return bandwidth_; }

 private:
  std::map<double, PlaneMomentum> planes_;
  double bandwidth_;
  double light_speed_;
};

}  // namespace bohmsteer
