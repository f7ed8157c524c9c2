#include "bohmsteer/weakmeas.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "bohmsteer/error.hpp"

namespace bohmsteer {

CouplingModel::CouplingModel(double zeta_value, double phi0_value) : zeta(zeta_value), phi0(phi0_value) {
  require(zeta_value > 0.0 && std::isfinite(zeta_value), "coupling strength zeta must be positive");
  require(std::isfinite(phi0_value), "phi0 must be finite");
}

double phase_of_momentum(double k_ratio, const CouplingModel& model) { return model.zeta * k_ratio + model.phi0; }

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> parts) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t state = mix(base);
  for (std::uint64_t part : parts) state = mix(state ^ mix(part));
  return state;
}

double SensorGeometry::position(int pixel, double midline) const {
  return (midline - static_cast<double>(pixel)) * pixel_pitch_mm * 1e-3 / beta;
}

ImagePair synthesize_images(const VelocityField& field, Plane plane, const CouplingModel& model,
                            const SensorGeometry& geometry, double photon_budget, std::uint64_t seed,
                            SynthesisOptions options) {
  if (!(photon_budget > 0.0)) fail(ErrorKind::InvalidArgument, "photon budget must be positive");
  require(geometry.width >= kWindowWidth, "sensor section narrower than the readout window");
  require(geometry.beta > 0.0 && geometry.pixel_pitch_mm > 0.0, "pixel pitch and magnification must be positive");

  const double peak = field.peak_envelope(plane);
  ImagePair pair;
  auto render = [&](double midline, double sign, SensorImage& image) {
    image.counts.resize(static_cast<std::size_t>(geometry.width));
    image.plane_z = plane.z;
    image.pixel_pitch_mm = geometry.pixel_pitch_mm;
    image.beta = geometry.beta;
    image.seed = seed;
    for (int p = 0; p < geometry.width; ++p) {
      const double x = geometry.position(p, midline);
      const double rho = field.density(x, plane);
      double phi = 0.0;
      if (options.coupling) {
        double k_ratio = 0.0;
        try {
          k_ratio = field.k_ratio(x, plane);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::Node) throw;
        }
        phi = phase_of_momentum(k_ratio, model);
        if (sign > 0.0 && std::abs(phi) >= 0.5 * kPi && rho > 1e-6 * peak) ++pair.phase_warnings;
      }
      image.counts[static_cast<std::size_t>(p)] = rho * (1.0 + sign * std::sin(phi));
    }
  };
  render(geometry.right_midline, +1.0, pair.right);
  render(geometry.left_midline, -1.0, pair.left);

  const double total = std::accumulate(pair.right.counts.begin(), pair.right.counts.end(), 0.0) +
                       std::accumulate(pair.left.counts.begin(), pair.left.counts.end(), 0.0);
  if (!(total > 0.0)) fail(ErrorKind::InvalidArgument, "state has no density on the sensor");
  const double scale = photon_budget / total;

  std::mt19937_64 rng(seed);
  for (SensorImage* image : {&pair.right, &pair.left}) {
    for (double& count : image->counts) {
      const double mean = count * scale;
      if (!options.sample) {
        count = mean;
      } else if (mean > 0.0) {
        std::poisson_distribution<long long> draw(mean);
        count = static_cast<double>(draw(rng));
      } else {
        count = 0.0;
      }
    }
  }
  return pair;
}

GaussianFit fit_gaussian(std::span<const double> counts, double first_pixel) {
  const auto n = static_cast<Eigen::Index>(counts.size());
  if (n < 5) fail(ErrorKind::FitFailure, "too few pixels for a Gaussian fit");
  const Eigen::Map<const Eigen::VectorXd> data(counts.data(), n);
  Eigen::VectorXd coord(n);
  for (Eigen::Index i = 0; i < n; ++i) coord[i] = first_pixel + static_cast<double>(i);

  const double data_norm = data.norm();
  if (!(data_norm > 0.0)) fail(ErrorKind::FitFailure, "empty image");

  // Moment-based start: baseline at the minimum, centroid and rms width above it.
  const double base = data.minCoeff();
  const Eigen::VectorXd lifted = data.array() - base;
  const double mass = lifted.sum();
  if (!(mass > 0.0)) fail(ErrorKind::FitFailure, "flat image");
  const double mean = lifted.dot(coord) / mass;
  const double var = lifted.dot((coord.array() - mean).square().matrix()) / mass;

  Eigen::Vector4d params(data.maxCoeff() - base, mean, std::sqrt(std::max(2.0 * var, 1.0)), base);

  auto residuals = [&](const Eigen::Vector4d& p, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    r.resize(n);
    if (jac) jac->resize(n, 4);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double u = (coord[i] - p[1]) / p[2];
      const double g = std::exp(-u * u);
      r[i] = p[0] * g + p[3] - data[i];
      if (jac) {
        (*jac)(i, 0) = g;
        (*jac)(i, 1) = p[0] * g * 2.0 * u / p[2];
        (*jac)(i, 2) = p[0] * g * 2.0 * u * u / p[2];
        (*jac)(i, 3) = 1.0;
      }
    }
  };

  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  residuals(params, r, &jac);
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  for (int iter = 0; iter < 500; ++iter) {
    const Eigen::Matrix4d jtj = jac.transpose() * jac;
    const Eigen::Vector4d grad = jac.transpose() * r;
    Eigen::Matrix4d damped = jtj;
    damped.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-300);
    const Eigen::Vector4d delta = damped.ldlt().solve(-grad);
    Eigen::Vector4d trial = params + delta;
    trial[2] = std::abs(trial[2]);
    Eigen::VectorXd trial_r;
    residuals(trial, trial_r, nullptr);
    const double trial_cost = trial_r.squaredNorm();
    if (std::isfinite(trial_cost) && trial_cost <= cost) {
      const double improvement = cost - trial_cost;
      params = trial;
      r = trial_r;
      cost = trial_cost;
      residuals(params, r, &jac);
      lambda = std::max(lambda * 0.3, 1e-12);
      if (improvement <= 1e-15 * cost && delta.norm() <= 1e-12 * (1.0 + params.norm())) break;
      if (improvement == 0.0) break;
    } else {
      lambda *= 10.0;
      if (lambda > 1e12) break;
    }
  }

  const double residual_norm = std::sqrt(cost);
  if (!std::isfinite(residual_norm) || residual_norm > 0.5 * data_norm) {
    std::ostringstream msg;
    msg << "Gaussian fit residual " << residual_norm << " exceeds half the signal norm " << data_norm;
    fail(ErrorKind::FitFailure, msg.str());
  }
  return {params[0], params[1], params[2], params[3], residual_norm};
}

double fit_gaussian_center(std::span<const double> counts, double first_pixel) {
  return fit_gaussian(counts, first_pixel).center;
}

std::vector<double> cut_window(std::span<const double> sensor, double center) {
  const double base = std::floor(center);
  if (!std::isfinite(center) || base - kWindowHalfWidth < 0.0 ||
      base + kWindowHalfWidth >= static_cast<double>(sensor.size())) {
    std::ostringstream msg;
    msg << "readout window around pixel " << center << " extends beyond the sensor";
    fail(ErrorKind::InvalidArgument, msg.str());
  }
  const auto floor_pixel = static_cast<std::ptrdiff_t>(base);
  std::vector<double> window;
  window.reserve(kWindowWidth);
  for (int i = -kWindowHalfWidth; i <= kWindowHalfWidth; ++i) window.push_back(sensor[static_cast<std::size_t>(floor_pixel - i)]);
  return window;
}

void DetectorImage::validate() const {
  if (counts.size() != static_cast<std::size_t>(kWindowWidth)) fail(ErrorKind::Validation, "detector image must hold 321 pixels");
  for (auto c : counts) {
    if (c < 0) fail(ErrorKind::Validation, "detector counts must be non-negative");
  }
  if (!(pixel_pitch_mm > 0.0)) fail(ErrorKind::Validation, "pixel pitch must be positive");
  if (!(beta > 0.0)) fail(ErrorKind::Validation, "magnification must be positive");
  if (!std::isfinite(center_offset) || !std::isfinite(plane_z)) fail(ErrorKind::Validation, "non-finite image header");
}

std::vector<double> DetectorImage::as_doubles() const { return {counts.begin(), counts.end()}; }

DetectorImage make_detector_image(const SensorImage& sensor, double center) {
  DetectorImage image;
  for (double c : cut_window(sensor.counts, center)) image.counts.push_back(std::llround(c));
  image.plane_z = sensor.plane_z;
  image.pixel_pitch_mm = sensor.pixel_pitch_mm;
  image.beta = sensor.beta;
  image.center_offset = center;
  image.seed = sensor.seed;
  return image;
}

NormalizedPair normalize_pair(std::span<const double> right_window, std::span<const double> left_window) {
  require(right_window.size() == left_window.size(), "right and left windows differ in size");
  const double sum_right = std::accumulate(right_window.begin(), right_window.end(), 0.0);
  const double sum_left = std::accumulate(left_window.begin(), left_window.end(), 0.0);
  require(sum_right > 0.0 && sum_left > 0.0, "cannot normalise an empty window");
  NormalizedPair out;
  for (std::size_t i = 0; i < right_window.size(); ++i) {
    out.right.push_back(right_window[i] / sum_right);
    out.left.push_back(left_window[i] / sum_left);
    out.total.push_back(right_window[i] + left_window[i]);
  }
  return out;
}

NormalizedPair window_and_normalize(std::span<const double> right_sensor, std::span<const double> left_sensor,
                                    double right_center, double left_center) {
  return normalize_pair(cut_window(right_sensor, right_center), cut_window(left_sensor, left_center));
}

NormalizedPair window_and_normalize(const DetectorImage& right, const DetectorImage& left) {
  right.validate();
  left.validate();
  return normalize_pair(right.as_doubles(), left.as_doubles());
}

MomentumProfile extract_weak_momentum(const NormalizedPair& pair, const CouplingModel& model, double count_floor) {
  MomentumProfile out;
  const std::size_t n = pair.right.size();
  out.k_ratio.resize(n);
  out.clipped.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const double sum = pair.right[i] + pair.left[i];
    if (pair.total[i] < count_floor || !(sum > 0.0)) continue;
    double arg = (pair.right[i] - pair.left[i]) / sum;
    if (arg > 1.0 || arg < -1.0) {
      arg = std::clamp(arg, -1.0, 1.0);
      out.clipped[i] = true;
      ++out.clip_count;
    }
    out.k_ratio[i] = (std::asin(arg) - model.phi0) / model.zeta;
  }
  return out;
}

double pixel_to_position_mm(double center_offset, int pixel, double pixel_pitch_mm, double beta) {
  require(beta > 0.0, "magnification beta must be positive");
  return (center_offset - std::floor(center_offset) + static_cast<double>(pixel)) * pixel_pitch_mm / beta;
}

double pixel_to_position_mm(const DetectorImage& image, int pixel) {
  return pixel_to_position_mm(image.center_offset, pixel, image.pixel_pitch_mm, image.beta);
}

double interpolate_momentum(std::span<const double> positions, std::span<const std::optional<double>> values,
                            double query, double bandwidth) {
  require(positions.size() == values.size(), "positions and values differ in size");
  require(bandwidth > 0.0, "kernel bandwidth must be positive");
  const double reach = 5.0 * bandwidth;
  const auto lo = std::lower_bound(positions.begin(), positions.end(), query - reach);
  double weight_sum = 0.0;
  double value_sum = 0.0;
  for (auto it = lo; it != positions.end() && *it <= query + reach; ++it) {
    const auto& value = values[static_cast<std::size_t>(it - positions.begin())];
    if (!value) continue;
    const double u = (*it - query) / bandwidth;
    const double w = std::exp(-0.5 * u * u);
    weight_sum += w;
    value_sum += w * *value;
  }
  if (!(weight_sum > 0.0)) {
    std::ostringstream msg;
    msg << "no momentum samples near x=" << query;
    fail(ErrorKind::NoNeighbor, msg.str());
  }
  return value_sum / weight_sum;
}

std::vector<double> tilt_sweep_angles(double first_deg, double last_deg, double step_deg) {
  require(step_deg > 0.0 && last_deg >= first_deg, "invalid tilt sweep range");
  const auto count = static_cast<std::size_t>(std::llround((last_deg - first_deg) / step_deg)) + 1;
  std::vector<double> angles(count);
  for (std::size_t i = 0; i < count; ++i) angles[i] = (first_deg + step_deg * static_cast<double>(i)) * kPi / 180.0;
  return angles;
}

std::vector<double> principal_branch_angles(std::span<const double> angles, const CouplingModel& model) {
  std::vector<double> kept;
  for (double a : angles) {
    if (std::abs(phase_of_momentum(a, model)) < 0.5 * kPi) kept.push_back(a);
  }
  return kept;
}

CalibrationSweep synthesize_sweep(const CouplingModel& model, std::span<const double> angles,
                                  double photons_per_point, std::uint64_t seed) {
  CalibrationSweep sweep;
  std::mt19937_64 rng(seed);
  for (double angle : angles) {
    const double s = std::sin(phase_of_momentum(angle, model));
    double right = 0.5 * (1.0 + s);
    double left = 0.5 * (1.0 - s);
    if (photons_per_point > 0.0) {
      auto draw = [&](double mean) {
        if (!(mean > 0.0)) return 0.0;
        std::poisson_distribution<long long> dist(mean);
        return static_cast<double>(dist(rng));
      };
      right = draw(photons_per_point * right);
      left = draw(photons_per_point * left);
    }
    sweep.tilt_angles.push_back(angle);
    sweep.intensity_right.push_back(right);
    sweep.intensity_left.push_back(left);
  }
  return sweep;
}

namespace {

// Candidate phases sharing asin value psi are psi + 2 pi n and pi - psi + 2 pi n.
double nearest_branch(double psi, double target) {
  double best = psi;
  for (double base : {psi, kPi - psi}) {
    const double candidate = base + 2.0 * kPi * std::round((target - base) / (2.0 * kPi));
    if (std::abs(candidate - target) < std::abs(best - target)) best = candidate;
  }
  return best;
}

}  // namespace

Calibration calibrate_zeta(const CalibrationSweep& sweep, PhaseBranch branch) {
  const auto& angles = sweep.tilt_angles;
  const std::size_t n = angles.size();
  require(sweep.intensity_right.size() == n && sweep.intensity_left.size() == n, "sweep columns differ in length");
  if (n == 0) fail(ErrorKind::InvalidArgument, "empty calibration sweep");
  const auto [min_it, max_it] = std::minmax_element(angles.begin(), angles.end());
  if (!(*max_it > *min_it)) fail(ErrorKind::FitDegenerate, "calibration angles have zero spread");
  if (n < 3) fail(ErrorKind::InvalidArgument, "calibration needs at least 3 sweep points");
  for (std::size_t i = 1; i < n; ++i) {
    if (!(angles[i] > angles[i - 1])) fail(ErrorKind::InvalidArgument, "calibration angles must increase strictly");
  }

  std::vector<double> principal(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double total = sweep.intensity_right[i] + sweep.intensity_left[i];
    if (!(total > 0.0)) fail(ErrorKind::InvalidArgument, "calibration point with zero intensity");
    principal[i] = std::asin(std::clamp((sweep.intensity_right[i] - sweep.intensity_left[i]) / total, -1.0, 1.0));
  }

  std::vector<double> phase = principal;
  if (branch == PhaseBranch::Unwrap) {
    const auto anchor = static_cast<std::size_t>(
        std::min_element(angles.begin(), angles.end(), [](double a, double b) { return std::abs(a) < std::abs(b); }) -
        angles.begin());
    // Walk outward from the anchor, predicting each phase by linear extrapolation.
    for (std::size_t i = anchor + 1; i < n; ++i) {
      double target = phase[i - 1];
      if (i >= anchor + 2) {
        target += (phase[i - 1] - phase[i - 2]) * (angles[i] - angles[i - 1]) / (angles[i - 1] - angles[i - 2]);
      }
      phase[i] = nearest_branch(principal[i], target);
    }
    for (std::size_t i = anchor; i-- > 0;) {
      double target = phase[i + 1];
      if (i + 2 <= anchor) {
        target += (phase[i + 1] - phase[i + 2]) * (angles[i] - angles[i + 1]) / (angles[i + 1] - angles[i + 2]);
      }
      phase[i] = nearest_branch(principal[i], target);
    }
  }

  // Ordinary least squares phase = zeta * angle + phi0.
  const double count = static_cast<double>(n);
  const double mean_x = std::accumulate(angles.begin(), angles.end(), 0.0) / count;
  const double mean_y = std::accumulate(phase.begin(), phase.end(), 0.0) / count;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (angles[i] - mean_x) * (angles[i] - mean_x);
    sxy += (angles[i] - mean_x) * (phase[i] - mean_y);
  }
  const double slope = sxy / sxx;
  const double intercept = mean_y - slope * mean_x;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = phase[i] - (slope * angles[i] + intercept);
    ssr += r * r;
  }
  const double sigma2 = n > 2 ? ssr / (count - 2.0) : 0.0;
  if (!(slope > 0.0)) fail(ErrorKind::FitDegenerate, "calibration fit gives a non-positive coupling strength");
  return {CouplingModel(slope, intercept), std::sqrt(sigma2 / sxx),
          std::sqrt(sigma2 * (1.0 / count + mean_x * mean_x / sxx)), std::move(phase)};
}

AcquiredPlane acquire_plane(const SteeringModel& model, const VelocityField& target, Plane plane,
                            const AcquisitionSettings& settings, std::uint64_t seed) {
  const SynthesisOptions alignment{settings.alignment_coupling, true};
  const ProjectionBasis horizontal(0.0);
  const auto h_field = model.projected(horizontal, Outcome::Theta).field;
  const auto v_field = model.projected(horizontal, Outcome::ThetaBar).field;

  const auto h_images = synthesize_images(h_field, plane, settings.coupling, settings.geometry, settings.photon_budget,
                                          derive_seed(seed, {1}), alignment);
  const auto v_images = synthesize_images(v_field, plane, settings.coupling, settings.geometry, settings.photon_budget,
                                          derive_seed(seed, {2}), alignment);
  const double x1 = fit_gaussian_center(h_images.right.counts);
  const double x3 = fit_gaussian_center(h_images.left.counts);
  const double x2 = fit_gaussian_center(v_images.right.counts);
  const double x4 = fit_gaussian_center(v_images.left.counts);
  const double right_center = midpoint_center(x1, x2);
  const double left_center = midpoint_center(x3, x4);

  const auto images = synthesize_images(target, plane, settings.coupling, settings.geometry, settings.photon_budget,
                                        derive_seed(seed, {3}));
  return {make_detector_image(images.right, right_center), make_detector_image(images.left, left_center),
          images.phase_warnings};
}

PlaneMomentum reconstruct_plane(const DetectorImage& right, const DetectorImage& left, const CouplingModel& model,
                                double count_floor) {
  require(right.plane_z == left.plane_z, "right and left images come from different planes");
  const auto profile = extract_weak_momentum(window_and_normalize(right, left), model, count_floor);
  PlaneMomentum out;
  out.plane_z = right.plane_z;
  out.k_ratio = profile.k_ratio;
  out.clip_count = profile.clip_count;
  for (int i = -kWindowHalfWidth; i <= kWindowHalfWidth; ++i) out.positions.push_back(pixel_to_position_mm(right, i) * 1e-3);
  return out;
}

ReconstructedField::ReconstructedField(std::vector<PlaneMomentum> planes, double bandwidth, double light_speed)
    : bandwidth_(bandwidth), light_speed_(light_speed) {
  require(!planes.empty(), "reconstructed field needs at least one plane");
  if (!(bandwidth_ > 0.0)) {
    const auto& first = planes.front().positions;
    require(first.size() >= 2, "reconstructed plane needs at least two pixels");
    bandwidth_ = first[1] - first[0];
  }
  for (auto& p : planes) {
    const double z = p.plane_z;
    planes_.insert_or_assign(z, std::move(p));
  }
}

const PlaneMomentum& ReconstructedField::plane(double z) const {
  auto it = planes_.lower_bound(z - 1e-9);
  if (it == planes_.end() || std::abs(it->first - z) > 1e-9) {
    std::ostringstream msg;
    msg << "no reconstructed data at plane z=" << z;
    fail(ErrorKind::OffGrid, msg.str());
  }
  return it->second;
}

double ReconstructedField::k_ratio(double x, Plane plane_z) const {
  const auto& p = plane(plane_z.z);
  return interpolate_momentum(p.positions, p.k_ratio, x, bandwidth_);
}

}  // namespace bohmsteer
