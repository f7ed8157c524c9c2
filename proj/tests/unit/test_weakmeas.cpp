#include <doctest.h>

#include <cmath>
#include <functional>
#include <numeric>
#include <random>

#include "bohmsteer/error.hpp"
#include "bohmsteer/weakmeas.hpp"

using namespace bohmsteer;

namespace {

const double k808 = wavenumber_from_wavelength(808e-9);
const GaussianPacket tmpl(0.0, 3e-4, 0.0, k808);
const CouplingModel zeta336(336.0);

SteeringModel default_model() { return SteeringModel(make_split_state(3e-3, tmpl), FieldParams{k808}); }

std::vector<double> gaussian_pixels(int first, int count, double amplitude, double center, double width, double offset) {
  std::vector<double> out;
  for (int i = 0; i < count; ++i) {
    const double u = (first + i - center) / width;
    out.push_back(amplitude * std::exp(-u * u) + offset);
  }
  return out;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InvalidArgument;
}

// Windows cut at the sensor midlines, where the object origin sits.
struct WindowedPlane {
  std::vector<double> positions;  // m
  MomentumProfile profile;
  NormalizedPair pair;
};

WindowedPlane window_at_midlines(const ImagePair& images, const SensorGeometry& g, const CouplingModel& model,
                                 double count_floor = 10.0) {
  WindowedPlane out;
  out.pair = window_and_normalize(images.right.counts, images.left.counts, g.right_midline, g.left_midline);
  out.profile = extract_weak_momentum(out.pair, model, count_floor);
  for (int i = -kWindowHalfWidth; i <= kWindowHalfWidth; ++i)
    out.positions.push_back(pixel_to_position_mm(g.right_midline, i, g.pixel_pitch_mm, g.beta) * 1e-3);
  return out;
}

}  // namespace

TEST_CASE("phase of momentum") {
  CHECK(phase_of_momentum(0.0, CouplingModel(336.0)) == 0.0);
  CHECK(phase_of_momentum(1e-3, CouplingModel(336.0)) == doctest::Approx(0.336).epsilon(1e-14));
  CHECK(phase_of_momentum(0.0, CouplingModel(336.0, 0.1)) == 0.1);
  CHECK_THROWS_AS(CouplingModel(0.0), Error);
  CHECK_THROWS_AS(CouplingModel(-3.0), Error);
}

TEST_CASE("derived seeds are deterministic and distinct") {
  CHECK(derive_seed(7, {1, 2}) == derive_seed(7, {1, 2}));
  CHECK(derive_seed(7, {1, 2}) != derive_seed(7, {2, 1}));
  CHECK(derive_seed(7, {1}) != derive_seed(8, {1}));
}

TEST_CASE("a field at rest gives equal sections") {
  // At its waist plane a single packet has zero velocity everywhere.
  const VelocityField still(BranchState({Branch{1.0, {{1.0, GaussianPacket(0.0, 3e-4, 2.0, k808)}}}}), FieldParams{k808});
  SensorGeometry g;
  g.left_midline = g.right_midline;
  const auto images = synthesize_images(still, Plane{2.0}, zeta336, g, 1e7, 1, {true, false});
  for (std::size_t i = 0; i < images.right.counts.size(); ++i)
    CHECK(images.right.counts[i] == doctest::Approx(images.left.counts[i]).epsilon(1e-14));
  const double total = std::accumulate(images.right.counts.begin(), images.right.counts.end(), 0.0) +
                       std::accumulate(images.left.counts.begin(), images.left.counts.end(), 0.0);
  CHECK(total == doctest::Approx(1e7).epsilon(1e-12));
}

TEST_CASE("synthesis is deterministic and rejects bad budgets") {
  const auto model = default_model();
  const auto a = synthesize_images(model.unprojected(), Plane{3.0}, zeta336, {}, 1e6, 42);
  const auto b = synthesize_images(model.unprojected(), Plane{3.0}, zeta336, {}, 1e6, 42);
  const auto c = synthesize_images(model.unprojected(), Plane{3.0}, zeta336, {}, 1e6, 43);
  CHECK(a.right.counts == b.right.counts);
  CHECK(a.left.counts == b.left.counts);
  CHECK(a.right.counts != c.right.counts);
  for (double n : a.right.counts) CHECK(n == std::floor(n));
  CHECK(kind_of([&] { synthesize_images(model.unprojected(), Plane{3.0}, zeta336, {}, 0.0, 1); }) ==
        ErrorKind::InvalidArgument);
}

TEST_CASE("total counts are Poisson with the budget as mean") {
  const auto model = default_model();
  const double budget = 1e5;
  double sum = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto img = synthesize_images(model.unprojected(), Plane{2.5}, zeta336, {}, budget, derive_seed(5, {s}));
    sum += std::accumulate(img.right.counts.begin(), img.right.counts.end(), 0.0) +
           std::accumulate(img.left.counts.begin(), img.left.counts.end(), 0.0);
  }
  CHECK(std::abs(sum / 100.0 - budget) < 3.0 * std::sqrt(budget / 100.0));
}

TEST_CASE("gaussian center fits") {
  SUBCASE("noiseless") {
    const auto data = gaussian_pixels(0, 40, 500.0, 12.3, 4.0, 3.0);
    CHECK(fit_gaussian_center(data) == doctest::Approx(12.3).epsilon(0.01 / 12.3));
    const auto fit = fit_gaussian(data);
    CHECK(fit.amplitude == doctest::Approx(500.0));
    CHECK(fit.width == doctest::Approx(4.0));
    CHECK(fit.offset == doctest::Approx(3.0));
  }
  SUBCASE("symmetric about pixel zero") {
    const auto data = gaussian_pixels(-30, 61, 80.0, 0.0, 7.0, 1.0);
    CHECK(std::abs(fit_gaussian_center(data, -30.0)) < 1e-6);
  }
  SUBCASE("poisson noise with a million counts") {
    const double truth = 250.37;
    auto mean = gaussian_pixels(0, 512, 1.0, truth, 60.0, 0.0);
    const double scale = 1e6 / std::accumulate(mean.begin(), mean.end(), 0.0);
    for (std::uint64_t s = 0; s < 10; ++s) {
      std::mt19937_64 rng(derive_seed(3, {s}));
      std::vector<double> noisy;
      for (double m : mean) noisy.push_back(static_cast<double>(std::poisson_distribution<long long>(m * scale)(rng)));
      CHECK(std::abs(fit_gaussian_center(noisy) - truth) < 0.1);
    }
  }
  SUBCASE("failures") {
    CHECK(kind_of([] { fit_gaussian(std::vector<double>(30, 0.0)); }) == ErrorKind::FitFailure);
    CHECK(kind_of([] { fit_gaussian(std::vector<double>(30, 4.0)); }) == ErrorKind::FitFailure);
    CHECK(kind_of([] { fit_gaussian(std::vector<double>{1, 2, 1}); }) == ErrorKind::FitFailure);
    std::vector<double> comb;
    for (int i = 0; i < 64; ++i) comb.push_back(i % 2 ? 100.0 : 0.0);
    CHECK(kind_of([&] { fit_gaussian(comb); }) == ErrorKind::FitFailure);
  }
}

TEST_CASE("window placement") {
  const double rc = midpoint_center(10.2, 10.8);
  CHECK(rc == doctest::Approx(10.5));
  CHECK(std::floor(rc) == 10.0);
  std::vector<double> sensor(512);
  std::iota(sensor.begin(), sensor.end(), 0.0);
  // Pixels 10 - 160 .. 10 + 160 do not fit on the sensor.
  CHECK(kind_of([&] { cut_window(sensor, rc); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { cut_window(sensor, 400.0); }) == ErrorKind::InvalidArgument);
  const auto w = cut_window(sensor, 200.5);
  REQUIRE(w.size() == 321);
  CHECK(w.front() == 360.0);
  CHECK(w[160] == 200.0);
  CHECK(w.back() == 40.0);
}

TEST_CASE("normalization") {
  std::vector<double> r(321), l(321);
  for (int i = 0; i < 321; ++i) {
    r[i] = 50.0 + 30.0 * std::sin(0.1 * i) + i;
    l[i] = 400.0 - i;
  }
  const auto same = normalize_pair(r, r);
  CHECK(same.right == same.left);
  const auto pair = normalize_pair(r, l);
  CHECK(std::accumulate(pair.right.begin(), pair.right.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::accumulate(pair.left.begin(), pair.left.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pair.total[5] == r[5] + l[5]);
}

TEST_CASE("weak momentum extraction") {
  NormalizedPair pair;
  pair.right = {0.25, 0.5, 0.25, 0.0};
  pair.left = {0.25, 0.0, 0.5, 0.0};
  pair.total = {100.0, 100.0, 100.0, 5.0};
  const auto out = extract_weak_momentum(pair, zeta336);
  CHECK(out.k_ratio[0].value() == 0.0);
  CHECK(out.k_ratio[1].value() == doctest::Approx(0.004674989067841954).epsilon(1e-14));
  CHECK(out.k_ratio[2].value() == doctest::Approx(std::asin(-1.0 / 3.0) / 336.0));
  CHECK_FALSE(out.k_ratio[3].has_value());
  CHECK(out.clip_count == 0);
  const auto shifted = extract_weak_momentum(pair, CouplingModel(336.0, 0.1));
  CHECK(shifted.k_ratio[0].value() == doctest::Approx(-0.1 / 336.0));
}

TEST_CASE("noiseless round trip through the extraction") {
  const auto model = default_model();
  // The window must hold the whole field, or the section totals differ.
  SensorGeometry g;
  g.beta = 0.1;
  for (double z : {1.492, 3.0, 4.5}) {
    const Plane plane{z};
    const auto& field = model.unprojected();
    const auto images = synthesize_images(field, plane, zeta336, g, 1e7, 0, {true, false});
    const auto w = window_at_midlines(images, g, zeta336, 0.0);
    const double peak = field.peak_envelope(plane);
    std::vector<double> pos;
    std::vector<std::optional<double>> vals;
    double worst = 0.0, worst_interp = 0.0;
    for (std::size_t i = 0; i < w.positions.size(); ++i) {
      const double x = w.positions[i];
      if (field.density(x, plane) < 1e-6 * peak) continue;
      const double truth = field.k_ratio(x, plane);
      if (std::abs(phase_of_momentum(truth, zeta336)) >= kPi / 2) continue;
      worst = std::max(worst, std::abs(w.profile.k_ratio[i].value() - truth));
      const double bw = 0.1 * (w.positions[1] - w.positions[0]);
      const double interp = interpolate_momentum(w.positions, w.profile.k_ratio, x, bw);
      worst_interp = std::max(worst_interp, std::abs(interp - truth));
    }
    CHECK(worst < 1e-12);
    CHECK(worst_interp < 1e-10);
  }
}

TEST_CASE("pixel positions") {
  CHECK(pixel_to_position_mm(37.0, 0, 0.013, 1.0) == 0.0);
  CHECK(pixel_to_position_mm(10.5, 100, 0.013, 1.0) == doctest::Approx(1.3065).epsilon(1e-14));
  CHECK(pixel_to_position_mm(10.5, 100, 0.013, 2.0) == doctest::Approx(0.65325).epsilon(1e-14));
  const double a = pixel_to_position_mm(3.25, -7, 0.013, 1.7);
  const double b = pixel_to_position_mm(3.25, 0, 0.013, 1.7);
  const double c = pixel_to_position_mm(3.25, 7, 0.013, 1.7);
  CHECK(c - b == doctest::Approx(b - a).epsilon(1e-12));
  CHECK(pixel_to_position_mm(3.25, 9, 0.013, 0.5) == doctest::Approx(2.0 * pixel_to_position_mm(3.25, 9, 0.013, 1.0)));
  CHECK(kind_of([] { pixel_to_position_mm(0.0, 1, 0.013, 0.0); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { pixel_to_position_mm(0.0, 1, 0.013, -1.0); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("kernel interpolation") {
  const std::vector<double> pos{0.0, 1.0, 2.0, 10.0, 11.0};
  std::vector<std::optional<double>> vals{1.0, std::nullopt, 3.0, 7.0, std::nullopt};
  CHECK(interpolate_momentum(pos, vals, 10.0, 1.0) == 7.0);
  CHECK(kind_of([&] { interpolate_momentum(pos, vals, 30.0, 1.0); }) == ErrorKind::NoNeighbor);
  CHECK(kind_of([&] { interpolate_momentum(pos, vals, 11.0, 0.1); }) == ErrorKind::NoNeighbor);

  std::vector<double> ramp_x;
  std::vector<std::optional<double>> ramp_v;
  for (int i = 0; i < 101; ++i) {
    ramp_x.push_back(i);
    ramp_v.push_back(0.5 * i - 3.0);
  }
  for (double q : {40.5, 50.25, 61.9}) CHECK(std::abs(interpolate_momentum(ramp_x, ramp_v, q, 1.0) - (0.5 * q - 3.0)) < 1e-3);
}

TEST_CASE("calibration") {
  const auto angles = tilt_sweep_angles();
  REQUIRE(angles.size() == 37);
  CHECK(angles.front() == doctest::Approx(-0.48 * kPi / 180.0));
  CHECK(angles.back() == doctest::Approx(0.60 * kPi / 180.0));

  SUBCASE("principal branch, noiseless") {
    const auto principal = principal_branch_angles(angles, zeta336);
    CHECK(principal.size() < angles.size());
    const auto fit = calibrate_zeta(synthesize_sweep(zeta336, principal, 0.0, 1), PhaseBranch::Principal);
    CHECK(std::abs(fit.model.zeta - 336.0) < 1e-9 * 336.0);
    CHECK(std::abs(fit.model.phi0) < 1e-9);
    const CouplingModel shifted(336.0, 0.1);
    const auto fit2 = calibrate_zeta(synthesize_sweep(shifted, principal_branch_angles(angles, shifted), 0.0, 1),
                                     PhaseBranch::Principal);
    CHECK(fit2.model.phi0 == doctest::Approx(0.1).epsilon(1e-9));
    CHECK(std::abs(fit2.model.zeta - 336.0) < 0.5);
  }
  SUBCASE("full sweep with unwrapping") {
    const auto fit = calibrate_zeta(synthesize_sweep(zeta336, angles, 0.0, 1), PhaseBranch::Unwrap);
    CHECK(std::abs(fit.model.zeta - 336.0) < 1e-9 * 336.0);
    const auto noisy = calibrate_zeta(synthesize_sweep(zeta336, angles, 1e6, 9), PhaseBranch::Unwrap);
    CHECK(std::abs(noisy.model.zeta - 336.0) < 5.0);
    CHECK(noisy.zeta_stderr > 0.0);
  }
  SUBCASE("degenerate sweeps") {
    const CalibrationSweep same{{0.001, 0.001}, {1.0, 1.0}, {0.5, 0.5}};
    CHECK(kind_of([&] { calibrate_zeta(same); }) == ErrorKind::FitDegenerate);
    const CalibrationSweep two{{0.001, 0.002}, {1.0, 1.0}, {0.5, 0.5}};
    CHECK(kind_of([&] { calibrate_zeta(two); }) == ErrorKind::InvalidArgument);
  }
}

TEST_CASE("shot noise falls as one over root budget") {
  const auto model = default_model();
  const auto& field = model.unprojected();
  SensorGeometry g;
  g.beta = 0.2;
  const Plane plane{3.0};
  auto rms_error = [&](double budget) {
    double total = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
      const auto images = synthesize_images(field, plane, zeta336, g, budget, derive_seed(11, {s}));
      const auto w = window_at_midlines(images, g, zeta336, 0.0);
      double peak = 0.0;
      for (double x : w.positions) peak = std::max(peak, field.density(x, plane));
      double se = 0.0;
      int n = 0;
      for (std::size_t i = 0; i < w.positions.size(); ++i) {
        const double x = w.positions[i];
        if (field.density(x, plane) < 0.1 * peak) continue;
        se += std::pow(w.profile.k_ratio[i].value() - field.k_ratio(x, plane), 2);
        ++n;
      }
      total += std::sqrt(se / n);
    }
    return total / 20.0;
  };
  const double e5 = rms_error(1e5), e6 = rms_error(1e6), e7 = rms_error(1e7);
  for (double ratio : {e5 / e6, e6 / e7}) {
    CHECK(ratio > std::sqrt(10.0) / 1.5);
    CHECK(ratio < std::sqrt(10.0) * 1.5);
  }
}

TEST_CASE("detector images validate their invariants") {
  DetectorImage img;
  img.counts.assign(321, 3);
  CHECK_NOTHROW(img.validate());
  img.counts[4] = -1;
  CHECK(kind_of([&] { img.validate(); }) == ErrorKind::Validation);
  img.counts[4] = 0;
  img.counts.pop_back();
  CHECK(kind_of([&] { img.validate(); }) == ErrorKind::Validation);
  img.counts.push_back(0);
  img.pixel_pitch_mm = 0.0;
  CHECK(kind_of([&] { img.validate(); }) == ErrorKind::Validation);
}

TEST_CASE("acquired plane reconstructs the unprojected field") {
  const auto model = default_model();
  AcquisitionSettings settings;
  settings.geometry.beta = 0.2;
  const Plane plane{3.0};
  const auto acq = acquire_plane(model, model.unprojected(), plane, settings, 17);
  CHECK(acq.right.plane_z == 3.0);
  CHECK(std::abs(acq.right.center_offset - settings.geometry.right_midline) < 0.5);
  CHECK(std::abs(acq.left.center_offset - settings.geometry.left_midline) < 0.5);
  const auto pm = reconstruct_plane(acq.right, acq.left, settings.coupling);
  const ReconstructedField rf({pm});
  const auto& truth = model.unprojected();
  double peak = 0.0;
  for (double x : pm.positions) peak = std::max(peak, truth.density(x, plane));
  double se = 0.0, vmax = 0.0;
  int n = 0;
  for (double x : pm.positions) {
    if (truth.density(x, plane) < 0.01 * peak) continue;
    se += std::pow(rf.k_ratio(x, plane) - truth.k_ratio(x, plane), 2);
    vmax = std::max(vmax, std::abs(truth.k_ratio(x, plane)));
    ++n;
  }
  CHECK(std::sqrt(se / n) < 0.02 * vmax);
  CHECK(kind_of([&] { rf.plane(2.0); }) == ErrorKind::OffGrid);
}

TEST_CASE("alignment images recorded with the coupling on spoil the reconstruction") {
  const auto model = default_model();
  const auto target = model.projected(ProjectionBasis::from_degrees(18.5), Outcome::Theta).field;
  const Plane plane{3.0};
  auto relative_error = [&](bool coupling_on) {
    AcquisitionSettings settings;
    settings.geometry.beta = 0.2;
    settings.alignment_coupling = coupling_on;
    const auto acq = acquire_plane(model, target, plane, settings, 23);
    const auto pm = reconstruct_plane(acq.right, acq.left, settings.coupling);
    double peak = 0.0;
    for (double x : pm.positions) peak = std::max(peak, target.density(x, plane));
    double se = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < pm.positions.size(); ++i) {
      const double x = pm.positions[i];
      if (!pm.k_ratio[i] || target.density(x, plane) < 0.1 * peak) continue;
      const double truth = target.k_ratio(x, plane);
      se += std::pow(*pm.k_ratio[i] - truth, 2);
      ss += truth * truth;
    }
    return std::sqrt(se / ss);
  };
  const double off = relative_error(false);
  const double on = relative_error(true);
  CHECK(off < 0.1);
  CHECK(on > 1.0);
}
