#pragma once

#include <complex>

namespace bohmsteer {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

/// Longitudinal position of an imaging plane. In the paraxial picture z plays
/// the role of time.
struct Plane {
  double z = 0.0;
};

inline double wavenumber_from_wavelength(double wavelength) { return 2.0 * kPi / wavelength; }

/**
 * One-dimensional paraxial Gaussian wavepacket.
 *
 * At the waist plane the packet is the real Gaussian
 *   a * (2 / (pi w0^2))^(1/4) * exp(-(x - x_c)^2 / w0^2),
 * normalised so that the integral of |psi|^2 over x equals |a|^2. Away from
 * the waist it acquires the usual width growth w(z), wavefront curvature 1/R(z)
 * and a half Gouy phase (the one-transverse-dimension value).
 */
class GaussianPacket {
 public:
  GaussianPacket(double center_x, double waist, double waist_z, double wavenumber,
                 Complex amplitude = 1.0);

  double center_x() const { return center_x_; }
  double waist() const { return waist_; }
  double waist_z() const { return waist_z_; }
  double wavenumber() const { return wavenumber_; }
  Complex amplitude() const { return amplitude_; }

  double rayleigh_range() const { return 0.5 * wavenumber_ * waist_ * waist_; }
  double width(Plane plane) const;
  /// 1/R(z); zero at the waist plane.
  double inverse_curvature(Plane plane) const;
  double gouy_phase(Plane plane) const;
  /// |psi|^2 at the packet center.
  double peak_density(Plane plane) const;

  Complex evaluate(double x, Plane plane) const;
  /// Analytic d(psi)/dx.
  Complex gradient(double x, Plane plane) const;

  GaussianPacket with_center(double center_x) const;
  GaussianPacket with_amplitude(Complex amplitude) const;

 private:
  double center_x_;
  double waist_;
  double waist_z_;
  double wavenumber_;
  Complex amplitude_;
};

/// Inner product <a|b> over x. Free propagation is unitary, so the result does
/// not depend on the plane; both packets must share the wavenumber.
Complex overlap(const GaussianPacket& a, const GaussianPacket& b);

}  // namespace bohmsteer
