#include "bohmsteer/wavepacket.hpp"

#include <cmath>

#include "bohmsteer/error.hpp"

namespace bohmsteer {

namespace {

struct Envelope {
  double width_sq;
  double inverse_curvature;
  double gouy;
};

Envelope envelope_at(const GaussianPacket& packet, Plane plane) {
  const double dz = plane.z - packet.waist_z();
  const double zr = packet.rayleigh_range();
  const double ratio = dz / zr;
  const double w0 = packet.waist();
  return {w0 * w0 * (1.0 + ratio * ratio), dz / (dz * dz + zr * zr), std::atan2(dz, zr)};
}

// psi = prefactor * exp(-alpha * u^2), the form used by the overlap integral.
struct QuadraticForm {
  Complex prefactor;
  Complex alpha;
};

QuadraticForm quadratic_form(const GaussianPacket& packet, Plane plane) {
  const Envelope env = envelope_at(packet, plane);
  const double norm = std::pow(2.0 / (kPi * env.width_sq), 0.25);
  return {packet.amplitude() * norm * std::polar(1.0, -0.5 * env.gouy),
          Complex(1.0 / env.width_sq, -0.5 * packet.wavenumber() * env.inverse_curvature)};
}

}  // namespace

GaussianPacket::GaussianPacket(double center_x, double waist, double waist_z, double wavenumber,
                               Complex amplitude)
    : center_x_(center_x),
      waist_(waist),
      waist_z_(waist_z),
      wavenumber_(wavenumber),
      amplitude_(amplitude) {
  require(std::isfinite(center_x) && std::isfinite(waist_z), "packet center and waist plane must be finite");
  require(waist > 0.0 && std::isfinite(waist), "packet waist must be positive");
  require(wavenumber > 0.0 && std::isfinite(wavenumber), "wavenumber must be positive");
}

double GaussianPacket::width(Plane plane) const { return std::sqrt(envelope_at(*this, plane).width_sq); }

double GaussianPacket::inverse_curvature(Plane plane) const {
  return envelope_at(*this, plane).inverse_curvature;
}

double GaussianPacket::gouy_phase(Plane plane) const { return envelope_at(*this, plane).gouy; }

double GaussianPacket::peak_density(Plane plane) const {
  return std::norm(amplitude_) * std::sqrt(2.0 / kPi) / width(plane);
}

Complex GaussianPacket::evaluate(double x, Plane plane) const {
  const Envelope env = envelope_at(*this, plane);
  const double u = x - center_x_;
  const double norm = std::pow(2.0 / (kPi * env.width_sq), 0.25);
  const double log_mag = -u * u / env.width_sq;
  const double phase = 0.5 * wavenumber_ * u * u * env.inverse_curvature - 0.5 * env.gouy;
  return amplitude_ * norm * std::exp(Complex(log_mag, phase));
}

Complex GaussianPacket::gradient(double x, Plane plane) const {
  const Envelope env = envelope_at(*this, plane);
  const double u = x - center_x_;
  return evaluate(x, plane) * Complex(-2.0 * u / env.width_sq, wavenumber_ * u * env.inverse_curvature);
}

GaussianPacket GaussianPacket::with_center(double center_x) const {
  return GaussianPacket(center_x, waist_, waist_z_, wavenumber_, amplitude_);
}

GaussianPacket GaussianPacket::with_amplitude(Complex amplitude) const {
  return GaussianPacket(center_x_, waist_, waist_z_, wavenumber_, amplitude);
}

Complex overlap(const GaussianPacket& a, const GaussianPacket& b) {
  require(a.wavenumber() == b.wavenumber(), "overlap requires packets with a common wavenumber");
  const Plane plane{a.waist_z()};
  const QuadraticForm fa = quadratic_form(a, plane);
  const QuadraticForm fb = quadratic_form(b, plane);
  const Complex p = std::conj(fa.alpha);
  const Complex q = fb.alpha;
  const Complex sum = p + q;
  const double separation = a.center_x() - b.center_x();
  return std::conj(fa.prefactor) * fb.prefactor * std::sqrt(kPi / sum) *
         std::exp(-p * q * separation * separation / sum);
}

}  // namespace bohmsteer
