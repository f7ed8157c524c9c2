#include "bohmsteer/entangled_state.hpp"

#include <cmath>
#include <sstream>

#include "bohmsteer/error.hpp"

namespace bohmsteer {

Complex Branch::evaluate(double x, Plane plane) const {
  Complex sum = 0.0;
  for (const auto& term : terms) sum += term.coeff * term.packet.evaluate(x, plane);
  return sum;
}

Complex Branch::gradient(double x, Plane plane) const {
  Complex sum = 0.0;
  for (const auto& term : terms) sum += term.coeff * term.packet.gradient(x, plane);
  return sum;
}

double Branch::norm_sq() const {
  double sum = 0.0;
  for (const auto& a : terms) {
    for (const auto& b : terms) {
      sum += std::real(std::conj(a.coeff) * b.coeff * overlap(a.packet, b.packet));
    }
  }
  return sum;
}

BranchState::BranchState(std::vector<Branch> branches, double norm_tolerance)
    : branches_(std::move(branches)) {
  require(!branches_.empty(), "branch state needs at least one branch");
  for (const auto& branch : branches_) require(!branch.terms.empty(), "every branch needs at least one packet");
  const double n = norm();
  if (std::abs(n - 1.0) > norm_tolerance) {
    std::ostringstream msg;
    msg << "branch state norm " << n << " differs from 1";
    fail(ErrorKind::InvalidArgument, msg.str());
  }
}

double BranchState::norm() const {
  double sum = 0.0;
  for (const auto& branch : branches_) sum += std::norm(branch.weight) * branch.norm_sq();
  return sum;
}

BranchState BranchState::with_branch_phase(std::size_t branch, double phase) const {
  require(branch < branches_.size(), "branch index out of range");
  auto copy = branches_;
  copy[branch].weight *= std::polar(1.0, phase);
  return BranchState(std::move(copy));
}

ProjectionBasis::ProjectionBasis(double theta_rad) : theta(theta_rad) {
  require(theta_rad >= 0.0 && theta_rad < kPi, "projection angle must lie in [0, pi)");
}

ProjectionBasis ProjectionBasis::from_degrees(double degrees) { return ProjectionBasis(degrees * kPi / 180.0); }

BranchState make_split_state(double separation, const GaussianPacket& packet_template, double relative_phase) {
  require(separation > 0.0 && std::isfinite(separation), "slit separation must be positive");
  const auto unit = packet_template.with_amplitude(1.0);
  const Complex weight = 1.0 / std::sqrt(2.0);
  std::vector<Branch> branches;
  branches.push_back({weight, {{1.0, unit.with_center(-0.5 * separation)}}});
  branches.push_back({weight, {{std::polar(1.0, relative_phase), unit.with_center(0.5 * separation)}}});
  return BranchState(std::move(branches));
}

namespace {

Branch combine(const Branch& first, Complex a, const Branch& second, Complex b) {
  Branch out{1.0, {}};
  for (const auto& term : first.terms) out.terms.push_back({a * first.weight * term.coeff, term.packet});
  for (const auto& term : second.terms) out.terms.push_back({b * second.weight * term.coeff, term.packet});
  return out;
}

}  // namespace

Projection project(const BranchState& state, ProjectionBasis basis, Outcome outcome) {
  require(state.size() == 2, "projection needs the two-branch split state");
  const auto& first = state.branches()[0];
  const auto& second = state.branches()[1];
  const double c = std::cos(basis.theta);
  const double s = std::sin(basis.theta);

  const double p_theta = combine(first, c, second, -s).norm_sq();
  Branch kept = outcome == Outcome::Theta ? combine(first, c, second, -s) : combine(first, s, second, c);
  const double kept_norm = kept.norm_sq();
  if (!(kept_norm > 1e-300)) fail(ErrorKind::InvalidArgument, "projection outcome has zero probability");

  const double scale = 1.0 / std::sqrt(kept_norm);
  for (auto& term : kept.terms) term.coeff *= scale;
  const double probability = outcome == Outcome::Theta ? p_theta : 1.0 - p_theta;
  return {BranchState({std::move(kept)}), probability};
}

VelocityField::VelocityField(BranchState state, FieldParams params) : state_(std::move(state)), params_(params) {
  require(params_.wavenumber > 0.0, "velocity field needs a positive wavenumber");
  require(params_.light_speed > 0.0, "velocity field needs a positive light speed");
  require(params_.relative_density_floor >= 0.0 && params_.absolute_density_floor >= 0.0,
          "density floors must be non-negative");
}

double VelocityField::density(double x, Plane plane) const {
  double rho = 0.0;
  for (const auto& branch : state_.branches()) rho += std::norm(branch.weight) * std::norm(branch.evaluate(x, plane));
  return rho;
}

double VelocityField::current(double x, Plane plane) const {
  double flux = 0.0;
  for (const auto& branch : state_.branches()) {
    flux += std::norm(branch.weight) * std::imag(std::conj(branch.evaluate(x, plane)) * branch.gradient(x, plane));
  }
  return params_.light_speed * flux / params_.wavenumber;
}

double VelocityField::peak_envelope(Plane plane) const {
  double bound = 0.0;
  for (const auto& branch : state_.branches()) {
    double amplitude = 0.0;
    for (const auto& term : branch.terms) amplitude += std::abs(term.coeff) * std::sqrt(term.packet.peak_density(plane));
    bound += std::norm(branch.weight) * amplitude * amplitude;
  }
  return bound;
}

double VelocityField::velocity(double x, Plane plane) const {
  double rho = 0.0;
  double flux = 0.0;
  for (const auto& branch : state_.branches()) {
    const Complex psi = branch.evaluate(x, plane);
    const double w2 = std::norm(branch.weight);
    rho += w2 * std::norm(psi);
    flux += w2 * std::imag(std::conj(psi) * branch.gradient(x, plane));
  }
  const double floor = std::max(params_.absolute_density_floor, params_.relative_density_floor * peak_envelope(plane));
  if (!(rho > floor)) {
    std::ostringstream msg;
    msg << "velocity undefined at node x=" << x << " z=" << plane.z;
    fail(ErrorKind::Node, msg.str());
  }
  const double v = params_.light_speed * flux / (params_.wavenumber * rho);
  if (!(std::abs(v) < params_.light_speed)) {
    std::ostringstream msg;
    msg << "non-paraxial velocity near node x=" << x << " z=" << plane.z;
    fail(ErrorKind::Node, msg.str());
  }
  return v;
}

SteeringModel::SteeringModel(BranchState unprojected, FieldParams params)
    : unprojected_(std::move(unprojected), params) {}

ProjectedField SteeringModel::projected(ProjectionBasis basis, Outcome outcome) const {
  auto [state, probability] = project(unprojected_.state(), basis, outcome);
  return {VelocityField(std::move(state), unprojected_.params()), probability};
}

double SteeringModel::velocity_change(double x, Plane plane, ProjectionBasis basis, Outcome outcome) const {
  const double before = unprojected_.velocity(x, plane);
  return projected(basis, outcome).field.velocity(x, plane) - before;
}

}  // namespace bohmsteer
