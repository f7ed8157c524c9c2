#include <doctest.h>

#include <cmath>

#include "bohmsteer/error.hpp"
#include "bohmsteer/trajectory.hpp"

using namespace bohmsteer;

namespace {

const double k808 = wavenumber_from_wavelength(808e-9);
const GaussianPacket tmpl(0.0, 3e-4, 0.0, k808);
const double c = kSpeedOfLight;

SteeringModel default_model() { return SteeringModel(make_split_state(3e-3, tmpl), FieldParams{k808}); }
PlaneGrid default_grid() { return PlaneGrid::uniform(1.492, 4.5, 45); }

bool crosses_midline(const Trajectory& t) {
  const bool left = t.points.front().x < 0.0;
  for (const auto& p : t.points)
    if ((p.x < 0.0) != left && p.x != 0.0) return true;
  return false;
}

}  // namespace

TEST_CASE("euler step") {
  CHECK(euler_step(1.25e-3, 2.0, 2.1, 0.0) == 1.25e-3);
  CHECK(euler_step(0.0, 1.0, 2.0, c / std::sqrt(2.0)) == doctest::Approx(1.0).epsilon(1e-15));
  const double dz = (4.5 - 1.492) / 44.0;
  CHECK(dz == doctest::Approx(0.0684).epsilon(1e-3));
  // 0.0684 * 1e-3 / sqrt(1 - 1e-6), evaluated independently.
  CHECK(std::abs(euler_step(0.0, 0.0, 0.0684, 1e-3 * c) - 6.840003420002566e-05) < 1e-18);
  CHECK(std::abs(euler_step(0.0, 0.0, 0.0684, 1e-3 * c) - 6.84e-5) < 1e-10);
  CHECK_THROWS_AS(euler_step(0.0, 0.0, 1.0, c), Error);
  CHECK_THROWS_AS(euler_step(0.0, 0.0, 1.0, -1.5 * c), Error);
  CHECK_THROWS_AS(euler_step(0.0, 1.0, 1.0, 0.0), Error);
}

TEST_CASE("euler step matches an independent form of the rule") {
  for (double v : {-0.3 * c, -1e-4 * c, 2e-6 * c, 0.7 * c})
    for (double dz : {0.01, 0.0683636, 1.3}) {
      const double x = 7e-4;
      const double beta = v / c;
      const double reference = x + dz * beta / std::sqrt(1.0 - beta * beta);
      CHECK(euler_step(x, 1.0, 1.0 + dz, v) == doctest::Approx(reference).epsilon(1e-14));
      CHECK(euler_step(x, 1.0, 1.0 + dz, v) == x + ((1.0 + dz) - 1.0) * v / std::sqrt(c * c - v * v));
    }
}

TEST_CASE("plane grids") {
  const auto g = default_grid();
  CHECK(g.size() == 45);
  CHECK(g.front() == 1.492);
  CHECK(g.back() == 4.5);
  CHECK(g.refined().size() == 89);
  CHECK(g.refined()[2] == g[1]);
  CHECK(g.index_of(g[7]).value() == 7);
  CHECK_FALSE(g.index_of(2.245).has_value());
  CHECK(g[g.nearest(2.245)] == doctest::Approx(2.244).epsilon(1e-12));
  CHECK_THROWS_AS(PlaneGrid({1.0}), Error);
  CHECK_THROWS_AS(PlaneGrid({1.0, 1.0}), Error);
  CHECK_THROWS_AS(PlaneGrid({2.0, 1.0}), Error);
}

TEST_CASE("trace along symmetry lines") {
  const auto grid = default_grid();
  const VelocityField single(BranchState({Branch{1.0, {{1.0, tmpl.with_center(7e-4)}}}}), FieldParams{k808});
  const auto straight = trace(7e-4, grid, as_function(single));
  REQUIRE(straight.complete());
  for (const auto& p : straight.points) CHECK(p.x == 7e-4);

  const auto mid = trace(0.0, grid, as_function(default_model().unprojected()));
  REQUIRE(mid.complete());
  CHECK(mid.points.size() == 45);
  for (const auto& p : mid.points) CHECK(p.x == 0.0);
}

TEST_CASE("trace reports nodes with the partial path") {
  const auto grid = default_grid();
  const auto v = [](double x, Plane) -> double {
    if (x > 1e-3) fail(ErrorKind::Node, "test node");
    return 1e-3 * kSpeedOfLight;
  };
  const auto t = trace(0.0, grid, v);
  CHECK_FALSE(t.complete());
  CHECK(t.points.size() > 1);
  CHECK(t.points.size() < grid.size());
  CHECK(t.points.back().x > 1e-3);
}

TEST_CASE("unprojected trajectories do not cross") {
  const auto model = default_model();
  const auto grid = default_grid();
  const auto starts = default_starts(model.unprojected().state(), Plane{grid.front()});
  REQUIRE(starts.size() == 32);
  std::vector<Trajectory> ts;
  for (double x0 : starts) ts.push_back(trace(x0, grid, as_function(model.unprojected())));
  double min_gap = 1.0;
  for (std::size_t j = 0; j < grid.size(); ++j)
    for (std::size_t i = 1; i < ts.size(); ++i) {
      REQUIRE(ts[i].complete());
      min_gap = std::min(min_gap, ts[i].points[j].x - ts[i - 1].points[j].x);
    }
  CHECK(min_gap > 1e-12);
}

TEST_CASE("default starts") {
  const auto model = default_model();
  const auto starts = default_starts(model.unprojected().state(), Plane{1.492}, 16);
  const double w = tmpl.width(Plane{1.492});
  CHECK(starts.front() == doctest::Approx(-1.5e-3 - 2.0 * w));
  CHECK(starts.back() == doctest::Approx(1.5e-3 + 2.0 * w));
  CHECK(std::is_sorted(starts.begin(), starts.end()));
}

TEST_CASE("steering switch at the ends of the grid") {
  const auto model = default_model();
  const auto grid = default_grid();
  const auto basis = ProjectionBasis::from_degrees(31.4);
  const auto projected = model.projected(basis, Outcome::ThetaBar).field;
  for (double x0 : {-2.1e-3, -4e-4, 1.1e-3}) {
    const auto at_first = trace_steered(x0, grid, grid.front(), model, basis, Outcome::ThetaBar);
    const auto all_projected = trace(x0, grid, as_function(projected));
    REQUIRE(at_first.points.size() == all_projected.points.size());
    for (std::size_t j = 0; j < grid.size(); ++j) CHECK(at_first.points[j].x == all_projected.points[j].x);

    const auto at_last = trace_steered(x0, grid, grid.back(), model, basis, Outcome::ThetaBar);
    const auto plain = trace(x0, grid, as_function(model.unprojected()));
    for (std::size_t j = 0; j < grid.size(); ++j) CHECK(at_last.points[j].x == plain.points[j].x);
    CHECK(at_last.branch_z.value() == grid.back());
    CHECK(at_last.label->outcome == Outcome::ThetaBar);
  }
}

TEST_CASE("switch planes off the grid are rejected") {
  const auto model = default_model();
  try {
    trace_steered(0.0, default_grid(), 2.245, model, ProjectionBasis::from_degrees(18.5), Outcome::Theta);
    FAIL("expected off-grid error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::OffGrid);
  }
}

TEST_CASE("steering at 18.5 degrees carries a lower-packet trajectory across the midline") {
  const auto model = default_model();
  const auto grid = default_grid();
  const double z_switch = grid[grid.nearest(2.245)];
  const auto basis = ProjectionBasis::from_degrees(18.5);
  const auto starts = default_starts(model.unprojected().state(), Plane{grid.front()});
  std::size_t steered = 0, unsteered = 0;
  for (double x0 : starts) {
    if (x0 >= 0.0) continue;
    const auto t = trace_steered(x0, grid, z_switch, model, basis, Outcome::Theta);
    if (t.complete() && crosses_midline(t)) ++steered;
    if (crosses_midline(trace(x0, grid, as_function(model.unprojected())))) ++unsteered;
  }
  CHECK(unsteered == 0);
  CHECK(steered >= 1);
}

TEST_CASE("midpoint rule is available and close to euler on a smooth field") {
  const auto model = default_model();
  const auto grid = default_grid();
  TraceOptions mid;
  mid.rule = StepRule::Midpoint;
  const auto a = trace(-1.2e-3, grid, as_function(model.unprojected()));
  const auto b = trace(-1.2e-3, grid, as_function(model.unprojected()), mid);
  REQUIRE(b.complete());
  CHECK(std::abs(a.final_x() - b.final_x()) < 0.01 * 3e-3);
  CHECK(a.final_x() != b.final_x());
}

TEST_CASE("velocity change maps") {
  const auto model = default_model();
  const auto grid = default_grid();
  const auto xs = symmetric_axis(4e-3, 161);
  CHECK(xs[80] == 0.0);
  CHECK(xs.front() == -4e-3);

  SUBCASE("antisymmetric at 45 degrees") {
    const auto map = velocity_change_map(model, xs, grid, ProjectionBasis::from_degrees(45.0), Outcome::Theta);
    for (std::size_t iz = 0; iz < grid.size(); ++iz)
      for (std::size_t ix = 0; ix < xs.size(); ++ix) {
        const auto& a = map.at(ix, iz);
        const auto& b = map.at(xs.size() - 1 - ix, iz);
        REQUIRE(a.has_value() == b.has_value());
        if (a) CHECK(std::abs(*a + *b) < 1e-10);
      }
  }
  SUBCASE("negligible where one branch dominates at 62.9 degrees") {
    const auto map = velocity_change_map(model, xs, grid, ProjectionBasis::from_degrees(62.9), Outcome::Theta);
    const auto left = tmpl.with_center(-1.5e-3);
    const auto right = tmpl.with_center(1.5e-3);
    std::size_t checked = 0;
    for (std::size_t iz = 0; iz < grid.size(); ++iz)
      for (std::size_t ix = 0; ix < xs.size(); ++ix) {
        const Plane p{grid[iz]};
        const double l = std::norm(left.evaluate(xs[ix], p));
        const double r = std::norm(right.evaluate(xs[ix], p));
        const double ratio = std::min(l, r) / std::max(l, r);
        if (ratio < 1e-12 && map.at(ix, iz)) {
          CHECK(std::abs(*map.at(ix, iz)) < 1e-8);
          ++checked;
        }
      }
    CHECK(checked > 0);
  }
  SUBCASE("values only above the density floor at 31.4 degrees") {
    const auto basis = ProjectionBasis::from_degrees(31.4);
    const auto map = velocity_change_map(model, xs, grid, basis, Outcome::Theta);
    const auto projected = model.projected(basis, Outcome::Theta).field;
    std::size_t missing = 0;
    for (std::size_t iz = 0; iz < grid.size(); ++iz)
      for (std::size_t ix = 0; ix < xs.size(); ++ix) {
        const Plane p{grid[iz]};
        const bool above = projected.density(xs[ix], p) > 1e-12 * projected.peak_envelope(p) &&
                           model.unprojected().density(xs[ix], p) > 1e-12 * model.unprojected().peak_envelope(p);
        if (map.at(ix, iz)) {
          CHECK(std::isfinite(*map.at(ix, iz)));
          CHECK(above);
        } else {
          ++missing;
        }
      }
    CHECK(missing < xs.size() * grid.size());
  }
}
