#include "doctest.h"
#include "test_util.hpp"

#include "gsrecon/cases.hpp"

using namespace gsrecon;

namespace {

Polyline circle(const Point& c, double radius, int n = 400) {
  Polyline p;
  for (int k = 0; k < n; ++k) {
    const double t = 2.0 * std::numbers::pi * k / n;
    p.emplace_back(c.x() + radius * std::cos(t), c.y() + radius * std::sin(t));
  }
  return p;
}

Eigen::VectorXd sample(const Mesh& m, const std::function<double(const Point&)>& f) {
  Eigen::VectorXd v(m.num_nodes());
  for (int i = 0; i < m.num_nodes(); ++i) v[i] = f(m.node(i));
  return v;
}

double interp(const Mesh& m, const Eigen::VectorXd& f, int t, const Point& p) {
  const auto& tri = m.triangle(t);
  return m.barycentric(t, p).dot(Eigen::Vector3d(f[tri[0]], f[tri[1]], f[tri[2]]));
}

}  // namespace

TEST_CASE("axis of a paraboloid") {
  const Mesh m = generate_vessel_mesh(circle({3.0, 0.0}, 1.0), 0.1);
  const Eigen::VectorXd psi = sample(m, [](const Point& p) { return -(std::pow(p.x() - 3.02, 2) + std::pow(p.y() + 0.013, 2)); });
  const AxisInfo axis = find_axis(m, psi);
  CHECK((axis.position - Point(3.02, -0.013)).norm() < 1e-6);
  CHECK(axis.psi == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
  CHECK(axis.psi >= psi.maxCoeff());
  CHECK(test_util::error_kind([&] { find_axis(m, Eigen::VectorXd::Constant(m.num_nodes(), 1.0)); }).has_value());
}

TEST_CASE("Soloviev axis matches the analytic axis") {
  const Soloviev s;
  const SyntheticCase c = soloviev_case(s, 0.05);
  const double h = c.mesh->mean_edge();
  CHECK((c.flux.axis.position - Point(s.R0, 0.0)).norm() <= h * h);
  CHECK(c.flux.axis.psi >= c.flux.psi.maxCoeff());
}

TEST_CASE("saddle of a hyperbolic paraboloid") {
  const Mesh m = generate_vessel_mesh({{2, -1}, {4, -1}, {4, 1}, {2, 1}}, 0.1);
  const Eigen::VectorXd psi = sample(m, [](const Point& p) { return p.y() * p.y() - std::pow(p.x() - 3.0, 2) + 10.0; });
  AxisInfo axis;
  axis.position = Point(3.0, 0.9);
  axis.psi = 20.0;
  const BoundaryFlux b = find_boundary_flux(m, psi, axis);
  CHECK(b.kind == BoundaryKind::XPoint);
  REQUIRE(b.x_point);
  CHECK((*b.x_point - Point(3.0, 0.0)).norm() < 1e-9);
  CHECK(b.psi_b == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("limiter fallback without a saddle") {
  const Mesh m = generate_vessel_mesh({{2, -1}, {4, -1}, {4, 1}, {2, 1}}, 0.1);
  const Eigen::VectorXd psi = sample(m, [](const Point& p) { return -(std::pow(p.x() - 2.9, 2) + 2.0 * p.y() * p.y()); });
  const FluxState s = analyze_flux(m, psi);
  CHECK(s.boundary.kind == BoundaryKind::Limiter);
  CHECK_FALSE(s.boundary.x_point);
  double wall = -1e300;
  for (int v : m.boundary_nodes()) wall = std::max(wall, psi[v]);
  CHECK(s.psi_b() == wall);
}

TEST_CASE("normalized flux") {
  const Eigen::Vector3d psi(2.0, 0.5, 1.25);
  const Eigen::VectorXd x = normalize_flux(psi, 2.0, 0.5);
  CHECK(x[0] == 0.0);
  CHECK(x[1] == 1.0);
  CHECK(x[2] == doctest::Approx(0.5));
  CHECK(test_util::error_kind([&] { normalize_flux(psi, 1.0, 1.0); }) == ErrorKind::Topology);
}

TEST_CASE("level lines of a circular field") {
  const double h = 0.05;
  const Mesh m = generate_vessel_mesh(circle({3.0, 0.0}, 1.0), h);
  const Eigen::VectorXd x = sample(m, [](const Point& p) { return (std::pow(p.x() - 3.0, 2) + p.y() * p.y()) / 0.25; });
  const Contour c1 = extract_contour(m, x, 1.0, {3.0, 0.0});
  const Contour c4 = extract_contour(m, x, 0.25, {3.0, 0.0});
  REQUIRE_FALSE(c1.empty());
  REQUIRE_FALSE(c4.empty());
  CHECK(c1.points.size() == c1.segment_triangles.size());
  for (const auto& p : c1.points) CHECK(std::abs((p - Point(3.0, 0.0)).norm() - 0.5) < h);
  for (const auto& p : c4.points) CHECK(std::abs((p - Point(3.0, 0.0)).norm() - 0.25) < h);
  CHECK(signed_area(c1.points) > 0.0);
  CHECK(std::abs(signed_area(c1.points) - std::numbers::pi / 4.0) < 2.0 * h * h);
  for (std::size_t k = 0; k < c1.points.size(); ++k) {
    const int t = c1.segment_triangles[k];
    CHECK(std::abs(interp(m, x, t, c1.points[k]) - 1.0) < 1e-10);
    CHECK(std::abs(interp(m, x, t, c1.points[(k + 1) % c1.points.size()]) - 1.0) < 1e-10);
  }
  // Nested level lines.
  for (const auto& p : c4.points) CHECK(inside_polygon(c1.points, p));
}

TEST_CASE("Soloviev topology") {
  const SyntheticCase c = soloviev_case(Soloviev{}, 0.1);
  const FluxState& s = c.flux;
  const Mesh& m = *c.mesh;
  CHECK(s.psibar.minCoeff() >= -1e-12);
  CHECK(std::abs(interpolate(m, s.psibar, s.axis.position)) < 1e-2);
  for (int t = 0; t < m.num_triangles(); ++t) {
    CHECK(s.mask[t] >= 0.0);
    CHECK(s.mask[t] <= 1.0);
    const auto& tri = m.triangle(t);
    if (s.psibar[tri[0]] < 1.0 && s.psibar[tri[1]] < 1.0 && s.psibar[tri[2]] < 1.0) CHECK(s.mask[t] == 1.0);
  }
}

TEST_CASE("diverted reference equilibrium") {
  const ReferenceMachine machine;
  const auto coarse = std::make_shared<const Mesh>(machine.mesh(0.1));
  const auto fine = std::make_shared<const Mesh>(machine.mesh(0.025));
  const SyntheticCase a = reference_case(coarse, ProfileShape::Monotonic);
  const SyntheticCase b = reference_case(fine, ProfileShape::Monotonic);
  REQUIRE(a.flux.boundary.kind == BoundaryKind::XPoint);
  REQUIRE(b.flux.boundary.kind == BoundaryKind::XPoint);
  MESSAGE("x-point offset against the 4x finer mesh: " << (*a.flux.boundary.x_point - *b.flux.boundary.x_point).norm());
  CHECK((*a.flux.boundary.x_point - *b.flux.boundary.x_point).norm() <= 0.01);

  const FluxState& s = a.flux;
  const Mesh& m = *coarse;
  CHECK(s.warnings.empty());
  for (int t = 0; t < m.num_triangles(); ++t) {
    CHECK(s.mask[t] >= 0.0);
    CHECK(s.mask[t] <= 1.0);
    const auto& tri = m.triangle(t);
    bool all_out = true;
    for (int v : tri) all_out = all_out && s.psibar[v] > 1.0;
    if (all_out) CHECK(s.mask[t] == 0.0);
  }
  // Plasma lies on the core side of the X-point, inside its boundary contour.
  for (const auto& q : plasma_quadrature(m, s)) {
    CHECK(q.psibar <= 1.0 + 1e-9);
    CHECK(in_plasma(s, q.triangle, q.p, q.psibar));
  }
  const Contour& bnd = s.boundary_contour;
  REQUIRE_FALSE(bnd.empty());
  CHECK(inside_polygon(bnd.points, s.axis.position));
  CHECK(std::abs(signed_area(bnd.points) - plasma_area(m, s)) < 1e-9 * plasma_area(m, s));
  // Inner level lines nest inside the separatrix.
  const Contour inner = extract_contour(m, s.psibar, 0.6, s.axis.position, s.boundary.x_point);
  for (const auto& p : inner.points) CHECK(inside_polygon(bnd.points, p));
}
