#include "gsrecon/cases.hpp"

#include <cmath>

namespace gsrecon {

double loop_flux(double rc, double zc, double current, const Point& p) {
  const double r = p.x(), dz = p.y() - zc;
  const double k2 = 4.0 * rc * r / ((r + rc) * (r + rc) + dz * dz);
  if (k2 >= 1.0) throw geometry_error("flux evaluated on a filament");
  const double k = std::sqrt(k2);
  const double K = std::comp_ellint_1(k), E = std::comp_ellint_2(k);
  return (kMu0 * current / M_PI) * std::sqrt(rc * r) / k * ((1.0 - 0.5 * k2) * K - E);
}

double l2_error(const Mesh& mesh, const Eigen::VectorXd& psi_h, const std::function<double(const Point&)>& exact) {
  constexpr double a = 2.0 / 3.0, b = 1.0 / 6.0;
  const std::array<Eigen::Vector3d, 3> pts = {Eigen::Vector3d(a, b, b), Eigen::Vector3d(b, a, b),
                                              Eigen::Vector3d(b, b, a)};
  double sum = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    for (const auto& l : pts) {
      const Point p = l[0] * mesh.node(tri[0]) + l[1] * mesh.node(tri[1]) + l[2] * mesh.node(tri[2]);
      const double v = l[0] * psi_h[tri[0]] + l[1] * psi_h[tri[1]] + l[2] * psi_h[tri[2]];
      const double e = v - exact(p);
      sum += mesh.area(t) / 3.0 * e * e;
    }
  }
  return std::sqrt(sum);
}

double Soloviev::psi(const Point& p) const {
  const double x = p.x() * p.x() - R0 * R0;
  return psi_axis - (kMu0 * A / (8.0 * R0)) * x * x - 0.5 * kMu0 * R0 * B * p.y() * p.y();
}

Eigen::Vector2d Soloviev::gradient(const Point& p) const {
  const double x = p.x() * p.x() - R0 * R0;
  return {-(kMu0 * A / (2.0 * R0)) * x * p.x(), -kMu0 * R0 * B * p.y()};
}

Polyline Soloviev::boundary(int points) const {
  const double xm = std::sqrt(psi_axis * 8.0 * R0 / (kMu0 * A));
  const double zm = std::sqrt(psi_axis * 2.0 / (kMu0 * R0 * B));
  if (xm >= R0 * R0) throw config_error("Soloviev parameters give a boundary crossing r = 0");
  Polyline c;
  for (int i = 0; i < points; ++i) {
    const double t = 2.0 * M_PI * i / points;
    c.emplace_back(std::sqrt(R0 * R0 + xm * std::cos(t)), zm * std::sin(t));
  }
  return c;
}

Mesh Soloviev::mesh(double target_h) const { return generate_vessel_mesh(boundary(), target_h); }

Eigen::VectorXd Soloviev::boundary_values(const Mesh& m) const {
  Eigen::VectorXd h(m.num_boundary());
  for (int k = 0; k < m.num_boundary(); ++k) h[k] = psi(m.node(m.boundary_nodes()[k]));
  return h;
}

ProfileSet Soloviev::profiles(const ProfileBasis& basis, double n0) const {
  ProfileSet ps{basis, Eigen::VectorXd::Zero(basis.total()), R0, f0, psi_axis, 0.0};
  ps.u.segment(basis.offset(ProfileBlock::A), basis.count(ProfileBlock::A)) =
      basis.affine_coefficients(ProfileBlock::A, A, 0.0);
  ps.u.segment(basis.offset(ProfileBlock::B), basis.count(ProfileBlock::B)) =
      basis.affine_coefficients(ProfileBlock::B, B, 0.0);
  ps.u.segment(basis.offset(ProfileBlock::Ne), basis.count(ProfileBlock::Ne)) =
      basis.affine_coefficients(ProfileBlock::Ne, n0, -n0);
  return ps;
}

ProfileShape parse_profile_shape(const std::string& s) {
  if (s == "monotonic") return ProfileShape::Monotonic;
  if (s == "reversed-shear" || s == "reversed_shear") return ProfileShape::ReversedShear;
  throw config_error("unknown profile '" + s + "' (expected monotonic or reversed-shear)");
}

const char* to_string(ProfileShape s) { return s == ProfileShape::Monotonic ? "monotonic" : "reversed-shear"; }

namespace {

Eigen::VectorXd fit_block(const BSplineBasisd& basis, const std::function<double(double)>& fn) {
  constexpr int kSamples = 201;
  Eigen::MatrixXd M(kSamples, basis.size());
  Eigen::VectorXd y(kSamples);
  for (int i = 0; i < kSamples; ++i) {
    const double x = static_cast<double>(i) / (kSamples - 1);
    M.row(i) = basis.evaluate(x).transpose();
    y[i] = fn(x);
  }
  return M.colPivHouseholderQr().solve(y);
}

}  // namespace

ProfileSet make_profiles(ProfileShape shape, const ProfileBasis& basis, double R0, double f0, double n0) {
  ProfileSet ps{basis, Eigen::VectorXd::Zero(basis.total()), R0, f0, 1.0, 0.0};
  auto set = [&](ProfileBlock b, const Eigen::VectorXd& c) { ps.u.segment(basis.offset(b), basis.count(b)) = c; };
  if (shape == ProfileShape::Monotonic) {
    set(ProfileBlock::A, basis.affine_coefficients(ProfileBlock::A, 1.0, -1.0));
    set(ProfileBlock::B, basis.affine_coefficients(ProfileBlock::B, 1.5, -1.5));
  } else {
    set(ProfileBlock::A, basis.affine_coefficients(ProfileBlock::A, 0.5, -0.5));
    set(ProfileBlock::B, fit_block(basis.block(ProfileBlock::B),
                                   [](double x) { return 0.15 + 4.5 * x * (1.0 - x) * (1.0 - x); }));
  }
  set(ProfileBlock::Ne, basis.affine_coefficients(ProfileBlock::Ne, n0, -0.7 * n0));
  return ps;
}

MeasurementSet default_diagnostics(const Mesh& mesh, const Point& axis_guess, int probes, int chords_per_direction,
                                   int mse_points) {
  MeasurementSet m;
  m.h = Eigen::VectorXd::Zero(mesh.num_boundary());
  const int nb = mesh.num_boundary();
  probes = std::min(probes, nb);
  for (int i = 0; i < probes; ++i) {
    const int k = static_cast<int>(static_cast<long>(i) * nb / probes);
    m.probes.push_back({mesh.node(mesh.boundary_nodes()[k]), mesh.boundary_normals()[k], 0.0});
  }

  Point lo = mesh.node(0), hi = mesh.node(0);
  for (const auto& p : mesh.nodes()) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Point span = hi - lo;
  const double margin = 0.05 * span.maxCoeff();
  for (int i = 0; i < chords_per_direction; ++i) {
    const double f = 0.2 + 0.6 * i / std::max(1, chords_per_direction - 1);
    const double r = lo.x() + f * span.x();
    m.chords.push_back({{Point(r, lo.y() - margin), Point(r, hi.y() + margin)}, 0.0, 0.0});
  }
  for (int i = 0; i < chords_per_direction; ++i) {
    const double f = 0.3 + 0.45 * i / std::max(1, chords_per_direction - 1);
    const double z = lo.y() + f * span.y();
    m.chords.push_back({{Point(std::max(0.5 * lo.x(), lo.x() - margin), z), Point(hi.x() + margin, z)}, 0.0, 0.0});
  }
  for (int i = 0; i < mse_points; ++i) {
    const double f = 0.25 + 0.65 * i / std::max(1, mse_points - 1);
    MsePoint p;
    p.position = Point(lo.x() + f * span.x(), axis_guess.y());
    p.a = {0.0, 1.0, 0.0, 0.0, 0.0, 1.0};
    if (mesh.locate(p.position)) m.mse.push_back(p);
  }
  return m;
}

Polyline ReferenceMachine::vessel(int points) const {
  Polyline c;
  for (int i = 0; i < points; ++i) {
    const double t = 2.0 * M_PI * i / points;
    c.emplace_back(R0 + 1.25 * std::cos(t + 0.35 * std::sin(t)), 2.06 * std::sin(t));
  }
  return c;
}

Mesh ReferenceMachine::mesh(double target_h) const { return generate_vessel_mesh(vessel(), target_h); }

Eigen::VectorXd ReferenceMachine::boundary_flux(const Mesh& m) const {
  Eigen::VectorXd h = Eigen::VectorXd::Zero(m.num_boundary());
  for (int k = 0; k < m.num_boundary(); ++k) {
    const Point& p = m.node(m.boundary_nodes()[k]);
    h[k] = 0.5 * vertical_field * p.x() * p.x();
    for (const auto& c : coils) h[k] += loop_flux(c.r, c.z, c.current, p);
  }
  return h;
}

SyntheticCase reference_case(std::shared_ptr<const Mesh> mesh, ProfileShape shape, double a_scale,
                             const ProfileBasis& basis) {
  const ReferenceMachine machine;
  SyntheticCase sc;
  sc.mesh = std::move(mesh);
  sc.op = assemble_stiffness(*sc.mesh);
  ProfileSet truth = make_profiles(shape, basis, machine.R0, machine.f0);
  truth.u.segment(basis.offset(ProfileBlock::A), basis.count(ProfileBlock::A)) *= a_scale;
  const Eigen::VectorXd h = machine.boundary_flux(*sc.mesh);
  ForwardCase fc = solve_forward_profiles(*sc.mesh, sc.op, truth, h, machine.Ip);
  sc.flux = std::move(fc.forward.flux);
  sc.truth = std::move(fc.truth);
  const MeasurementSet geometry = default_diagnostics(*sc.mesh, sc.flux.axis.position);
  sc.measurements = export_case(*sc.mesh, sc.flux, sc.truth, geometry);
  return sc;
}

SyntheticCase soloviev_case(const Soloviev& s, double target_h, const ProfileBasis& basis) {
  SyntheticCase sc;
  sc.mesh = std::make_shared<const Mesh>(s.mesh(target_h));
  sc.op = assemble_stiffness(*sc.mesh);
  const ProfileSet truth = s.profiles(basis);
  ForwardCase fc = solve_forward_profiles(*sc.mesh, sc.op, truth, s.boundary_values(*sc.mesh), std::nullopt);
  sc.flux = std::move(fc.forward.flux);
  sc.truth = std::move(fc.truth);
  const MeasurementSet geometry = default_diagnostics(*sc.mesh, sc.flux.axis.position);
  sc.measurements = export_case(*sc.mesh, sc.flux, sc.truth, geometry);
  return sc;
}

}  // namespace gsrecon
