#include "gsrecon/equil_out.hpp"

#include <cmath>

namespace gsrecon {

namespace {

ProfileSet with_flux(ProfileSet ps, const FluxState& flux) {
  ps.psi_axis = flux.psi_axis();
  ps.psi_b = flux.psi_b();
  return ps;
}

}  // namespace

double current_density(const Mesh& mesh, const FluxState& flux, const ProfileSet& ps, const Point& p) {
  const auto loc = mesh.locate(p);
  if (!loc) return 0.0;
  const auto& tri = mesh.triangle(loc->triangle);
  const Eigen::Vector3d& b = loc->barycentric;
  const double x = b[0] * flux.psibar[tri[0]] + b[1] * flux.psibar[tri[1]] + b[2] * flux.psibar[tri[2]];
  if (!in_plasma(flux, loc->triangle, p, x)) return 0.0;
  const double xc = std::clamp(x, 0.0, 1.0);
  return (p.x() / ps.R0) * ps.A(xc) + (ps.R0 / p.x()) * ps.B(xc);
}

double safety_factor_on(const Mesh& mesh, const FluxState& flux, const Contour& contour, double f) {
  const std::size_t n = contour.points.size();
  double integral = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const int t = contour.segment_triangles[i];
    if (t < 0) continue;
    const Point& a = contour.points[i];
    const Point& b = contour.points[(i + 1) % n];
    const double g = triangle_gradient(mesh, flux.psi, t).norm();
    if (g == 0.0) continue;
    integral += (b - a).norm() / (0.5 * (a.x() + b.x()) * g);
  }
  return std::abs(f) * integral / (2.0 * M_PI);
}

std::vector<double> q_profile(const Mesh& mesh, const FluxState& flux, const ProfileSet& ps_in,
                              const std::vector<double>& levels) {
  const ProfileSet ps = with_flux(ps_in, flux);
  std::vector<double> q;
  q.reserve(levels.size());
  for (double level : levels) {
    if (!(level > 0.0 && level <= 1.0)) throw config_error("q levels must lie in (0, 1]");
    if (level == 1.0) {
      if (flux.boundary_contour.empty()) throw topology_error("no boundary contour for q at the edge");
      q.push_back(safety_factor_on(mesh, flux, flux.boundary_contour, ps.f(1.0)));
      continue;
    }
    const Contour c = extract_contour(mesh, flux.psibar, level, flux.axis.position, flux.boundary.x_point);
    q.push_back(safety_factor_on(mesh, flux, c, ps.f(level)));
  }
  return q;
}

double q_on_axis(const Mesh& mesh, const FluxState& flux, const ProfileSet& ps, double first_level,
                 double second_level) {
  const auto q = q_profile(mesh, flux, ps, {first_level, second_level});
  return q[0] - first_level * (q[1] - q[0]) / (second_level - first_level);
}

DerivedScalars global_scalars(const Mesh& mesh, const FluxState& flux, const ProfileSet& ps_in) {
  const ProfileSet ps = with_flux(ps_in, flux);
  DerivedScalars s;
  double rdA = 0.0, p_rdA = 0.0, bp2_rdA = 0.0;
  int last_t = -1;
  double grad2 = 0.0;
  for (const auto& q : plasma_quadrature(mesh, flux)) {
    const double x = std::clamp(q.psibar, 0.0, 1.0);
    const double r = q.p.x();
    if (q.triangle != last_t) {
      grad2 = triangle_gradient(mesh, flux.psi, q.triangle).squaredNorm();
      last_t = q.triangle;
    }
    s.area += q.weight;
    s.Ip += q.weight * ((r / ps.R0) * ps.A(x) + (ps.R0 / r) * ps.B(x));
    rdA += q.weight * r;
    p_rdA += q.weight * r * ps.pressure(x);
    bp2_rdA += q.weight * grad2 / r;
  }
  if (rdA <= 0.0) throw topology_error("empty plasma region");
  s.volume = 2.0 * M_PI * rdA;

  const Polyline& c = flux.boundary_contour.points;
  if (c.size() < 3) throw topology_error("no boundary contour");
  s.perimeter = closed_length(c);
  const double bpa = kMu0 * s.Ip / s.perimeter;
  s.beta_p = 2.0 * kMu0 * (p_rdA / rdA) / (bpa * bpa);
  s.l_i = (bp2_rdA / rdA) / (bpa * bpa);
  s.beta_p_plus_li_over_2 = s.beta_p + 0.5 * s.l_i;

  double rmin = c[0].x(), rmax = c[0].x();
  Point top = c[0], bottom = c[0];
  for (const auto& p : c) {
    rmin = std::min(rmin, p.x());
    rmax = std::max(rmax, p.x());
    if (p.y() > top.y()) top = p;
    if (p.y() < bottom.y()) bottom = p;
  }
  const double rgeo = 0.5 * (rmin + rmax), a = 0.5 * (rmax - rmin);
  s.R_axis = flux.axis.position.x();
  s.Z_axis = flux.axis.position.y();
  s.shafranov_shift = s.R_axis - rgeo;
  s.triangularity_upper = (rgeo - top.x()) / a;
  s.triangularity_lower = (rgeo - bottom.x()) / a;
  s.elongation = (top.y() - bottom.y()) / (rmax - rmin);
  if (flux.boundary.x_point) {
    s.R_x = flux.boundary.x_point->x();
    s.Z_x = flux.boundary.x_point->y();
  }
  s.q_axis = q_on_axis(mesh, flux, ps);
  s.q95 = q_profile(mesh, flux, ps, {0.95})[0];
  s.psi_axis = flux.psi_axis();
  s.psi_b = flux.psi_b();
  s.boundary_kind = to_string(flux.boundary.kind);
  return s;
}

ProfileTable profile_table(const Mesh& mesh, const FluxState& flux, const ProfileSet& ps_in, int points) {
  if (points < 2) throw config_error("profile table needs at least two points");
  const ProfileSet ps = with_flux(ps_in, flux);
  ProfileTable t;
  std::vector<double> levels;
  for (int i = 0; i < points; ++i) {
    const double x = static_cast<double>(i) / (points - 1);
    t.x.push_back(x);
    t.A.push_back(ps.A(x));
    t.B.push_back(ps.B(x));
    t.ne.push_back(ps.ne(x));
    t.p.push_back(ps.pressure(x));
    t.f2.push_back(ps.f_squared(x));
    t.f.push_back(ps.f(x));
    if (i > 0) levels.push_back(x);
  }
  t.q = q_profile(mesh, flux, ps, levels);
  t.q.insert(t.q.begin(), q_on_axis(mesh, flux, ps));
  return t;
}

}  // namespace gsrecon
