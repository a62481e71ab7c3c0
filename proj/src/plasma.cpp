#include "gsrecon/plasma.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>

namespace gsrecon {

const char* to_string(BoundaryKind kind) { return kind == BoundaryKind::XPoint ? "x-point" : "limiter"; }

namespace {

struct QuadraticFit {
  bool ok = false;
  Point stationary = Point::Zero();
  double value = 0.0;
  Eigen::Matrix2d hessian = Eigen::Matrix2d::Zero();
};

std::vector<int> two_ring(const Mesh& mesh, int node) {
  std::vector<int> patch{node};
  for (int w : mesh.ring(node)) patch.push_back(w);
  const std::size_t first = patch.size();
  for (std::size_t i = 1; i < first; ++i)
    for (int w : mesh.ring(patch[i])) patch.push_back(w);
  std::sort(patch.begin() + 1, patch.end());
  patch.erase(std::unique(patch.begin() + 1, patch.end()), patch.end());
  std::erase(patch, node);
  patch.insert(patch.begin(), node);
  return patch;
}

/// Least-squares quadratic through the two-ring patch of `node`, in
/// coordinates centred on the node and scaled by the mesh size.
QuadraticFit fit_quadratic(const Mesh& mesh, const Eigen::VectorXd& psi, int node) {
  const auto patch = two_ring(mesh, node);
  QuadraticFit fit;
  if (patch.size() < 6) return fit;
  const Point c = mesh.node(node);
  const double h = mesh.mean_edge();
  Eigen::MatrixXd M(patch.size(), 6);
  Eigen::VectorXd rhs(patch.size());
  for (std::size_t k = 0; k < patch.size(); ++k) {
    const Point d = (mesh.node(patch[k]) - c) / h;
    M.row(k) << 1.0, d.x(), d.y(), d.x() * d.x(), d.x() * d.y(), d.y() * d.y();
    rhs[k] = psi[patch[k]];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
  if (qr.rank() < 6) return fit;
  const Eigen::Matrix<double, 6, 1> a = qr.solve(rhs);
  Eigen::Matrix2d H;
  H << 2.0 * a[3], a[4], a[4], 2.0 * a[5];
  const Eigen::Vector2d g(a[1], a[2]);
  if (std::abs(H.determinant()) < 1e-300) return fit;
  const Eigen::Vector2d x = -H.partialPivLu().solve(g);
  fit.ok = true;
  fit.stationary = c + h * x;
  fit.value = a[0] + g.dot(x) + 0.5 * x.dot(H * x);
  fit.hessian = H / (h * h);
  return fit;
}

double half_plane(const Point& p, const Point& x_point, const Point& axis) { return (p - x_point).dot(axis - x_point); }

/// Sutherland-Hodgman clip of a convex polygon against value >= 0 where the
/// value is affine and given at the polygon vertices.
void clip_polygon(Polyline& poly, std::vector<double>& vals) {
  Polyline out;
  std::vector<double> out_vals;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    const bool in_i = vals[i] >= 0.0, in_j = vals[j] >= 0.0;
    if (in_i) {
      out.push_back(poly[i]);
      out_vals.push_back(vals[i]);
    }
    if (in_i != in_j) {
      const double t = vals[i] / (vals[i] - vals[j]);
      out.push_back(poly[i] + t * (poly[j] - poly[i]));
      out_vals.push_back(0.0);
    }
  }
  poly = std::move(out);
  vals = std::move(out_vals);
}

// Degree-2 triangle rule: barycentric points (2/3, 1/6, 1/6) and permutations.
constexpr double kQa = 2.0 / 3.0, kQb = 1.0 / 6.0;

}  // namespace

AxisInfo find_axis(const Mesh& mesh, const Eigen::VectorXd& psi) {
  int best = -1;
  for (int v : mesh.interior_nodes()) {
    const double pv = psi[v];
    bool is_max = true;
    bool strict = false;
    for (int w : mesh.ring(v)) {
      if (psi[w] > pv) {
        is_max = false;
        break;
      }
      if (psi[w] < pv) strict = true;
    }
    if (is_max && strict && (best < 0 || pv > psi[best])) best = v;
  }
  if (best < 0) throw topology_error("flux has no interior maximum (no plasma)");
  AxisInfo axis{mesh.node(best), psi[best], best};
  const auto fit = fit_quadratic(mesh, psi, best);
  if (fit.ok && fit.hessian(0, 0) < 0.0 && fit.hessian.determinant() > 0.0) {
    double reach = 0.0;
    for (int w : mesh.ring(best)) reach = std::max(reach, (mesh.node(w) - mesh.node(best)).norm());
    if ((fit.stationary - mesh.node(best)).norm() <= reach && mesh.locate(fit.stationary)) {
      axis.position = fit.stationary;
      axis.psi = std::max(fit.value, psi[best]);
    }
  }
  return axis;
}

BoundaryFlux find_boundary_flux(const Mesh& mesh, const Eigen::VectorXd& psi, const AxisInfo& axis) {
  double wall_min = std::numeric_limits<double>::infinity();
  double wall_max = -std::numeric_limits<double>::infinity();
  for (int v : mesh.boundary_nodes()) {
    wall_min = std::min(wall_min, psi[v]);
    wall_max = std::max(wall_max, psi[v]);
  }

  struct Saddle {
    Point position;
    double psi;
  };
  std::vector<Saddle> saddles;
  const double h = mesh.mean_edge();
  for (int v : mesh.interior_nodes()) {
    if (v == axis.node) continue;
    const auto ring = mesh.ring(v);
    int changes = 0;
    const std::size_t n = ring.size();
    for (std::size_t k = 0; k < n; ++k) {
      const bool a = psi[ring[k]] >= psi[v];
      const bool b = psi[ring[(k + 1) % n]] >= psi[v];
      if (a != b) ++changes;
    }
    if (changes < 4) continue;
    const auto fit = fit_quadratic(mesh, psi, v);
    if (!fit.ok || fit.hessian.determinant() >= 0.0) continue;
    if ((fit.stationary - mesh.node(v)).norm() > 2.0 * h) continue;
    if (!mesh.locate(fit.stationary)) continue;
    if (!(fit.value > wall_min && fit.value < axis.psi)) continue;
    bool merged = false;
    for (auto& s : saddles) {
      if ((s.position - fit.stationary).norm() < 2.0 * h) {
        if (fit.value > s.psi) s = {fit.stationary, fit.value};
        merged = true;
        break;
      }
    }
    if (!merged) saddles.push_back({fit.stationary, fit.value});
  }

  BoundaryFlux out;
  if (saddles.empty()) {
    out.kind = BoundaryKind::Limiter;
    out.psi_b = wall_max;
    return out;
  }
  std::sort(saddles.begin(), saddles.end(), [](const Saddle& a, const Saddle& b) { return a.psi > b.psi; });
  out.kind = BoundaryKind::XPoint;
  out.psi_b = saddles[0].psi;
  out.x_point = saddles[0].position;
  if (saddles.size() > 1 && std::abs(saddles[0].psi - saddles[1].psi) < 1e-2 * std::abs(axis.psi - saddles[0].psi))
    out.tie_break = true;
  return out;
}

Eigen::VectorXd normalize_flux(const Eigen::VectorXd& psi, double psi_axis, double psi_b) {
  const double span = psi_b - psi_axis;
  if (span == 0.0 || !std::isfinite(span)) throw topology_error("degenerate flux normalization: psi_axis == psi_b");
  return (psi.array() - psi_axis) / span;
}

void compute_plasma_region(const Mesh& mesh, const Eigen::VectorXd& psibar, const Point& axis,
                           const std::optional<Point>& x_point, std::vector<double>& mask,
                           std::vector<Polyline>& cut_cells) {
  const int nt = mesh.num_triangles();
  mask.assign(nt, 0.0);
  cut_cells.assign(nt, {});
  for (int t = 0; t < nt; ++t) {
    const auto& tri = mesh.triangle(t);
    Polyline poly{mesh.node(tri[0]), mesh.node(tri[1]), mesh.node(tri[2])};
    std::vector<double> g{1.0 - psibar[tri[0]], 1.0 - psibar[tri[1]], 1.0 - psibar[tri[2]]};
    bool full = g[0] >= 0.0 && g[1] >= 0.0 && g[2] >= 0.0;
    if (g[0] < 0.0 && g[1] < 0.0 && g[2] < 0.0) continue;
    if (!full) clip_polygon(poly, g);
    if (x_point) {
      std::vector<double> s(poly.size());
      bool all_in = true, all_out = true;
      for (std::size_t k = 0; k < poly.size(); ++k) {
        s[k] = half_plane(poly[k], *x_point, axis);
        all_in = all_in && s[k] >= 0.0;
        all_out = all_out && s[k] < 0.0;
      }
      if (all_out) continue;
      if (!all_in) {
        clip_polygon(poly, s);
        full = false;
      }
    }
    if (poly.size() < 3) continue;
    if (full) {
      mask[t] = 1.0;
    } else {
      const double a = signed_area(poly);
      if (a <= 0.0) continue;
      mask[t] = std::min(1.0, a / mesh.area(t));
      cut_cells[t] = std::move(poly);
    }
  }

  // Keep the component connected to the axis.
  int start = -1;
  if (auto loc = mesh.locate(axis); loc && mask[loc->triangle] > 0.0) start = loc->triangle;
  if (start < 0) {
    double best = std::numeric_limits<double>::infinity();
    for (int t = 0; t < nt; ++t) {
      if (mask[t] <= 0.0) continue;
      const double d = (mesh.centroid(t) - axis).norm();
      if (d < best) {
        best = d;
        start = t;
      }
    }
  }
  if (start < 0) return;
  std::vector<char> seen(nt, 0);
  std::vector<int> stack{start};
  seen[start] = 1;
  while (!stack.empty()) {
    const int t = stack.back();
    stack.pop_back();
    for (int nb : mesh.triangle_neighbors(t)) {
      if (nb < 0 || seen[nb] || mask[nb] <= 0.0) continue;
      seen[nb] = 1;
      stack.push_back(nb);
    }
  }
  for (int t = 0; t < nt; ++t) {
    if (!seen[t]) {
      mask[t] = 0.0;
      cut_cells[t].clear();
    }
  }
}

bool in_plasma(const FluxState& flux, int triangle, const Point& p, double psibar) {
  const double m = flux.mask[triangle];
  if (m <= 0.0) return false;
  if (flux.cut_cells[triangle].empty()) return true;
  if (psibar > 1.0) return false;
  if (flux.boundary.x_point && half_plane(p, *flux.boundary.x_point, flux.axis.position) < 0.0) return false;
  return true;
}

std::vector<PlasmaQuadPoint> plasma_quadrature(const Mesh& mesh, const FluxState& flux) {
  std::vector<PlasmaQuadPoint> pts;
  pts.reserve(3 * static_cast<std::size_t>(mesh.num_triangles()));
  auto add_triangle = [&](int t, const Point& a, const Point& b, const Point& c) {
    const double area = 0.5 * std::abs(orient2d(a, b, c));
    if (area <= 0.0) return;
    const std::array<Eigen::Vector3d, 3> w = {Eigen::Vector3d(kQa, kQb, kQb), Eigen::Vector3d(kQb, kQa, kQb),
                                              Eigen::Vector3d(kQb, kQb, kQa)};
    const auto& tri = mesh.triangle(t);
    for (const auto& l : w) {
      const Point p = l[0] * a + l[1] * b + l[2] * c;
      const Eigen::Vector3d bary = mesh.barycentric(t, p);
      const double pb = bary[0] * flux.psibar[tri[0]] + bary[1] * flux.psibar[tri[1]] + bary[2] * flux.psibar[tri[2]];
      pts.push_back({t, bary, p, area / 3.0, pb});
    }
  };
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    if (flux.mask[t] <= 0.0) continue;
    const auto& cell = flux.cut_cells[t];
    if (cell.empty()) {
      const auto& tri = mesh.triangle(t);
      add_triangle(t, mesh.node(tri[0]), mesh.node(tri[1]), mesh.node(tri[2]));
    } else {
      for (std::size_t k = 1; k + 1 < cell.size(); ++k) add_triangle(t, cell[0], cell[k], cell[k + 1]);
    }
  }
  return pts;
}

double plasma_area(const Mesh& mesh, const FluxState& flux) {
  double a = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) a += flux.mask[t] * mesh.area(t);
  return a;
}

Contour extract_contour(const Mesh& mesh, const Eigen::VectorXd& psibar, double level, const Point& axis,
                        const std::optional<Point>& x_point) {
  struct Segment {
    int a, b, tri;
  };
  std::map<std::uint64_t, int> edge_ids;
  std::vector<Point> id_points;
  std::vector<char> id_loose;
  auto edge_point = [&](int u, int v) {
    const std::uint64_t key = (static_cast<std::uint64_t>(std::min(u, v)) << 32) | static_cast<std::uint32_t>(std::max(u, v));
    auto it = edge_ids.find(key);
    if (it != edge_ids.end()) return it->second;
    const double fu = psibar[u] - level, fv = psibar[v] - level;
    const double t = fu / (fu - fv);
    const int id = static_cast<int>(id_points.size());
    // Interpolate from the lower index so both triangles get the same point.
    if (u < v)
      id_points.push_back(mesh.node(u) + t * (mesh.node(v) - mesh.node(u)));
    else
      id_points.push_back(mesh.node(v) + (1.0 - t) * (mesh.node(u) - mesh.node(v)));
    id_loose.push_back(0);
    edge_ids.emplace(key, id);
    return id;
  };

  std::vector<Segment> segs;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    std::array<bool, 3> pos;
    for (int i = 0; i < 3; ++i) pos[i] = psibar[tri[i]] - level >= 0.0;
    if (pos[0] == pos[1] && pos[1] == pos[2]) continue;
    std::array<int, 2> ends;
    int k = 0;
    for (int i = 0; i < 3; ++i) {
      const int u = tri[i], v = tri[(i + 1) % 3];
      if (pos[i] != pos[(i + 1) % 3]) ends[k++] = edge_point(u, v);
    }
    Segment s{ends[0], ends[1], t};
    if (x_point) {
      const double sa = half_plane(id_points[s.a], *x_point, axis);
      const double sb = half_plane(id_points[s.b], *x_point, axis);
      if (sa < 0.0 && sb < 0.0) continue;
      if (sa < 0.0 || sb < 0.0) {
        const Point pa = id_points[s.a], pb = id_points[s.b];
        const double tt = sa / (sa - sb);
        const int id = static_cast<int>(id_points.size());
        id_points.push_back(pa + tt * (pb - pa));
        id_loose.push_back(1);
        if (sa < 0.0)
          s.a = id;
        else
          s.b = id;
      }
    }
    segs.push_back(s);
  }

  std::vector<std::vector<int>> at(id_points.size());
  for (int i = 0; i < static_cast<int>(segs.size()); ++i) {
    at[segs[i].a].push_back(i);
    at[segs[i].b].push_back(i);
  }

  struct Chain {
    std::deque<int> ids;
    std::deque<int> tris;
    bool closed = false;
  };
  std::vector<char> used(segs.size(), 0);
  std::vector<Chain> chains;
  for (int s0 = 0; s0 < static_cast<int>(segs.size()); ++s0) {
    if (used[s0]) continue;
    used[s0] = 1;
    Chain c;
    c.ids = {segs[s0].a, segs[s0].b};
    c.tris = {segs[s0].tri};
    auto extend = [&](bool back) {
      for (;;) {
        const int end = back ? c.ids.back() : c.ids.front();
        int next = -1;
        for (int s : at[end])
          if (!used[s]) {
            next = s;
            break;
          }
        if (next < 0) return;
        used[next] = 1;
        const int other = segs[next].a == end ? segs[next].b : segs[next].a;
        if (back) {
          c.ids.push_back(other);
          c.tris.push_back(segs[next].tri);
        } else {
          c.ids.push_front(other);
          c.tris.push_front(segs[next].tri);
        }
      }
    };
    extend(true);
    if (c.ids.back() == c.ids.front()) {
      c.closed = true;
      c.ids.pop_back();
    } else {
      extend(false);
    }
    chains.push_back(std::move(c));
  }

  auto to_contour = [&](const Chain& c, bool through_x) {
    Contour out;
    for (int id : c.ids) out.points.push_back(id_points[id]);
    out.segment_triangles.assign(c.tris.begin(), c.tris.end());
    if (through_x) {
      out.points.push_back(*x_point);
      out.segment_triangles.push_back(-1);
      out.segment_triangles.push_back(-1);
    }
    // Drop zero-length segments.
    Contour clean;
    const std::size_t n = out.points.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point& p = out.points[i];
      const Point& q = out.points[(i + 1) % n];
      if ((q - p).norm() < 1e-13) continue;
      clean.points.push_back(p);
      clean.segment_triangles.push_back(out.segment_triangles[i]);
    }
    return clean;
  };

  std::optional<Contour> best;
  double best_area = std::numeric_limits<double>::infinity();
  for (const auto& c : chains) {
    Contour candidate;
    if (c.closed) {
      candidate = to_contour(c, false);
    } else if (x_point && id_loose[c.ids.front()] && id_loose[c.ids.back()]) {
      candidate = to_contour(c, true);
    } else {
      continue;
    }
    if (candidate.points.size() < 3 || !inside_polygon(candidate.points, axis)) continue;
    const double a = std::abs(signed_area(candidate.points));
    if (a < best_area) {
      best_area = a;
      best = std::move(candidate);
    }
  }
  if (!best) throw topology_error("open contour: no closed level line at " + std::to_string(level) + " encloses the axis");

  if (signed_area(best->points) < 0.0) {
    const std::size_t n = best->points.size();
    Contour r;
    r.points.assign(best->points.rbegin(), best->points.rend());
    r.segment_triangles.resize(n);
    for (std::size_t i = 0; i + 1 < n; ++i) r.segment_triangles[i] = best->segment_triangles[n - 2 - i];
    r.segment_triangles[n - 1] = best->segment_triangles[n - 1];
    best = std::move(r);
  }
  return *best;
}

namespace {

// Whether the plasma region reaches a wall node strictly inside the boundary level.
bool separatrix_touches_wall(const Mesh& mesh, const FluxState& s) {
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    if (s.mask[t] <= 0.0) continue;
    const auto& tri = mesh.triangle(t);
    for (int v : tri)
      if (mesh.is_boundary(v) && s.psibar[v] < 1.0 - 1e-9 &&
          half_plane(mesh.node(v), *s.boundary.x_point, s.axis.position) >= 0.0)
        return true;
  }
  return false;
}

}  // namespace

FluxState analyze_flux(const Mesh& mesh, Eigen::VectorXd psi) {
  if (psi.size() != mesh.num_nodes()) throw numeric_error("flux vector size does not match the mesh");
  FluxState s;
  s.psi = std::move(psi);
  s.axis = find_axis(mesh, s.psi);
  s.boundary = find_boundary_flux(mesh, s.psi, s.axis);
  if (!(s.boundary.psi_b < s.axis.psi)) throw topology_error("boundary flux is not below the axis flux (no confined plasma)");
  if (s.boundary.tie_break) s.warnings.push_back("x-point tie-break: two saddles with nearly equal flux");
  s.psibar = normalize_flux(s.psi, s.axis.psi, s.boundary.psi_b);
  compute_plasma_region(mesh, s.psibar, s.axis.position, s.boundary.x_point, s.mask, s.cut_cells);
  if (s.boundary.x_point && separatrix_touches_wall(mesh, s)) {
    double wall = -std::numeric_limits<double>::infinity();
    for (int v : mesh.boundary_nodes()) wall = std::max(wall, s.psi[v]);
    s.warnings.push_back("separatrix intersects the wall; limiter boundary used");
    s.boundary = BoundaryFlux{wall, BoundaryKind::Limiter, std::nullopt, false};
    if (!(wall < s.axis.psi)) throw topology_error("boundary flux is not below the axis flux (no confined plasma)");
    s.psibar = normalize_flux(s.psi, s.axis.psi, wall);
    compute_plasma_region(mesh, s.psibar, s.axis.position, std::nullopt, s.mask, s.cut_cells);
  }
  try {
    s.boundary_contour = extract_contour(mesh, s.psibar, 1.0, s.axis.position, s.boundary.x_point);
  } catch (const Error& e) {
    s.warnings.push_back(std::string("boundary contour: ") + e.what());
  }
  return s;
}

}  // namespace gsrecon
