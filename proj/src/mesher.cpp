#include "delaunay.hpp"
#include "gsrecon/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace gsrecon {

namespace {

bool segments_cross(const Point& a, const Point& b, const Point& c, const Point& d) {
  const double d1 = orient2d(a, b, c), d2 = orient2d(a, b, d);
  const double d3 = orient2d(c, d, a), d4 = orient2d(c, d, b);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

Polyline clean_contour(const Polyline& contour) {
  Polyline c;
  for (const auto& p : contour) {
    if (!c.empty() && (p - c.back()).norm() < 1e-12) continue;
    c.push_back(p);
  }
  if (c.size() > 1 && (c.front() - c.back()).norm() < 1e-12) c.pop_back();
  if (c.size() < 3) throw geometry_error("degenerate contour: fewer than three distinct points");
  for (const auto& p : c)
    if (!(p.x() > 0.0)) throw geometry_error("contour point with r <= 0");
  const double area = signed_area(c);
  if (std::abs(area) < 1e-14) throw geometry_error("degenerate contour: zero enclosed area");
  const std::size_t n = c.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if (segments_cross(c[i], c[(i + 1) % n], c[j], c[(j + 1) % n]))
        throw geometry_error("degenerate contour: self-intersecting");
    }
  if (area < 0.0) std::reverse(c.begin(), c.end());
  return c;
}

/// Resamples the contour at spacing close to h. Vertices with a turning
/// angle above 30 degrees are kept as corners.
Polyline resample_boundary(const Polyline& c, double h) {
  const std::size_t n = c.size();
  std::vector<std::size_t> corners;
  for (std::size_t i = 0; i < n; ++i) {
    const Point e1 = (c[i] - c[(i + n - 1) % n]).normalized();
    const Point e2 = (c[(i + 1) % n] - c[i]).normalized();
    const double turn = std::acos(std::clamp(e1.dot(e2), -1.0, 1.0));
    if (turn > std::numbers::pi / 6.0) corners.push_back(i);
  }
  if (corners.empty()) corners.push_back(0);

  Polyline out;
  for (std::size_t k = 0; k < corners.size(); ++k) {
    const std::size_t i0 = corners[k];
    const std::size_t i1 = corners[(k + 1) % corners.size()];
    // Vertices of this stretch, from corner i0 up to (and including) i1.
    Polyline stretch{c[i0]};
    std::size_t i = i0;
    do {
      i = (i + 1) % n;
      stretch.push_back(c[i]);
    } while (i != i1);
    std::vector<double> s(stretch.size(), 0.0);
    for (std::size_t j = 1; j < stretch.size(); ++j) s[j] = s[j - 1] + (stretch[j] - stretch[j - 1]).norm();
    const double len = s.back();
    const int pieces = std::max(1, static_cast<int>(std::ceil(len / h - 1e-9)));
    std::size_t seg = 0;
    for (int q = 0; q < pieces; ++q) {
      const double target = len * q / pieces;
      while (seg + 1 < s.size() - 1 && s[seg + 1] <= target) ++seg;
      const double t = (s[seg + 1] > s[seg]) ? (target - s[seg]) / (s[seg + 1] - s[seg]) : 0.0;
      out.push_back(stretch[seg] + t * (stretch[seg + 1] - stretch[seg]));
    }
  }
  return out;
}

double distance_to_polygon(const Polyline& poly, const Point& p) {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poly.size(); ++i)
    d = std::min(d, distance_to_segment(p, poly[i], poly[(i + 1) % poly.size()]));
  return d;
}

struct Triangulation {
  std::vector<Triangle> triangles;
  std::vector<std::size_t> missing;  // boundary segments not recovered
};

Triangulation triangulate_domain(const std::vector<Point>& pts, std::size_t nb) {
  Polyline boundary(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(nb));
  Triangulation tr;
  for (const auto& t : detail::delaunay_triangulate(pts)) {
    const Point c = (pts[t[0]] + pts[t[1]] + pts[t[2]]) / 3.0;
    if (inside_polygon(boundary, c)) tr.triangles.push_back(t);
  }
  std::set<std::pair<int, int>> edges;
  for (const auto& t : tr.triangles)
    for (int i = 0; i < 3; ++i) edges.insert(std::minmax(t[i], t[(i + 1) % 3]));
  for (std::size_t k = 0; k < nb; ++k) {
    const int a = static_cast<int>(k), b = static_cast<int>((k + 1) % nb);
    if (!edges.count(std::minmax(a, b))) tr.missing.push_back(k);
  }
  return tr;
}

}  // namespace

Mesh generate_vessel_mesh(const Polyline& contour, double target_h) {
  if (!(target_h > 0.0)) throw geometry_error("target_h must be positive");
  const Polyline c = clean_contour(contour);
  Polyline boundary = resample_boundary(c, target_h);

  // Interior lattice, kept clear of the boundary.
  Point lo = c[0], hi = c[0];
  for (const auto& p : c) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  std::vector<Point> interior;
  const double dy = target_h * std::sqrt(3.0) / 2.0;
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> jitter(-1e-6 * target_h, 1e-6 * target_h);
  // Lattice centred on the bounding box so symmetric contours mesh symmetrically.
  const Point mid = 0.5 * (lo + hi);
  const int rows = static_cast<int>(std::ceil(0.5 * (hi.y() - lo.y()) / dy));
  const int cols = static_cast<int>(std::ceil(0.5 * (hi.x() - lo.x()) / target_h)) + 1;
  for (int j = -rows; j <= rows; ++j) {
    const double z = mid.y() + j * dy;
    const double shift = (j % 2) ? 0.5 * target_h : 0.0;
    for (int i = -cols; i <= cols; ++i) {
      const Point p(mid.x() + shift + i * target_h, z);
      if (!inside_polygon(boundary, p)) continue;
      if (distance_to_polygon(boundary, p) < 0.55 * target_h) continue;
      interior.push_back(p + Point(jitter(rng), jitter(rng)));
    }
  }

  std::vector<Point> pts;
  Triangulation tr;
  for (int attempt = 0;; ++attempt) {
    pts = boundary;
    pts.insert(pts.end(), interior.begin(), interior.end());
    tr = triangulate_domain(pts, boundary.size());
    if (tr.missing.empty()) break;
    if (attempt > 8) throw geometry_error("mesher could not recover the boundary");
    // Split unrecovered boundary segments and drop lattice points that crowd them.
    Polyline refined;
    for (std::size_t k = 0; k < boundary.size(); ++k) {
      refined.push_back(boundary[k]);
      if (std::binary_search(tr.missing.begin(), tr.missing.end(), k))
        refined.push_back(0.5 * (boundary[k] + boundary[(k + 1) % boundary.size()]));
    }
    boundary = std::move(refined);
    std::erase_if(interior, [&](const Point& p) { return distance_to_polygon(boundary, p) < 0.45 * target_h; });
  }

  // Laplacian smoothing of interior nodes, then re-triangulate.
  const std::size_t nb = boundary.size();
  for (int pass = 0; pass < 3; ++pass) {
    std::vector<std::vector<int>> nbrs(pts.size());
    for (const auto& t : tr.triangles)
      for (int i = 0; i < 3; ++i) {
        nbrs[t[i]].push_back(t[(i + 1) % 3]);
        nbrs[t[i]].push_back(t[(i + 2) % 3]);
      }
    std::vector<Point> moved = pts;
    for (std::size_t v = nb; v < pts.size(); ++v) {
      if (nbrs[v].empty()) continue;
      Point avg = Point::Zero();
      for (int w : nbrs[v]) avg += pts[w];
      moved[v] = avg / static_cast<double>(nbrs[v].size());
    }
    bool inverted = false;
    for (const auto& t : tr.triangles)
      if (orient2d(moved[t[0]], moved[t[1]], moved[t[2]]) <= 0.0) inverted = true;
    if (inverted) break;
    Triangulation next = triangulate_domain(moved, nb);
    if (!next.missing.empty()) break;
    pts = std::move(moved);
    tr = std::move(next);
  }

  std::vector<int> bnd(nb);
  for (std::size_t k = 0; k < nb; ++k) bnd[k] = static_cast<int>(k);
  // Drop nodes that ended up outside every kept triangle (cannot happen for
  // interior lattice points, but keep the mesh valid regardless).
  std::vector<int> used(pts.size(), 0);
  for (const auto& t : tr.triangles)
    for (int v : t) used[v] = 1;
  std::vector<int> remap(pts.size(), -1);
  std::vector<Point> nodes;
  for (std::size_t v = 0; v < pts.size(); ++v) {
    if (!used[v] && v >= nb) continue;
    remap[v] = static_cast<int>(nodes.size());
    nodes.push_back(pts[v]);
  }
  for (auto& t : tr.triangles)
    for (int& v : t) v = remap[v];
  return Mesh(std::move(nodes), std::move(tr.triangles), std::move(bnd));
}

}  // namespace gsrecon
