#include "delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gsrecon::detail {

namespace {

struct Tri {
  std::array<int, 3> v;
  std::array<int, 3> nb;  // neighbour across edge opposite v[i]
  bool alive;
};

/// > 0 when d lies strictly inside the circumcircle of ccw (a, b, c).
double incircle(const Point& a, const Point& b, const Point& c, const Point& d) {
  const double adx = a.x() - d.x(), ady = a.y() - d.y();
  const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
  const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
  const double ad = adx * adx + ady * ady;
  const double bd = bdx * bdx + bdy * bdy;
  const double cd = cdx * cdx + cdy * cdy;
  return ad * (bdx * cdy - cdx * bdy) + bd * (cdx * ady - adx * cdy) + cd * (adx * bdy - bdx * ady);
}

std::uint32_t hilbert_index(std::uint32_t n, std::uint32_t x, std::uint32_t y) {
  std::uint32_t d = 0;
  for (std::uint32_t s = n / 2; s > 0; s /= 2) {
    const std::uint32_t rx = (x & s) > 0;
    const std::uint32_t ry = (y & s) > 0;
    d += s * s * ((3 * rx) ^ ry);
    if (ry == 0) {
      if (rx == 1) {
        x = s - 1 - x;
        y = s - 1 - y;
      }
      std::swap(x, y);
    }
  }
  return d;
}

}  // namespace

std::vector<Triangle> delaunay_triangulate(std::span<const Point> input) {
  const int n = static_cast<int>(input.size());
  if (n < 3) return {};
  std::vector<Point> pts(input.begin(), input.end());
  Point lo = pts[0], hi = pts[0];
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Point mid = 0.5 * (lo + hi);
  const double span = std::max((hi - lo).maxCoeff(), 1e-12);
  const double big = 20.0 * span;
  pts.emplace_back(mid.x() - big, mid.y() - big);
  pts.emplace_back(mid.x() + big, mid.y() - big);
  pts.emplace_back(mid.x(), mid.y() + big);

  std::vector<Tri> tris;
  tris.reserve(static_cast<std::size_t>(8 * n));
  tris.push_back({{n, n + 1, n + 2}, {-1, -1, -1}, true});

  // Spatially coherent insertion order keeps the walks short.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  {
    constexpr std::uint32_t kGrid = 1u << 16;
    std::vector<std::uint32_t> key(n);
    for (int i = 0; i < n; ++i) {
      const auto gx = static_cast<std::uint32_t>((pts[i].x() - lo.x()) / span * (kGrid - 1));
      const auto gy = static_cast<std::uint32_t>((pts[i].y() - lo.y()) / span * (kGrid - 1));
      key[i] = hilbert_index(kGrid, gx, gy);
    }
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return key[a] < key[b]; });
  }

  std::vector<int> cavity, stack, mark(tris.capacity(), 0);
  int stamp = 0;
  int last = 0;
  struct BoundaryEdge {
    int a, b, outside;
  };
  std::vector<BoundaryEdge> rim;

  for (int pi : order) {
    const Point& p = pts[pi];

    // Visibility walk to the containing triangle.
    int t = last;
    if (!tris[t].alive) t = static_cast<int>(tris.size()) - 1;
    for (int steps = 0;; ++steps) {
      const Tri& tr = tris[t];
      int next = -1;
      for (int k = 0; k < 3; ++k) {
        const int i = (k + steps) % 3;
        const Point& a = pts[tr.v[(i + 1) % 3]];
        const Point& b = pts[tr.v[(i + 2) % 3]];
        if (orient2d(a, b, p) < 0.0 && tr.nb[i] >= 0) {
          next = tr.nb[i];
          break;
        }
      }
      if (next < 0) break;
      t = next;
      if (steps > 4 * n + 100) {  // fall back to a scan
        for (int s = 0; s < static_cast<int>(tris.size()); ++s) {
          if (!tris[s].alive) continue;
          const auto& v = tris[s].v;
          if (orient2d(pts[v[0]], pts[v[1]], p) >= 0 && orient2d(pts[v[1]], pts[v[2]], p) >= 0 &&
              orient2d(pts[v[2]], pts[v[0]], p) >= 0) {
            t = s;
            break;
          }
        }
        break;
      }
    }

    // Cavity of triangles whose circumcircle contains p.
    ++stamp;
    if (mark.size() < tris.size()) mark.resize(tris.size() * 2, 0);
    cavity.clear();
    stack.assign(1, t);
    mark[t] = stamp;
    while (!stack.empty()) {
      const int c = stack.back();
      stack.pop_back();
      cavity.push_back(c);
      for (int k = 0; k < 3; ++k) {
        const int nb = tris[c].nb[k];
        if (nb < 0 || mark[nb] == stamp) continue;
        const auto& v = tris[nb].v;
        if (incircle(pts[v[0]], pts[v[1]], pts[v[2]], p) > 0.0) {
          mark[nb] = stamp;
          stack.push_back(nb);
        }
      }
    }

    rim.clear();
    for (int c : cavity) {
      for (int k = 0; k < 3; ++k) {
        const int nb = tris[c].nb[k];
        if (nb >= 0 && mark[nb] == stamp) continue;
        rim.push_back({tris[c].v[(k + 1) % 3], tris[c].v[(k + 2) % 3], nb});
      }
      tris[c].alive = false;
    }

    // Fan the cavity rim around p.
    const int first_new = static_cast<int>(tris.size());
    for (const auto& e : rim) {
      const int id = static_cast<int>(tris.size());
      tris.push_back({{e.a, e.b, pi}, {-1, -1, e.outside}, true});
      if (e.outside >= 0) {
        auto& o = tris[e.outside];
        for (int k = 0; k < 3; ++k) {
          if (o.v[(k + 1) % 3] == e.b && o.v[(k + 2) % 3] == e.a) o.nb[k] = id;
        }
      }
    }
    const int count = static_cast<int>(rim.size());
    for (int i = 0; i < count; ++i) {
      Tri& ti = tris[first_new + i];
      for (int j = 0; j < count; ++j) {
        if (i == j) continue;
        const Tri& tj = tris[first_new + j];
        if (tj.v[0] == ti.v[1]) ti.nb[0] = first_new + j;  // edge (b, p)
        if (tj.v[1] == ti.v[0]) ti.nb[1] = first_new + j;  // edge (p, a)
      }
    }
    last = static_cast<int>(tris.size()) - 1;
    if (mark.size() < tris.size()) mark.resize(tris.size() * 2, 0);
  }

  std::vector<Triangle> out;
  for (const auto& t : tris) {
    if (!t.alive) continue;
    if (t.v[0] >= n || t.v[1] >= n || t.v[2] >= n) continue;
    out.push_back({t.v[0], t.v[1], t.v[2]});
  }
  return out;
}

}  // namespace gsrecon::detail
