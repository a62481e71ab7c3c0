#include "gsrecon/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>
#include <utility>

namespace gsrecon {

double distance_to_segment(const Point& p, const Point& a, const Point& b) {
  const Point ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

namespace {

double directed_hausdorff(const Polyline& from, const Polyline& to) {
  double worst = 0.0;
  for (const auto& p : from) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < to.size(); ++i)
      best = std::min(best, distance_to_segment(p, to[i], to[(i + 1) % to.size()]));
    worst = std::max(worst, best);
  }
  return worst;
}

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

}  // namespace

double hausdorff_distance(const Polyline& a, const Polyline& b) {
  if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
  return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

Mesh::Mesh(std::vector<Point> nodes, std::vector<Triangle> triangles, std::vector<int> boundary)
    : nodes_(std::move(nodes)), triangles_(std::move(triangles)), boundary_nodes_(std::move(boundary)) {
  const int nn = num_nodes();
  if (nn < 3 || triangles_.empty()) throw topology_error("mesh needs at least one triangle");
  for (int i = 0; i < nn; ++i) {
    if (!(nodes_[i].x() > 0.0))
      throw geometry_error("node " + std::to_string(i) + " has r <= 0");
  }

  // Orientation and element geometry.
  areas_.resize(triangles_.size());
  bary_grads_.resize(triangles_.size());
  std::vector<int> use_count(nn, 0);
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    auto& tri = triangles_[t];
    for (int v : tri) {
      if (v < 0 || v >= nn) throw parse_error("triangle " + std::to_string(t) + " has a bad node index");
      ++use_count[v];
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
      throw topology_error("triangle " + std::to_string(t) + " repeats a node");
    double a2 = orient2d(nodes_[tri[0]], nodes_[tri[1]], nodes_[tri[2]]);
    if (a2 == 0.0) throw geometry_error("triangle " + std::to_string(t) + " has zero area");
    if (a2 < 0.0) {
      std::swap(tri[1], tri[2]);
      a2 = -a2;
    }
    areas_[t] = 0.5 * a2;
    const Point& p0 = nodes_[tri[0]];
    const Point& p1 = nodes_[tri[1]];
    const Point& p2 = nodes_[tri[2]];
    // grad(lambda_i) = rot(edge opposite i) / (2 area)
    Eigen::Matrix<double, 3, 2> g;
    g.row(0) << p1.y() - p2.y(), p2.x() - p1.x();
    g.row(1) << p2.y() - p0.y(), p0.x() - p2.x();
    g.row(2) << p0.y() - p1.y(), p1.x() - p0.x();
    bary_grads_[t] = g / a2;
    total_area_ += areas_[t];
  }
  for (int i = 0; i < nn; ++i)
    if (use_count[i] == 0) throw topology_error("node " + std::to_string(i) + " belongs to no triangle");

  // Edge manifoldness and triangle adjacency.
  std::map<std::uint64_t, std::vector<std::pair<int, int>>> edges;  // key -> (tri, local vertex opposite)
  for (int t = 0; t < num_triangles(); ++t) {
    const auto& tri = triangles_[t];
    for (int i = 0; i < 3; ++i) edges[edge_key(tri[(i + 1) % 3], tri[(i + 2) % 3])].push_back({t, i});
  }
  tri_neighbors_.assign(triangles_.size(), {-1, -1, -1});
  std::map<int, std::vector<int>> boundary_adj;
  double edge_sum = 0.0;
  for (const auto& [key, uses] : edges) {
    if (uses.size() > 2) throw topology_error("non-manifold edge shared by more than two triangles");
    const int a = static_cast<int>(key >> 32);
    const int b = static_cast<int>(key & 0xffffffffu);
    const double len = (nodes_[a] - nodes_[b]).norm();
    edge_sum += len;
    max_edge_ = std::max(max_edge_, len);
    if (uses.size() == 2) {
      tri_neighbors_[uses[0].first][uses[0].second] = uses[1].first;
      tri_neighbors_[uses[1].first][uses[1].second] = uses[0].first;
    } else {
      boundary_adj[a].push_back(b);
      boundary_adj[b].push_back(a);
    }
  }
  mean_edge_ = edge_sum / static_cast<double>(edges.size());

  // The boundary edges must form one closed loop equal to the given list.
  std::size_t boundary_edge_count = 0;
  for (const auto& [v, adj] : boundary_adj) {
    if (adj.size() != 2) throw topology_error("boundary is not a simple closed loop at node " + std::to_string(v));
    boundary_edge_count += adj.size();
  }
  boundary_edge_count /= 2;
  const std::size_t nb = boundary_nodes_.size();
  if (nb < 3 || nb != boundary_adj.size() || nb != boundary_edge_count)
    throw topology_error("boundary list does not match the open edges of the triangulation (open boundary?)");
  for (std::size_t k = 0; k < nb; ++k) {
    const int a = boundary_nodes_[k];
    const int b = boundary_nodes_[(k + 1) % nb];
    if (a < 0 || a >= nn) throw parse_error("bad boundary node index");
    auto it = boundary_adj.find(a);
    if (it == boundary_adj.end() || std::find(it->second.begin(), it->second.end(), b) == it->second.end())
      throw topology_error("boundary nodes " + std::to_string(a) + " and " + std::to_string(b) +
                           " are not joined by a boundary edge");
  }
  if (signed_area(boundary_polygon()) < 0.0) std::reverse(boundary_nodes_.begin(), boundary_nodes_.end());

  boundary_index_.assign(nn, -1);
  interior_index_.assign(nn, -1);
  for (std::size_t k = 0; k < nb; ++k) boundary_index_[boundary_nodes_[k]] = static_cast<int>(k);
  for (int i = 0; i < nn; ++i) {
    if (boundary_index_[i] < 0) {
      interior_index_[i] = static_cast<int>(interior_nodes_.size());
      interior_nodes_.push_back(i);
    }
  }

  // Outward normals: bisector of the two adjacent edge normals.
  boundary_normals_.resize(nb);
  for (std::size_t k = 0; k < nb; ++k) {
    const Point& prev = nodes_[boundary_nodes_[(k + nb - 1) % nb]];
    const Point& cur = nodes_[boundary_nodes_[k]];
    const Point& next = nodes_[boundary_nodes_[(k + 1) % nb]];
    const Point e1 = (cur - prev).normalized();
    const Point e2 = (next - cur).normalized();
    Point n = Point(e1.y(), -e1.x()) + Point(e2.y(), -e2.x());
    if (n.norm() < 1e-14) n = Point(e2.y(), -e2.x());
    boundary_normals_[k] = n.normalized();
  }

  // Node -> triangles.
  node_tri_offsets_.assign(nn + 1, 0);
  for (const auto& tri : triangles_)
    for (int v : tri) ++node_tri_offsets_[v + 1];
  std::partial_sum(node_tri_offsets_.begin(), node_tri_offsets_.end(), node_tri_offsets_.begin());
  node_tri_data_.resize(node_tri_offsets_.back());
  {
    std::vector<int> fill(node_tri_offsets_.begin(), node_tri_offsets_.end() - 1);
    for (int t = 0; t < num_triangles(); ++t)
      for (int v : triangles_[t]) node_tri_data_[fill[v]++] = t;
  }

  // Node rings sorted by angle (counterclockwise).
  ring_offsets_.assign(nn + 1, 0);
  std::vector<std::vector<int>> rings(nn);
  for (int v = 0; v < nn; ++v) {
    auto& r = rings[v];
    for (int t : node_triangles(v))
      for (int w : triangles_[t])
        if (w != v) r.push_back(w);
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    const Point c = nodes_[v];
    std::sort(r.begin(), r.end(), [&](int a, int b) {
      const Point da = nodes_[a] - c, db = nodes_[b] - c;
      return std::atan2(da.y(), da.x()) < std::atan2(db.y(), db.x());
    });
    ring_offsets_[v + 1] = ring_offsets_[v] + static_cast<int>(r.size());
  }
  ring_data_.reserve(ring_offsets_.back());
  for (const auto& r : rings) ring_data_.insert(ring_data_.end(), r.begin(), r.end());

  build_locator();
}

Point Mesh::centroid(int t) const {
  const auto& tri = triangles_[t];
  return (nodes_[tri[0]] + nodes_[tri[1]] + nodes_[tri[2]]) / 3.0;
}

Eigen::Vector3d Mesh::barycentric(int t, const Point& p) const {
  const auto& tri = triangles_[t];
  const Point& p0 = nodes_[tri[0]];
  const auto& g = bary_grads_[t];
  Eigen::Vector3d l;
  const Point d = p - p0;
  l[1] = g.row(1).dot(d);
  l[2] = g.row(2).dot(d);
  l[0] = 1.0 - l[1] - l[2];
  return l;
}

std::span<const int> Mesh::ring(int node) const {
  return {ring_data_.data() + ring_offsets_[node],
          static_cast<std::size_t>(ring_offsets_[node + 1] - ring_offsets_[node])};
}

std::span<const int> Mesh::node_triangles(int node) const {
  return {node_tri_data_.data() + node_tri_offsets_[node],
          static_cast<std::size_t>(node_tri_offsets_[node + 1] - node_tri_offsets_[node])};
}

Polyline Mesh::boundary_polygon() const {
  Polyline poly;
  poly.reserve(boundary_nodes_.size());
  for (int v : boundary_nodes_) poly.push_back(nodes_[v]);
  return poly;
}

void Mesh::build_locator() {
  Point lo = nodes_[0], hi = nodes_[0];
  for (const auto& p : nodes_) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Point ext = hi - lo;
  cell_ = std::max(1.5 * mean_edge_, 1e-12);
  grid_nx_ = std::max(1, static_cast<int>(std::ceil(ext.x() / cell_)));
  grid_ny_ = std::max(1, static_cast<int>(std::ceil(ext.y() / cell_)));
  grid_origin_ = lo;
  std::vector<std::vector<int>> cells(static_cast<std::size_t>(grid_nx_) * grid_ny_);
  auto clampi = [](int v, int n) { return std::clamp(v, 0, n - 1); };
  for (int t = 0; t < num_triangles(); ++t) {
    Point tlo = nodes_[triangles_[t][0]], thi = tlo;
    for (int v : triangles_[t]) {
      tlo = tlo.cwiseMin(nodes_[v]);
      thi = thi.cwiseMax(nodes_[v]);
    }
    const int i0 = clampi(static_cast<int>(std::floor((tlo.x() - lo.x()) / cell_)), grid_nx_);
    const int i1 = clampi(static_cast<int>(std::floor((thi.x() - lo.x()) / cell_)), grid_nx_);
    const int j0 = clampi(static_cast<int>(std::floor((tlo.y() - lo.y()) / cell_)), grid_ny_);
    const int j1 = clampi(static_cast<int>(std::floor((thi.y() - lo.y()) / cell_)), grid_ny_);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) cells[static_cast<std::size_t>(j) * grid_nx_ + i].push_back(t);
  }
  cell_offsets_.assign(cells.size() + 1, 0);
  for (std::size_t c = 0; c < cells.size(); ++c)
    cell_offsets_[c + 1] = cell_offsets_[c] + static_cast<int>(cells[c].size());
  cell_data_.clear();
  cell_data_.reserve(cell_offsets_.back());
  for (const auto& c : cells) cell_data_.insert(cell_data_.end(), c.begin(), c.end());
}

std::optional<PointLocation> Mesh::locate(const Point& p, double tol) const {
  const double fx = (p.x() - grid_origin_.x()) / cell_;
  const double fy = (p.y() - grid_origin_.y()) / cell_;
  const double slack = 1e-9;
  if (fx < -slack || fy < -slack || fx > grid_nx_ + slack || fy > grid_ny_ + slack) return std::nullopt;
  const int i = std::clamp(static_cast<int>(std::floor(fx)), 0, grid_nx_ - 1);
  const int j = std::clamp(static_cast<int>(std::floor(fy)), 0, grid_ny_ - 1);
  const std::size_t c = static_cast<std::size_t>(j) * grid_nx_ + i;
  PointLocation best;
  double best_min = -std::numeric_limits<double>::infinity();
  for (int k = cell_offsets_[c]; k < cell_offsets_[c + 1]; ++k) {
    const int t = cell_data_[k];
    const Eigen::Vector3d l = barycentric(t, p);
    const double m = l.minCoeff();
    if (m > best_min) {
      best_min = m;
      best.triangle = t;
      best.barycentric = l;
      if (m >= 0.0) break;
    }
  }
  if (best.triangle < 0 || best_min < -tol) return std::nullopt;
  return best;
}

double interpolate(const Mesh& mesh, const Eigen::VectorXd& values, const Point& p) {
  const auto loc = mesh.locate(p);
  if (!loc) {
    std::ostringstream os;
    os << "point (" << p.x() << ", " << p.y() << ") is outside the mesh";
    throw geometry_error(os.str());
  }
  const auto& tri = mesh.triangle(loc->triangle);
  return loc->barycentric[0] * values[tri[0]] + loc->barycentric[1] * values[tri[1]] +
         loc->barycentric[2] * values[tri[2]];
}

Eigen::Vector2d triangle_gradient(const Mesh& mesh, const Eigen::VectorXd& values, int t) {
  const auto& tri = mesh.triangle(t);
  const auto& g = mesh.bary_gradients(t);
  return values[tri[0]] * g.row(0).transpose() + values[tri[1]] * g.row(1).transpose() +
         values[tri[2]] * g.row(2).transpose();
}

// ---------------------------------------------------------------------------
// File I/O

namespace {

/// Next non-comment, non-blank line; returns false at EOF.
bool next_data_line(std::istream& in, std::string& line, int& lineno) {
  while (std::getline(in, line)) {
    ++lineno;
    const auto pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos || line[pos] == '#') continue;
    return true;
  }
  return false;
}

}  // namespace

Mesh parse_mesh(std::istream& in, const std::string& source) {
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& what) {
    return parse_error(source + ":" + std::to_string(lineno) + ": " + what + ": '" + line + "'");
  };
  if (!next_data_line(in, line, lineno)) throw parse_error(source + ": empty mesh file");
  long nn = 0, nt = 0, nb = 0;
  {
    std::istringstream ss(line);
    if (!(ss >> nn >> nt >> nb) || nn <= 0 || nt <= 0 || nb <= 0) throw fail("expected header 'NN NT NB'");
  }
  std::vector<Point> nodes(nn);
  for (long i = 0; i < nn; ++i) {
    if (!next_data_line(in, line, lineno)) throw fail("unexpected end of file in node block");
    std::istringstream ss(line);
    double r = 0, z = 0;
    if (!(ss >> r >> z)) throw fail("expected 'r z'");
    nodes[i] = Point(r, z);
  }
  std::vector<Triangle> tris(nt);
  for (long i = 0; i < nt; ++i) {
    if (!next_data_line(in, line, lineno)) throw fail("unexpected end of file in triangle block");
    std::istringstream ss(line);
    if (!(ss >> tris[i][0] >> tris[i][1] >> tris[i][2])) throw fail("expected 'i j k'");
    for (int v : tris[i])
      if (v < 0 || v >= nn) throw fail("node index out of range");
  }
  std::vector<int> boundary(nb);
  for (long i = 0; i < nb; ++i) {
    if (!next_data_line(in, line, lineno)) throw fail("unexpected end of file in boundary block");
    std::istringstream ss(line);
    if (!(ss >> boundary[i]) || boundary[i] < 0 || boundary[i] >= nn) throw fail("expected a boundary node index");
  }
  return Mesh(std::move(nodes), std::move(tris), std::move(boundary));
}

Mesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open mesh file " + path.string());
  return parse_mesh(in, path.string());
}

void save_mesh(const Mesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write mesh file " + path.string());
  out << "# NN NT NB\n" << mesh.num_nodes() << ' ' << mesh.num_triangles() << ' ' << mesh.num_boundary() << '\n';
  out << std::setprecision(17);
  for (const auto& p : mesh.nodes()) out << p.x() << ' ' << p.y() << '\n';
  for (const auto& t : mesh.triangles()) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  for (int v : mesh.boundary_nodes()) out << v << '\n';
  if (!out) throw io_error("failed writing " + path.string());
}

Polyline load_contour(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open contour file " + path.string());
  Polyline pts;
  std::string line;
  int lineno = 0;
  bool first = true;
  while (next_data_line(in, line, lineno)) {
    std::replace(line.begin(), line.end(), ',', ' ');
    if (std::exchange(first, false) && line.find_first_of("rR") == line.find_first_not_of(" \t")) continue;
    std::istringstream ss(line);
    double r = 0, z = 0;
    std::string extra;
    if (!(ss >> r >> z) || (ss >> extra))
      throw parse_error(path.string() + ":" + std::to_string(lineno) + ": expected 'r z', got '" + line + "'");
    pts.emplace_back(r, z);
  }
  return pts;
}

}  // namespace gsrecon
