#ifndef GSRECON_MESH_HPP
#define GSRECON_MESH_HPP

#include "gsrecon/core.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace gsrecon {

using Triangle = std::array<int, 3>;

struct PointLocation {
  int triangle = -1;
  Eigen::Vector3d barycentric = Eigen::Vector3d::Zero();
};

/// Triangulated poloidal cross-section of the vacuum vessel.
///
/// Immutable once constructed. The constructor validates the invariants
/// (r > 0, positive orientation, manifold edges, a single closed boundary
/// loop matching `boundary`) and builds the derived tables used by the FEM,
/// topology and diagnostics code: per-triangle areas and barycentric
/// gradients, node rings, triangle adjacency and a bucket grid for point
/// location.
class Mesh {
 public:
  Mesh(std::vector<Point> nodes, std::vector<Triangle> triangles, std::vector<int> boundary);

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_triangles() const { return static_cast<int>(triangles_.size()); }
  int num_interior() const { return static_cast<int>(interior_nodes_.size()); }
  int num_boundary() const { return static_cast<int>(boundary_nodes_.size()); }

  const std::vector<Point>& nodes() const { return nodes_; }
  const Point& node(int i) const { return nodes_[i]; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const Triangle& triangle(int t) const { return triangles_[t]; }

  /// Counterclockwise boundary loop and outward unit normals per boundary node.
  std::span<const int> boundary_nodes() const { return boundary_nodes_; }
  std::span<const Point> boundary_normals() const { return boundary_normals_; }
  std::span<const int> interior_nodes() const { return interior_nodes_; }

  bool is_boundary(int node) const { return boundary_index_[node] >= 0; }
  /// Position in boundary_nodes(), or -1.
  int boundary_index(int node) const { return boundary_index_[node]; }
  /// Position in interior_nodes(), or -1.
  int interior_index(int node) const { return interior_index_[node]; }

  double area(int t) const { return areas_[t]; }
  /// Rows are the (constant) gradients of the three barycentric coordinates.
  const Eigen::Matrix<double, 3, 2>& bary_gradients(int t) const { return bary_grads_[t]; }
  Point centroid(int t) const;
  Eigen::Vector3d barycentric(int t, const Point& p) const;

  /// Neighbouring nodes; counterclockwise around interior nodes.
  std::span<const int> ring(int node) const;
  std::span<const int> node_triangles(int node) const;
  /// Neighbour across the edge opposite local vertex i, or -1 on the boundary.
  const std::array<int, 3>& triangle_neighbors(int t) const { return tri_neighbors_[t]; }

  double mean_edge() const { return mean_edge_; }
  double max_edge() const { return max_edge_; }
  double total_area() const { return total_area_; }
  Polyline boundary_polygon() const;

  std::optional<PointLocation> locate(const Point& p, double tol = 1e-9) const;

 private:
  void build_locator();

  std::vector<Point> nodes_;
  std::vector<Triangle> triangles_;
  std::vector<int> boundary_nodes_;
  std::vector<Point> boundary_normals_;
  std::vector<int> interior_nodes_;
  std::vector<int> boundary_index_;
  std::vector<int> interior_index_;
  std::vector<double> areas_;
  std::vector<Eigen::Matrix<double, 3, 2>> bary_grads_;
  std::vector<int> ring_offsets_, ring_data_;
  std::vector<int> node_tri_offsets_, node_tri_data_;
  std::vector<std::array<int, 3>> tri_neighbors_;
  double mean_edge_ = 0.0, max_edge_ = 0.0, total_area_ = 0.0;

  // Bucket grid over the bounding box; each cell lists overlapping triangles.
  Point grid_origin_ = Point::Zero();
  double cell_ = 1.0;
  int grid_nx_ = 1, grid_ny_ = 1;
  std::vector<int> cell_offsets_, cell_data_;
};

inline std::optional<PointLocation> locate(const Mesh& mesh, const Point& p) {
  return mesh.locate(p);
}

/// P1 interpolation; throws a geometry error when p is outside the mesh.
double interpolate(const Mesh& mesh, const Eigen::VectorXd& nodal_values, const Point& p);

/// Constant P1 gradient of a nodal field on triangle t.
Eigen::Vector2d triangle_gradient(const Mesh& mesh, const Eigen::VectorXd& nodal_values, int t);

Mesh load_mesh(const std::filesystem::path& path);
Mesh parse_mesh(std::istream& in, const std::string& source = "<stream>");
void save_mesh(const Mesh& mesh, const std::filesystem::path& path);

/// Delaunay-quality triangulation of the region enclosed by a closed contour.
/// Boundary nodes are placed on the contour (corners kept) with spacing close
/// to target_h; interior nodes start on an equilateral lattice.
Mesh generate_vessel_mesh(const Polyline& contour, double target_h);

/// Reads a contour file: one "r z" or "r,z" pair per line, '#' comments.
Polyline load_contour(const std::filesystem::path& path);

}  // namespace gsrecon

#endif  // GSRECON_MESH_HPP
