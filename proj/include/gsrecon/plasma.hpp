#ifndef GSRECON_PLASMA_HPP
#define GSRECON_PLASMA_HPP

#include "gsrecon/mesh.hpp"

#include <optional>
#include <string>
#include <vector>

namespace gsrecon {

enum class BoundaryKind { XPoint, Limiter };

const char* to_string(BoundaryKind kind);

struct AxisInfo {
  Point position = Point::Zero();
  double psi = 0.0;
  int node = -1;
};

struct BoundaryFlux {
  double psi_b = 0.0;
  BoundaryKind kind = BoundaryKind::Limiter;
  std::optional<Point> x_point;
  /// Set when two qualifying saddles had nearly equal flux.
  bool tie_break = false;
};

/// Closed level line. Segment i joins points[i] and points[i + 1] (cyclic)
/// and lies in segment_triangles[i]; -1 marks the segment closed through
/// the X-point.
struct Contour {
  Polyline points;
  std::vector<int> segment_triangles;

  bool empty() const { return points.empty(); }
};

/// Nodal flux with its derived topology.
struct FluxState {
  Eigen::VectorXd psi;
  AxisInfo axis;
  BoundaryFlux boundary;
  Eigen::VectorXd psibar;
  /// Plasma coverage fraction per triangle.
  std::vector<double> mask;
  /// Clipped plasma polygon for partially covered triangles, empty otherwise.
  std::vector<Polyline> cut_cells;
  Contour boundary_contour;
  std::vector<std::string> warnings;

  double psi_axis() const { return axis.psi; }
  double psi_b() const { return boundary.psi_b; }
};

/// Interior maximum of the P1 field, refined by a quadratic fit on the
/// two-ring patch of the maximal node.
AxisInfo find_axis(const Mesh& mesh, const Eigen::VectorXd& psi);

/// Largest qualifying saddle (X-point), or the limiter value max over the wall.
BoundaryFlux find_boundary_flux(const Mesh& mesh, const Eigen::VectorXd& psi, const AxisInfo& axis);

Eigen::VectorXd normalize_flux(const Eigen::VectorXd& psi, double psi_axis, double psi_b);

/// Marching-triangles level line of a P1 field that encloses `axis`,
/// counterclockwise. With an X-point the line is clipped on the core side
/// of the X-point and closed through it.
Contour extract_contour(const Mesh& mesh, const Eigen::VectorXd& psibar, double level, const Point& axis,
                        const std::optional<Point>& x_point = std::nullopt);

/// Mask and cut cells of { psibar <= 1 } restricted to the core side of the
/// X-point and to the component connected to the axis.
void compute_plasma_region(const Mesh& mesh, const Eigen::VectorXd& psibar, const Point& axis,
                           const std::optional<Point>& x_point, std::vector<double>& mask,
                           std::vector<Polyline>& cut_cells);

/// Full topology analysis of a nodal flux.
FluxState analyze_flux(const Mesh& mesh, Eigen::VectorXd psi);

/// Whether point p of triangle t (with interpolated psibar) lies in the plasma.
bool in_plasma(const FluxState& flux, int triangle, const Point& p, double psibar);

struct PlasmaQuadPoint {
  int triangle;
  Eigen::Vector3d bary;
  Point p;
  double weight;
  double psibar;
};

/// Three-point Gauss rule over the plasma region; cut triangles are
/// integrated over their clipped polygon.
std::vector<PlasmaQuadPoint> plasma_quadrature(const Mesh& mesh, const FluxState& flux);

/// Area of the plasma region.
double plasma_area(const Mesh& mesh, const FluxState& flux);

}  // namespace gsrecon

#endif  // GSRECON_PLASMA_HPP
