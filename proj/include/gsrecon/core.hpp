#ifndef GSRECON_CORE_HPP
#define GSRECON_CORE_HPP

#include <Eigen/Dense>

#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace gsrecon {

/// A point of the poloidal half-plane, stored as (r, z) in meters.
using Point = Eigen::Vector2d;
using Polyline = std::vector<Point>;

/// Vacuum permeability [H/m].
inline constexpr double kMu0 = 4.0e-7 * std::numbers::pi;

enum class ErrorKind { Parse, Topology, Geometry, Numeric, Config, Io };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error parse_error(const std::string& msg) { return {ErrorKind::Parse, msg}; }
inline Error topology_error(const std::string& msg) { return {ErrorKind::Topology, msg}; }
inline Error geometry_error(const std::string& msg) { return {ErrorKind::Geometry, msg}; }
inline Error numeric_error(const std::string& msg) { return {ErrorKind::Numeric, msg}; }
inline Error config_error(const std::string& msg) { return {ErrorKind::Config, msg}; }
inline Error io_error(const std::string& msg) { return {ErrorKind::Io, msg}; }

// Polygon helpers shared by the mesher, topology and output code.

/// Signed shoelace area; positive for counterclockwise vertex order.
template <typename Scalar>
Scalar signed_area(const std::vector<Eigen::Matrix<Scalar, 2, 1>>& poly) {
  Scalar a(0);
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % n];
    a += p.x() * q.y() - q.x() * p.y();
  }
  return a / Scalar(2);
}

template <typename Scalar>
Scalar closed_length(const std::vector<Eigen::Matrix<Scalar, 2, 1>>& poly) {
  Scalar len(0);
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) len += (poly[(i + 1) % n] - poly[i]).norm();
  return len;
}

/// Even-odd rule point-in-polygon test.
template <typename Scalar>
bool inside_polygon(const std::vector<Eigen::Matrix<Scalar, 2, 1>>& poly,
                    const Eigen::Matrix<Scalar, 2, 1>& p) {
  bool in = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const auto& a = poly[i];
    const auto& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const Scalar x = (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x();
      if (p.x() < x) in = !in;
    }
  }
  return in;
}

/// Twice the signed area of triangle (a, b, c).
inline double orient2d(const Point& a, const Point& b, const Point& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

double distance_to_segment(const Point& p, const Point& a, const Point& b);

/// Symmetric Hausdorff distance between two closed polylines, measured
/// vertex-to-segment in both directions.
double hausdorff_distance(const Polyline& a, const Polyline& b);

}  // namespace gsrecon

#endif  // GSRECON_CORE_HPP
