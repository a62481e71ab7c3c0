#ifndef GSRECON_SRC_DELAUNAY_HPP
#define GSRECON_SRC_DELAUNAY_HPP

#include "gsrecon/mesh.hpp"

#include <span>
#include <vector>

namespace gsrecon::detail {

/// Bowyer-Watson Delaunay triangulation of a point set. Returns
/// counterclockwise triangles of the convex hull (super-triangle removed).
std::vector<Triangle> delaunay_triangulate(std::span<const Point> points);

}  // namespace gsrecon::detail

#endif  // GSRECON_SRC_DELAUNAY_HPP
