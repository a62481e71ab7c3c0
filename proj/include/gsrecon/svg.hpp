#ifndef GSRECON_SVG_HPP
#define GSRECON_SVG_HPP

#include "gsrecon/core.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace gsrecon {

/// Line plot written as a self-contained SVG document: polylines, axes with
/// ticks, labels and a legend.
class SvgFigure {
 public:
  struct Series {
    std::vector<double> x, y;
    std::string label;
    std::string color;
    bool closed = false;
    bool dashed = false;
  };

  SvgFigure(std::string title, std::string xlabel, std::string ylabel);

  /// Same scale on both axes (cross-sections).
  SvgFigure& equal_aspect(bool on = true);
  /// Base-10 logarithmic y axis; non-positive values are dropped.
  SvgFigure& log_y(bool on = true);

  SvgFigure& add(Series s);
  SvgFigure& add(const std::vector<double>& x, const std::vector<double>& y, const std::string& label,
                 const std::string& color, bool dashed = false);
  SvgFigure& add(const Polyline& points, const std::string& label, const std::string& color, bool closed = true,
                 bool dashed = false);

  int size() const { return static_cast<int>(series_.size()); }
  std::string render(int width = 640, int height = 480) const;
  void save(const std::filesystem::path& path, int width = 640, int height = 480) const;

 private:
  std::string title_, xlabel_, ylabel_;
  bool equal_ = false, log_ = false;
  std::vector<Series> series_;
};

/// Up to about `target` round tick values covering [lo, hi].
std::vector<double> nice_ticks(double lo, double hi, int target = 6);

}  // namespace gsrecon

#endif  // GSRECON_SVG_HPP
