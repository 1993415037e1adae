#pragma once

#include <span>
#include <string>
#include <vector>

#include "qhydro/grid.hpp"
#include "qhydro/trajectories.hpp"

namespace qhydro::app::svg {

struct Style {
  int width = 640;
  int height = 420;
  std::string title;
  std::string x_label = "x";
  std::string y_label = "value";
};

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

// Line plot with axes, ticks and a legend. An empty series set draws axes only.
std::string line_plot(std::span<const Series> series, const Style& style);

/// 1D field as a polyline, 2D field as a raster heat map of cell
/// rectangles. 3D fields are rejected with a hint to pass a slice.
std::string plot_field(const RealField& f, const Style& style);

/// Space-time raster of 1D frames (x horizontal, t vertical, upwards) with
/// 1D trajectories drawn on top. With no frames and no trajectories only the
/// axes are drawn.
std::string trajectory_overlay(std::span<const double> times, std::span<const RealField> frames,
                               std::span<const Trajectory> paths, const Style& style);

// Every number in an SVG rounded to `digits` decimals, for golden comparisons.
std::string normalize_numbers(const std::string& svg, int digits);

}  // namespace qhydro::app::svg
