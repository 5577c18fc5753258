// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "glav/graph.hpp"

#include <string>
#include <vector>

namespace glav {

/// Minimal RGB raster used for report plots.
struct Canvas {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  Canvas(int w, int h, std::uint8_t fill = 255)
      : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, fill) {}

  void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b);
  void fill_rect(int x0, int y0, int x1, int y1, std::uint8_t r, std::uint8_t g, std::uint8_t b);
  void line(int x0, int y0, int x1, int y1, std::uint8_t r, std::uint8_t g, std::uint8_t b);
  void disk(int cx, int cy, int radius, std::uint8_t r, std::uint8_t g, std::uint8_t b);
  /// 5x7 bitmap glyphs for digits and number punctuation ("0-9.+-e%: ").
  void text(int x, int y, const std::string& s, std::uint8_t r, std::uint8_t g, std::uint8_t b,
            int scale = 1);
};

/// PNG when libpng is available, PPM otherwise (extension adjusted).
/// Returns the path actually written.
std::string save_canvas(const Canvas& canvas, const std::string& path);

/// Value grid rendered with a blue->yellow colormap and per-cell labels.
std::string heatmap_png(const std::string& path, const Mat& values);

/// Graphs laid out on a grid: nodes colored by class (coordinates when
/// present, circular layout otherwise), edges colored by class. Captions are
/// rendered under each cell with the numeric glyph set.
std::string graph_grid_png(const std::string& path, const std::vector<Graph>& graphs,
                           const std::vector<std::string>& captions, int columns = 4);

}  // namespace glav
