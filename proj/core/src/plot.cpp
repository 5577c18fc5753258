// SPDX-License-Identifier: Apache-2.0
#include "glav/plot.hpp"

#ifdef GLAV_HAVE_PNG
#include <png.h>
#endif

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

namespace glav {

void Canvas::set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  if (x < 0 || y < 0 || x >= width || y >= height) return;
  const std::size_t idx = (static_cast<std::size_t>(y) * width + x) * 3;
  rgb[idx] = r;
  rgb[idx + 1] = g;
  rgb[idx + 2] = b;
}

void Canvas::fill_rect(int x0, int y0, int x1, int y1, std::uint8_t r, std::uint8_t g,
                       std::uint8_t b) {
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) set(x, y, r, g, b);
}

void Canvas::line(int x0, int y0, int x1, int y1, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    set(x0, y0, r, g, b);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

void Canvas::disk(int cx, int cy, int radius, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  for (int y = -radius; y <= radius; ++y)
    for (int x = -radius; x <= radius; ++x)
      if (x * x + y * y <= radius * radius) set(cx + x, cy + y, r, g, b);
}

namespace {

// 5x7 glyphs, one byte per row, low 5 bits used.
const std::map<char, std::array<std::uint8_t, 7>>& glyphs() {
  static const std::map<char, std::array<std::uint8_t, 7>> table = {
      {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
      {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
      {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
      {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
      {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
      {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
      {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
      {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
      {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
      {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
      {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C}},
      {'-', {0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00}},
      {'+', {0x00, 0x04, 0x04, 0x1F, 0x04, 0x04, 0x00}},
      {'e', {0x00, 0x00, 0x0E, 0x11, 0x1F, 0x10, 0x0E}},
      {'%', {0x19, 0x19, 0x02, 0x04, 0x08, 0x13, 0x13}},
      {':', {0x00, 0x0C, 0x0C, 0x00, 0x0C, 0x0C, 0x00}},
      {' ', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00}},
  };
  return table;
}

struct Rgb {
  std::uint8_t r, g, b;
};

Rgb class_color(int cls) {
  static const Rgb palette[] = {{90, 90, 90},   {214, 69, 65},  {65, 131, 215}, {63, 195, 128},
                                {244, 179, 80}, {154, 89, 181}, {64, 64, 64},   {0, 181, 204}};
  return palette[cls % 8];
}

Rgb colormap(double v) {  // 0 -> dark blue, 1 -> yellow
  v = std::clamp(v, 0.0, 1.0);
  const double r = std::clamp(1.5 * v - 0.2, 0.0, 1.0);
  const double g = std::clamp(1.2 * v, 0.0, 1.0);
  const double b = std::clamp(0.9 - v, 0.0, 1.0);
  return {static_cast<std::uint8_t>(255 * r), static_cast<std::uint8_t>(255 * g),
          static_cast<std::uint8_t>(255 * b)};
}

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

void Canvas::text(int x, int y, const std::string& s, std::uint8_t r, std::uint8_t g,
                  std::uint8_t b, int scale) {
  int cx = x;
  for (char ch : s) {
    auto it = glyphs().find(ch);
    if (it == glyphs().end()) it = glyphs().find(' ');
    for (int row = 0; row < 7; ++row)
      for (int col = 0; col < 5; ++col)
        if (it->second[row] & (1 << (4 - col)))
          for (int sy = 0; sy < scale; ++sy)
            for (int sx = 0; sx < scale; ++sx)
              set(cx + col * scale + sx, y + row * scale + sy, r, g, b);
    cx += 6 * scale;
  }
}

std::string save_canvas(const Canvas& canvas, const std::string& path) {
#ifdef GLAV_HAVE_PNG
  std::string out_path = path;
  if (out_path.size() < 4 || out_path.substr(out_path.size() - 4) != ".png") out_path += ".png";
  FILE* fp = std::fopen(out_path.c_str(), "wb");
  if (!fp) throw ArgumentError("cannot write image: " + out_path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw Error("libpng failure writing " + out_path);
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, canvas.width, canvas.height, 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < canvas.height; ++y)
    png_write_row(png, const_cast<png_bytep>(&canvas.rgb[static_cast<std::size_t>(y) * canvas.width * 3]));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
  return out_path;
#else
  std::string out_path = path;
  const auto dot = out_path.rfind('.');
  out_path = (dot == std::string::npos ? out_path : out_path.substr(0, dot)) + ".ppm";
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw ArgumentError("cannot write image: " + out_path);
  out << "P6\n" << canvas.width << ' ' << canvas.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(canvas.rgb.data()),
            static_cast<std::streamsize>(canvas.rgb.size()));
  return out_path;
#endif
}

std::string heatmap_png(const std::string& path, const Mat& values) {
  const int cell = 40;
  const int margin = 8;
  Canvas canvas(margin * 2 + cell * static_cast<int>(values.cols()),
                margin * 2 + cell * static_cast<int>(values.rows()));
  const double lo = values.minCoeff();
  const double hi = values.maxCoeff();
  const double span = hi - lo > 1e-12 ? hi - lo : 1.0;
  for (int i = 0; i < values.rows(); ++i) {
    for (int j = 0; j < values.cols(); ++j) {
      const Rgb c = colormap((values(i, j) - lo) / span);
      const int x0 = margin + j * cell, y0 = margin + i * cell;
      canvas.fill_rect(x0, y0, x0 + cell - 1, y0 + cell - 1, c.r, c.g, c.b);
      canvas.text(x0 + 4, y0 + cell / 2 - 3, format_value(values(i, j)), 20, 20, 20);
    }
  }
  return save_canvas(canvas, path);
}

std::string graph_grid_png(const std::string& path, const std::vector<Graph>& graphs,
                           const std::vector<std::string>& captions, int columns) {
  const int cell = 140;
  const int caption_h = 14;
  const int rows = (static_cast<int>(graphs.size()) + columns - 1) / columns;
  Canvas canvas(columns * cell, std::max(1, rows) * (cell + caption_h));
  for (std::size_t g = 0; g < graphs.size(); ++g) {
    const Graph& graph = graphs[g];
    const int gx = (static_cast<int>(g) % columns) * cell;
    const int gy = (static_cast<int>(g) / columns) * (cell + caption_h);
    const int n = graph.size();
    std::vector<std::pair<double, double>> pos(n);
    if (graph.coordinates) {
      double min_x = 1e30, max_x = -1e30, min_y = 1e30, max_y = -1e30;
      for (int i = 0; i < n; ++i) {
        min_x = std::min(min_x, (*graph.coordinates)(i, 0));
        max_x = std::max(max_x, (*graph.coordinates)(i, 0));
        min_y = std::min(min_y, (*graph.coordinates)(i, 1));
        max_y = std::max(max_y, (*graph.coordinates)(i, 1));
      }
      const double sx = max_x - min_x > 1e-9 ? max_x - min_x : 1.0;
      const double sy = max_y - min_y > 1e-9 ? max_y - min_y : 1.0;
      for (int i = 0; i < n; ++i)
        pos[i] = {gx + 15 + ((*graph.coordinates)(i, 0) - min_x) / sx * (cell - 30),
                  gy + 15 + ((*graph.coordinates)(i, 1) - min_y) / sy * (cell - 30)};
    } else {
      for (int i = 0; i < n; ++i) {
        const double angle = 2.0 * 3.14159265358979 * i / std::max(1, n);
        pos[i] = {gx + cell / 2.0 + std::cos(angle) * (cell / 2.0 - 16),
                  gy + cell / 2.0 + std::sin(angle) * (cell / 2.0 - 16)};
      }
    }
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const int cls = graph.edge(i, j);
        if (cls == 0) continue;
        const Rgb c = class_color(cls + 3);
        canvas.line(static_cast<int>(pos[i].first), static_cast<int>(pos[i].second),
                    static_cast<int>(pos[j].first), static_cast<int>(pos[j].second), c.r, c.g, c.b);
        if (cls >= 2)  // double/triple/aromatic drawn heavier
          canvas.line(static_cast<int>(pos[i].first) + 1, static_cast<int>(pos[i].second) + 1,
                      static_cast<int>(pos[j].first) + 1, static_cast<int>(pos[j].second) + 1, c.r,
                      c.g, c.b);
      }
    for (int i = 0; i < n; ++i) {
      const Rgb c = class_color(graph.node_classes[i]);
      canvas.disk(static_cast<int>(pos[i].first), static_cast<int>(pos[i].second), 5, c.r, c.g, c.b);
    }
    if (g < captions.size())
      canvas.text(gx + 4, gy + cell + 3, captions[g], 10, 10, 10);
  }
  return save_canvas(canvas, path);
}

}  // namespace glav
