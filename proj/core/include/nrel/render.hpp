#pragma once

#include <filesystem>
#include <vector>

#include "nrel/vec.hpp"

namespace nrel {

struct Viewport {
  double xmin = 0.0;
  double xmax = 0.0;
  double ymin = 0.0;
  double ymax = 0.0;
};

// Complete binary pixmap ("P6", 8-bit, size x size) with the base points
// black, overlay points red (drawn last), on a white background. Points map
// to pixels by col = round((x - xmin)/(xmax - xmin) * (size - 1)) and
// row = round((ymax - y)/(ymax - ymin) * (size - 1)) — row 0 is the top, at
// ymax — and out-of-viewport points are skipped. size >= 16; a viewport
// with xmin >= xmax or ymin >= ymax is invalid. Only the first two
// coordinates of each point are used.
std::vector<unsigned char> render_scatter(const Mat& points,
                                          const Mat& overlay,
                                          const Viewport& viewport, int size);

void write_pixmap(const std::filesystem::path& path,
                  const std::vector<unsigned char>& bytes);

}  // namespace nrel
