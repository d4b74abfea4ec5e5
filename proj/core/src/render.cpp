#include "nrel/render.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

namespace nrel {

namespace {

void paint(std::vector<unsigned char>& bytes, std::size_t payload_off,
           const Mat& points, const Viewport& vp, int size, unsigned char r,
           unsigned char g, unsigned char b) {
  for (const Vec& p : points) {
    if (p.size() < 2) {
      throw std::invalid_argument("render_scatter: points must be 2-D");
    }
    const double fx = (p[0] - vp.xmin) / (vp.xmax - vp.xmin);
    const double fy = (vp.ymax - p[1]) / (vp.ymax - vp.ymin);
    if (fx < 0.0 || fx > 1.0 || fy < 0.0 || fy > 1.0) continue;
    const long col = std::lround(fx * (size - 1));
    const long row = std::lround(fy * (size - 1));
    const std::size_t at =
        payload_off + 3 * (static_cast<std::size_t>(row) *
                               static_cast<std::size_t>(size) +
                           static_cast<std::size_t>(col));
    bytes[at] = r;
    bytes[at + 1] = g;
    bytes[at + 2] = b;
  }
}

}  // namespace

std::vector<unsigned char> render_scatter(const Mat& points,
                                          const Mat& overlay,
                                          const Viewport& vp, int size) {
  if (size < 16) {
    throw std::invalid_argument("render_scatter: size must be >= 16");
  }
  if (!(vp.xmax > vp.xmin) || !(vp.ymax > vp.ymin)) {
    throw std::invalid_argument("render_scatter: empty viewport");
  }
  const std::string header =
      "P6\n" + std::to_string(size) + " " + std::to_string(size) + "\n255\n";
  const std::size_t payload =
      3 * static_cast<std::size_t>(size) * static_cast<std::size_t>(size);
  std::vector<unsigned char> bytes(header.size() + payload, 255);
  for (std::size_t i = 0; i < header.size(); ++i) {
    bytes[i] = static_cast<unsigned char>(header[i]);
  }
  paint(bytes, header.size(), points, vp, size, 0, 0, 0);
  paint(bytes, header.size(), overlay, vp, size, 255, 0, 0);
  return bytes;
}

void write_pixmap(const std::filesystem::path& path,
                  const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::invalid_argument("write_pixmap: cannot open " + path.string());
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

}  // namespace nrel
