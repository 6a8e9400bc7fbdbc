#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace regrasp {

/// Binary segmentation mask, row-major, values in {0, 1}.
struct SegMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  SegMask() = default;
  SegMask(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h, 0) {}

  std::uint8_t at(int row, int col) const { return data[static_cast<std::size_t>(row) * width + col]; }
  void set(int row, int col, std::uint8_t v) { data[static_cast<std::size_t>(row) * width + col] = v; }
  bool inside(int row, int col) const { return row >= 0 && row < height && col >= 0 && col < width; }
  std::size_t count_set() const;
};

/// Per-pixel Euclidean distances, same layout as the mask it came from.
struct DistanceGrid {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  double at(int row, int col) const { return data[static_cast<std::size_t>(row) * width + col]; }
};

/// Binary PGM (P5, 0/255). Any sample > maxval/2 reads back as foreground.
void write_pgm(const std::string& path, const SegMask& mask);
SegMask read_pgm(const std::string& path);

/// 8-bit RGB image for debug overlays, written as binary PPM (P6).
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // 3 bytes per pixel, row-major

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0) {}

  void set(int row, int col, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    if (row < 0 || row >= height || col < 0 || col >= width) return;
    std::size_t i = (static_cast<std::size_t>(row) * width + col) * 3;
    data[i] = r;
    data[i + 1] = g;
    data[i + 2] = b;
  }
};

void write_ppm(const std::string& path, const RgbImage& image);

}  // namespace regrasp
