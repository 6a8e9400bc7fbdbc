#include "regrasp/mask.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "regrasp/errors.hpp"

namespace regrasp {
namespace {

int next_pnm_token(std::istream& in) {
  // Skips whitespace and '#' comments, then parses one integer.
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  if (c == EOF || !std::isdigit(c)) {
    raise(ErrorCode::IoFailure, "malformed PNM header");
  }
  int value = 0;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    c = in.get();
  }
  return value;
}

}  // namespace

std::size_t SegMask::count_set() const {
  return static_cast<std::size_t>(std::count(data.begin(), data.end(), std::uint8_t{1}));
}

void write_pgm(const std::string& path, const SegMask& mask) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::IoFailure, "cannot open " + path + " for writing");
  out << "P5\n" << mask.width << " " << mask.height << "\n255\n";
  std::vector<std::uint8_t> raster(mask.data.size());
  for (std::size_t i = 0; i < mask.data.size(); ++i) raster[i] = mask.data[i] ? 255 : 0;
  out.write(reinterpret_cast<const char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
  if (!out) raise(ErrorCode::IoFailure, "short write to " + path);
}

SegMask read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoFailure, "cannot open " + path);
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '5') {
    raise(ErrorCode::IoFailure, path + " is not a binary PGM (P5)");
  }
  int width = next_pnm_token(in);
  int height = next_pnm_token(in);
  int maxval = next_pnm_token(in);
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 255) {
    raise(ErrorCode::IoFailure, "unsupported PGM geometry in " + path);
  }
  SegMask mask(width, height);
  std::vector<std::uint8_t> raster(mask.data.size());
  in.read(reinterpret_cast<char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
  if (!in) raise(ErrorCode::IoFailure, "truncated PGM raster in " + path);
  for (std::size_t i = 0; i < raster.size(); ++i) mask.data[i] = raster[i] > maxval / 2 ? 1 : 0;
  return mask;
}

void write_ppm(const std::string& path, const RgbImage& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::IoFailure, "cannot open " + path + " for writing");
  out << "P6\n" << image.width << " " << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.data.data()),
            static_cast<std::streamsize>(image.data.size()));
  if (!out) raise(ErrorCode::IoFailure, "short write to " + path);
}

}  // namespace regrasp
