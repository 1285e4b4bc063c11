#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace compnerf::io {

// Row-major, interleaved RGB.
struct ImageU8 {
  int width = 0, height = 0, channels = 0;
  std::vector<uint8_t> pixels;
  uint8_t at(int x, int y, int c = 0) const {
    return pixels[(size_t(y) * width + x) * channels + c];
  }
};

void write_png(const std::string& path, const ImageU8& img);
ImageU8 read_png(const std::string& path);

}  // namespace compnerf::io
