#pragma once

#include <limits>
#include <string>
#include <vector>

namespace kgas {

// Float image with premultiplied RGB in [0, 1], alpha in [0, 1] and a
// positive depth plane (+inf where nothing was hit).
struct ImageRGBA {
  int width = 0;
  int height = 0;
  std::vector<double> rgb;    // 3 doubles per pixel, row-major, interleaved
  std::vector<double> alpha;  // 1 per pixel
  std::vector<double> depth;  // 1 per pixel

  static ImageRGBA blank(int width, int height);

  double* pixel(int x, int y) { return &rgb[3 * (static_cast<std::size_t>(y) * width + x)]; }
  const double* pixel(int x, int y) const {
    return &rgb[3 * (static_cast<std::size_t>(y) * width + x)];
  }
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width + x;
  }
};

// 8-bit binary PPM (P6, maxval 255), round half up on write. Reads fill
// alpha with 1 and depth with +inf.
void write_ppm(const ImageRGBA& image, const std::string& path);
ImageRGBA read_ppm(const std::string& path);

// 8-bit binary PGM (P5) for a single plane in [0, 1].
void write_pgm(const std::vector<double>& plane, int width, int height,
               const std::string& path);
std::vector<double> read_pgm(const std::string& path, int& width, int& height);

// Grayscale PFM ("Pf", little-endian, rows bottom to top) for depth planes.
void write_pfm(const std::vector<double>& plane, int width, int height,
               const std::string& path);
std::vector<double> read_pfm(const std::string& path, int& width, int& height);

// Snaps RGB and alpha to the 8-bit lattice the PPM/PGM writers emit, so
// in-memory metrics match metrics on the files round-tripped from disk.
ImageRGBA quantize8(const ImageRGBA& image);

}  // namespace kgas
