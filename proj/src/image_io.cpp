#include "kgas/image_io.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "kgas/error.hpp"

namespace kgas {

namespace {

inline std::uint8_t to_byte(double v) {
  if (v <= 0.0) return 0;
  if (v >= 1.0) return 255;
  return static_cast<std::uint8_t>(std::floor(v * 255.0 + 0.5));
}

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in, const std::string& path) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {}
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  if (tok.empty()) throw ValidationError(path + ": truncated header");
  return tok;
}

void parse_dims(std::istream& in, const std::string& path, int& w, int& h,
                bool with_maxval) {
  try {
    w = std::stoi(next_token(in, path));
    h = std::stoi(next_token(in, path));
    if (with_maxval) {
      int maxval = std::stoi(next_token(in, path));
      if (maxval != 255)
        throw ValidationError(path + ": only maxval 255 is supported");
    }
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception&) {
    throw ValidationError(path + ": malformed header");
  }
  if (w <= 0 || h <= 0) throw ValidationError(path + ": non-positive dimensions");
}

}  // namespace

ImageRGBA ImageRGBA::blank(int width, int height) {
  ImageRGBA img;
  img.width = width;
  img.height = height;
  img.rgb.assign(static_cast<std::size_t>(width) * height * 3, 0.0);
  img.alpha.assign(static_cast<std::size_t>(width) * height, 0.0);
  img.depth.assign(static_cast<std::size_t>(width) * height,
                   std::numeric_limits<double>::infinity());
  return img;
}

void write_ppm(const ImageRGBA& image, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write image: " + path);
  out << "P6\n" << image.width << " " << image.height << "\n255\n";
  std::vector<std::uint8_t> row(static_cast<std::size_t>(image.width) * 3);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const double* p = image.pixel(x, y);
      row[3 * x + 0] = to_byte(p[0]);
      row[3 * x + 1] = to_byte(p[1]);
      row[3 * x + 2] = to_byte(p[2]);
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size()));
  }
}

ImageRGBA read_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open image: " + path);
  std::string magic = next_token(in, path);
  if (magic != "P6") throw ValidationError(path + ": expected binary PPM (P6)");
  int w = 0, h = 0;
  parse_dims(in, path, w, h, true);
  ImageRGBA img = ImageRGBA::blank(w, h);
  std::vector<std::uint8_t> row(static_cast<std::size_t>(w) * 3);
  for (int y = 0; y < h; ++y) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
    if (in.gcount() != static_cast<std::streamsize>(row.size()))
      throw ValidationError(path + ": truncated pixel data");
    for (int x = 0; x < w; ++x) {
      double* p = img.pixel(x, y);
      p[0] = row[3 * x + 0] / 255.0;
      p[1] = row[3 * x + 1] / 255.0;
      p[2] = row[3 * x + 2] / 255.0;
      img.alpha[img.index(x, y)] = 1.0;
    }
  }
  return img;
}

void write_pgm(const std::vector<double>& plane, int width, int height,
               const std::string& path) {
  if (plane.size() != static_cast<std::size_t>(width) * height)
    throw ValidationError("pgm write: plane size does not match dimensions");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write image: " + path);
  out << "P5\n" << width << " " << height << "\n255\n";
  std::vector<std::uint8_t> row(static_cast<std::size_t>(width));
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x)
      row[x] = to_byte(plane[static_cast<std::size_t>(y) * width + x]);
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size()));
  }
}

std::vector<double> read_pgm(const std::string& path, int& width, int& height) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open image: " + path);
  std::string magic = next_token(in, path);
  if (magic != "P5") throw ValidationError(path + ": expected binary PGM (P5)");
  parse_dims(in, path, width, height, true);
  std::vector<double> plane(static_cast<std::size_t>(width) * height);
  std::vector<std::uint8_t> row(static_cast<std::size_t>(width));
  for (int y = 0; y < height; ++y) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
    if (in.gcount() != static_cast<std::streamsize>(row.size()))
      throw ValidationError(path + ": truncated pixel data");
    for (int x = 0; x < width; ++x)
      plane[static_cast<std::size_t>(y) * width + x] = row[x] / 255.0;
  }
  return plane;
}

void write_pfm(const std::vector<double>& plane, int width, int height,
               const std::string& path) {
  if (plane.size() != static_cast<std::size_t>(width) * height)
    throw ValidationError("pfm write: plane size does not match dimensions");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write image: " + path);
  out << "Pf\n" << width << " " << height << "\n-1.0\n";
  std::vector<float> row(static_cast<std::size_t>(width));
  for (int y = height - 1; y >= 0; --y) {  // bottom to top
    for (int x = 0; x < width; ++x)
      row[x] = static_cast<float>(plane[static_cast<std::size_t>(y) * width + x]);
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
}

std::vector<double> read_pfm(const std::string& path, int& width, int& height) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open image: " + path);
  std::string magic = next_token(in, path);
  if (magic != "Pf") throw ValidationError(path + ": expected grayscale PFM (Pf)");
  double scale = 0.0;
  try {
    width = std::stoi(next_token(in, path));
    height = std::stoi(next_token(in, path));
    scale = std::stod(next_token(in, path));
  } catch (const std::exception&) {
    throw ValidationError(path + ": malformed header");
  }
  if (scale >= 0.0)
    throw ValidationError(path + ": big-endian PFM is not supported");
  std::vector<double> plane(static_cast<std::size_t>(width) * height);
  std::vector<float> row(static_cast<std::size_t>(width));
  for (int y = height - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(float)));
    if (in.gcount() != static_cast<std::streamsize>(row.size() * sizeof(float)))
      throw ValidationError(path + ": truncated pixel data");
    for (int x = 0; x < width; ++x)
      plane[static_cast<std::size_t>(y) * width + x] = row[x];
  }
  return plane;
}

ImageRGBA quantize8(const ImageRGBA& image) {
  ImageRGBA out = image;
  for (double& v : out.rgb) v = to_byte(v) / 255.0;
  for (double& v : out.alpha) v = to_byte(v) / 255.0;
  return out;
}

}  // namespace kgas
