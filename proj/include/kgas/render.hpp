#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "kgas/cloud.hpp"
#include "kgas/image_io.hpp"
#include "kgas/vec.hpp"

namespace kgas {

// Pinhole camera: x_cam = rotation * x_world + translation, pixel
// (fx X/Z + cx, fy Y/Z + cy) in continuous coordinates where pixel (i, j)
// is sampled at its center (i + 0.5, j + 0.5).
struct Camera {
  Mat3 rotation = Mat3::identity();
  Vec3 translation{0.0, 0.0, 0.0};
  double fx = 100.0, fy = 100.0;
  double cx = 0.0, cy = 0.0;
  int width = 0, height = 0;
  double near = 0.01;

  void validate() const;
};

// Key = value camera description (width, height, fx, fy, cx, cy,
// rotation as 9 row-major values, translation as 3 values).
Camera load_camera(const std::string& path);
void save_camera(const Camera& cam, const std::string& path);

// Screen-space splat: 2D mean, symmetric 2x2 covariance (xx, xy, yy),
// camera depth, unmodified opacity/color, and the source index used for
// stable depth ordering.
struct Splat2D {
  double mean_x = 0.0, mean_y = 0.0;
  double cov_xx = 1.0, cov_xy = 0.0, cov_yy = 1.0;
  double depth = 0.0;
  double opacity = 0.0;
  Vec3 color{0.0, 0.0, 0.0};
  std::size_t source = 0;
  bool culled = false;
};

// Perspective EWA projection: cov2d = J W Sigma W^T J^T + 0.3 I, where J is
// the Jacobian of the projection at the mean. Splats behind the near plane
// or more than 4 sigma outside the viewport are culled.
Splat2D project_gaussian(const Camera& cam, const Gaussian3D& g, std::size_t source);

// Front-to-back alpha compositing over depth-sorted splats (ties broken by
// source index). Per-pixel contributions use alpha = opacity *
// exp(-0.5 d^T cov2d^{-1} d), cut off at 4 sigma; accumulation for a pixel
// stops once transmittance drops below 1e-4. Depth is the alpha-weighted
// mean of splat depths (+inf where alpha is zero).
ImageRGBA composite(const Camera& cam, const std::vector<Splat2D>& splats);

// project_gaussian over the cloud, then composite. Pure and deterministic:
// identical clouds and cameras give identical images, independent of
// Gaussian order (depths distinct) and thread count.
ImageRGBA render(const GaussianCloud& cloud, const Camera& cam);

}  // namespace kgas
