#include "kgas/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "kgas/error.hpp"
#include "kgas/parallel.hpp"

namespace kgas {

namespace {

constexpr double kCovFloor = 0.3;        // screen-space low-pass, pixels^2
constexpr double kCutoffSigma = 4.0;     // Gaussian support radius
constexpr double kMinTransmittance = 1e-4;

}  // namespace

void Camera::validate() const {
  if (width <= 0 || height <= 0)
    throw ValidationError("camera: image dimensions must be positive");
  if (!(fx > 0.0) || !(fy > 0.0))
    throw ValidationError("camera: focal lengths must be positive");
  if (!(near > 0.0)) throw ValidationError("camera: near plane must be positive");
  if (!RotationMatrix{rotation}.valid())
    throw ValidationError("camera: rotation is not a valid rotation matrix");
}

Splat2D project_gaussian(const Camera& cam, const Gaussian3D& g, std::size_t source) {
  Splat2D out;
  out.source = source;
  out.opacity = g.opacity;
  out.color = g.color;

  Vec3 t = cam.rotation * g.position + cam.translation;
  if (t.z <= cam.near) {
    out.culled = true;
    return out;
  }
  double inv_z = 1.0 / t.z;
  out.depth = t.z;
  out.mean_x = cam.fx * t.x * inv_z + cam.cx;
  out.mean_y = cam.fy * t.y * inv_z + cam.cy;

  // Jacobian of (fx X/Z + cx, fy Y/Z + cy) at the mean.
  double j00 = cam.fx * inv_z;
  double j02 = -cam.fx * t.x * inv_z * inv_z;
  double j11 = cam.fy * inv_z;
  double j12 = -cam.fy * t.y * inv_z * inv_z;

  Mat3 sigma_cam = cam.rotation * covariance(g) * transpose(cam.rotation);
  // cov2d = J sigma_cam J^T with J = [[j00, 0, j02], [0, j11, j12]].
  Vec3 row0{j00, 0.0, j02};
  Vec3 row1{0.0, j11, j12};
  Vec3 s0 = sigma_cam * row0;
  Vec3 s1 = sigma_cam * row1;
  out.cov_xx = dot(row0, s0) + kCovFloor;
  out.cov_xy = dot(row0, s1);
  out.cov_yy = dot(row1, s1) + kCovFloor;

  // Viewport cull at kCutoffSigma times the largest standard deviation.
  double half_tr = 0.5 * (out.cov_xx + out.cov_yy);
  double diff = 0.5 * (out.cov_xx - out.cov_yy);
  double lam_max = half_tr + std::sqrt(diff * diff + out.cov_xy * out.cov_xy);
  double radius = kCutoffSigma * std::sqrt(std::max(lam_max, 0.0));
  if (out.mean_x + radius < 0.0 || out.mean_x - radius > cam.width ||
      out.mean_y + radius < 0.0 || out.mean_y - radius > cam.height)
    out.culled = true;
  return out;
}

ImageRGBA composite(const Camera& cam, const std::vector<Splat2D>& splats) {
  cam.validate();
  ImageRGBA img = ImageRGBA::blank(cam.width, cam.height);
  std::vector<double> transmittance(img.alpha.size(), 1.0);
  std::vector<double> depth_acc(img.alpha.size(), 0.0);

  std::vector<std::size_t> order;
  order.reserve(splats.size());
  for (std::size_t i = 0; i < splats.size(); ++i)
    if (!splats[i].culled) order.push_back(i);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (splats[a].depth != splats[b].depth) return splats[a].depth < splats[b].depth;
    return splats[a].source < splats[b].source;
  });

  for (std::size_t oi : order) {
    const Splat2D& s = splats[oi];
    double det = s.cov_xx * s.cov_yy - s.cov_xy * s.cov_xy;
    if (!(det > 0.0)) continue;  // cannot happen after the covariance floor
    double inv_xx = s.cov_yy / det;
    double inv_xy = -s.cov_xy / det;
    double inv_yy = s.cov_xx / det;

    double rx = kCutoffSigma * std::sqrt(s.cov_xx);
    double ry = kCutoffSigma * std::sqrt(s.cov_yy);
    int x0 = std::max(0, static_cast<int>(std::floor(s.mean_x - rx - 0.5)));
    int x1 = std::min(cam.width - 1, static_cast<int>(std::ceil(s.mean_x + rx - 0.5)));
    int y0 = std::max(0, static_cast<int>(std::floor(s.mean_y - ry - 0.5)));
    int y1 = std::min(cam.height - 1, static_cast<int>(std::ceil(s.mean_y + ry - 0.5)));

    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        std::size_t idx = img.index(x, y);
        double tr = transmittance[idx];
        if (tr < kMinTransmittance) continue;
        double dx = x + 0.5 - s.mean_x;
        double dy = y + 0.5 - s.mean_y;
        double q = 0.5 * (inv_xx * dx * dx + 2.0 * inv_xy * dx * dy + inv_yy * dy * dy);
        if (q > 0.5 * kCutoffSigma * kCutoffSigma) continue;
        double alpha = s.opacity * std::exp(-q);
        double w = tr * alpha;
        double* p = &img.rgb[3 * idx];
        p[0] += w * s.color.x;
        p[1] += w * s.color.y;
        p[2] += w * s.color.z;
        depth_acc[idx] += w * s.depth;
        transmittance[idx] = tr * (1.0 - alpha);
      }
    }
  }

  for (std::size_t i = 0; i < img.alpha.size(); ++i) {
    double a = 1.0 - transmittance[i];
    img.alpha[i] = a;
    img.depth[i] = a > 0.0 ? depth_acc[i] / a : std::numeric_limits<double>::infinity();
  }
  return img;
}

ImageRGBA render(const GaussianCloud& cloud, const Camera& cam) {
  cam.validate();
  for (const auto& g : cloud.gaussians) g.validate();
  std::vector<Splat2D> splats(cloud.gaussians.size());
  parallel_for(cloud.gaussians.size(), [&](std::size_t i) {
    splats[i] = project_gaussian(cam, cloud.gaussians[i], i);
  });
  return composite(cam, splats);
}

Camera load_camera(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open camera file: " + path);
  Camera cam;
  bool have_w = false, have_h = false;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto begin = line.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError(path + ":" + std::to_string(line_no) + ": expected key = value");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    auto trim = [](std::string& s) {
      auto b = s.find_first_not_of(" \t\r\n");
      auto e = s.find_last_not_of(" \t\r\n");
      s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
    };
    trim(key);
    trim(value);
    std::istringstream vs(value);
    auto fail = [&]() {
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": cannot parse value for '" + key + "'");
    };
    if (key == "width") { if (!(vs >> cam.width)) fail(); have_w = true; }
    else if (key == "height") { if (!(vs >> cam.height)) fail(); have_h = true; }
    else if (key == "fx") { if (!(vs >> cam.fx)) fail(); }
    else if (key == "fy") { if (!(vs >> cam.fy)) fail(); }
    else if (key == "cx") { if (!(vs >> cam.cx)) fail(); }
    else if (key == "cy") { if (!(vs >> cam.cy)) fail(); }
    else if (key == "near") { if (!(vs >> cam.near)) fail(); }
    else if (key == "rotation") {
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          if (!(vs >> cam.rotation[i][j])) fail();
    } else if (key == "translation") {
      if (!(vs >> cam.translation.x >> cam.translation.y >> cam.translation.z)) fail();
    } else {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  if (!have_w || !have_h)
    throw ValidationError(path + ": camera file must set width and height");
  cam.validate();
  return cam;
}

void save_camera(const Camera& cam, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write camera file: " + path);
  out.precision(17);
  out << "width = " << cam.width << "\nheight = " << cam.height << "\n";
  out << "fx = " << cam.fx << "\nfy = " << cam.fy << "\n";
  out << "cx = " << cam.cx << "\ncy = " << cam.cy << "\n";
  out << "near = " << cam.near << "\n";
  out << "rotation =";
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out << ' ' << cam.rotation[i][j];
  out << "\ntranslation = " << cam.translation.x << ' ' << cam.translation.y << ' '
      << cam.translation.z << "\n";
}

}  // namespace kgas
