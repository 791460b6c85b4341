#include "kgas/cloud.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "kgas/error.hpp"

namespace kgas {

void Gaussian3D::validate() const {
  if (!(scale.x > 1e-8 && scale.y > 1e-8 && scale.z > 1e-8))
    throw ValidationError("gaussian scale components must exceed 1e-8");
  if (!(opacity > 0.0 && opacity <= 1.0))
    throw ValidationError("gaussian opacity must lie in (0, 1]");
  for (int i = 0; i < 3; ++i)
    if (!(color[i] >= 0.0 && color[i] <= 1.0))
      throw ValidationError("gaussian color channels must lie in [0, 1]");
  if (!rotation.valid())
    throw ValidationError("gaussian rotation is not a valid rotation matrix");
}

void GaussianCloud::validate(std::size_t joint_count) const {
  for (const auto& g : gaussians) g.validate();
  if (!binding.rows.empty()) {
    if (binding.rows.size() != gaussians.size())
      throw ValidationError("cloud binding rows do not match gaussian count");
    binding.validate(joint_count);
  }
}

Mat3 covariance(const Gaussian3D& g) {
  Mat3 s2 = Mat3::diag(g.scale.x * g.scale.x, g.scale.y * g.scale.y,
                       g.scale.z * g.scale.z);
  return g.rotation.m * s2 * transpose(g.rotation.m);
}

void covariance_inverse_det(const Gaussian3D& g, Mat3& inverse, double& determinant) {
  if (!(g.scale.x > 1e-8 && g.scale.y > 1e-8 && g.scale.z > 1e-8))
    throw NumericError("covariance inverse: scale component at or below 1e-8");
  Mat3 inv_s2 = Mat3::diag(1.0 / (g.scale.x * g.scale.x),
                           1.0 / (g.scale.y * g.scale.y),
                           1.0 / (g.scale.z * g.scale.z));
  inverse = g.rotation.m * inv_s2 * transpose(g.rotation.m);
  double p = g.scale.x * g.scale.y * g.scale.z;
  determinant = p * p;
}

Vec3 normalize_motion_scale(const Vec3& s_factor) {
  Vec3 a{std::abs(s_factor.x), std::abs(s_factor.y), std::abs(s_factor.z)};
  double m = std::max({a.x, a.y, a.z});
  if (m < 1e-12) return {1.0, 1.0, 1.0};
  return a / m;
}

Vec3 density_perceptual_sample(const Gaussian3D& g, const Vec3& s_factor,
                               std::uint64_t seed) {
  Rng rng(seed);
  Vec3 z{rng.normal(), rng.normal(), rng.normal()};
  Vec3 radii{std::abs(s_factor.x) * g.scale.x, std::abs(s_factor.y) * g.scale.y,
             std::abs(s_factor.z) * g.scale.z};
  return g.rotation.m * Vec3{radii.x * z.x, radii.y * z.y, radii.z * z.z};
}

Gaussian3D clone_with_motion(const Gaussian3D& g, const Vec3& s_factor,
                             const RotationMatrix& r_mode, std::uint64_t seed) {
  Vec3 shat = normalize_motion_scale(s_factor);
  Gaussian3D child = g;
  child.position = g.position + density_perceptual_sample(g, shat, seed);
  child.scale = {shat.x * g.scale.x, shat.y * g.scale.y, shat.z * g.scale.z};
  child.rotation = RotationMatrix{r_mode.m * g.rotation.m};
  return child;
}

std::pair<Gaussian3D, Gaussian3D> split_with_motion(const Gaussian3D& g,
                                                    const Vec3& s_factor,
                                                    const RotationMatrix& r_mode,
                                                    double phi, std::uint64_t seed) {
  if (!(phi > 1.0))
    throw ValidationError("split factor must exceed 1");
  Vec3 shat = normalize_motion_scale(s_factor);
  Rng base(seed);
  auto make_child = [&](std::uint64_t stream) {
    Gaussian3D child = g;
    child.position =
        g.position + density_perceptual_sample(g, shat, base.fork(stream).next_u64());
    child.scale = {shat.x * g.scale.x / phi, shat.y * g.scale.y / phi,
                   shat.z * g.scale.z / phi};
    child.rotation = RotationMatrix{r_mode.m * g.rotation.m};
    return child;
  };
  return {make_child(0), make_child(1)};
}

namespace {

// Dominant joint of a binding row: largest weight, ties to the smaller index.
int dominant_joint(const std::vector<SkinWeightEntry>& row) {
  int best = row[0].joint;
  double best_w = row[0].weight;
  for (const auto& e : row) {
    if (e.weight > best_w || (e.weight == best_w && e.joint < best)) {
      best = e.joint;
      best_w = e.weight;
    }
  }
  return best;
}

}  // namespace

GaussianCloud densify(const GaussianCloud& cloud,
                      const std::vector<DensifyCandidate>& candidates,
                      const MotionFactors& factors, double mode_threshold,
                      double phi, std::uint64_t seed, DensifyStats* stats) {
  if (!cloud.bound())
    throw ValidationError("densify requires a cloud with joint binding");
  cloud.validate(factors.s.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].index >= cloud.gaussians.size())
      throw ValidationError("densify candidate index out of range");
    if (i > 0 && candidates[i].index <= candidates[i - 1].index)
      throw ValidationError("densify candidates must be sorted and unique");
  }

  Rng base(seed);
  std::vector<bool> removed(cloud.gaussians.size(), false);
  std::vector<Gaussian3D> fresh;
  std::vector<std::vector<SkinWeightEntry>> fresh_rows;
  DensifyStats local;
  for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
    std::size_t idx = candidates[ci].index;
    const Gaussian3D& g = cloud.gaussians[idx];
    const auto& row = cloud.binding.rows[idx];
    int joint = dominant_joint(row);
    const Vec3& s_factor = factors.s[joint];
    const RotationMatrix& r_mode = factors.r_mode[joint];
    std::uint64_t child_seed = base.fork(ci).next_u64();
    double max_scale = std::max({g.scale.x, g.scale.y, g.scale.z});
    if (max_scale > mode_threshold) {
      auto [a, b] = split_with_motion(g, s_factor, r_mode, phi, child_seed);
      removed[idx] = true;
      fresh.push_back(a);
      fresh.push_back(b);
      fresh_rows.push_back(row);
      fresh_rows.push_back(row);
      ++local.split;
    } else {
      fresh.push_back(clone_with_motion(g, s_factor, r_mode, child_seed));
      fresh_rows.push_back(row);
      ++local.cloned;
    }
  }

  GaussianCloud out;
  out.gaussians.reserve(cloud.gaussians.size() + candidates.size());
  out.binding.rows.reserve(out.gaussians.capacity());
  for (std::size_t i = 0; i < cloud.gaussians.size(); ++i) {
    if (removed[i]) continue;
    out.gaussians.push_back(cloud.gaussians[i]);
    out.binding.rows.push_back(cloud.binding.rows[i]);
  }
  for (std::size_t i = 0; i < fresh.size(); ++i) {
    out.gaussians.push_back(fresh[i]);
    out.binding.rows.push_back(fresh_rows[i]);
  }
  if (stats) *stats = local;
  return out;
}

GaussianCloud articulate(const GaussianCloud& cloud,
                         const JointTransforms& transforms) {
  if (!cloud.bound())
    throw ValidationError("articulate requires a cloud with joint binding");
  cloud.validate(transforms.rotation.size());
  GaussianCloud out = cloud;
  for (std::size_t i = 0; i < cloud.gaussians.size(); ++i) {
    const auto& row = cloud.binding.rows[i];
    const Gaussian3D& g = cloud.gaussians[i];
    Vec3 pos{0.0, 0.0, 0.0};
    for (const auto& e : row)
      pos += e.weight *
             (transforms.rotation[e.joint] * g.position + transforms.translation[e.joint]);
    int joint = dominant_joint(row);
    out.gaussians[i].position = pos;
    out.gaussians[i].rotation =
        RotationMatrix{transforms.rotation[joint] * g.rotation.m};
  }
  return out;
}

namespace {

constexpr const char* kCloudProps[] = {"x",       "y",       "z",       "rot_w",
                                       "rot_x",   "rot_y",   "rot_z",   "scale_x",
                                       "scale_y", "scale_z", "opacity", "red",
                                       "green",   "blue"};

struct PlyHeader {
  std::size_t count = 0;
  std::vector<std::string> props;
  std::streampos body;
};

PlyHeader read_ply_header(std::ifstream& in, const std::string& path) {
  PlyHeader h;
  std::string line;
  if (!std::getline(in, line) || (line != "ply" && line != "ply\r"))
    throw ValidationError(path + ": not a PLY file");
  bool ascii = false, ended = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    if (tok == "comment") continue;
    if (tok == "format") {
      std::string kind;
      ss >> kind;
      if (kind != "ascii") throw ValidationError(path + ": only ASCII PLY is supported");
      ascii = true;
    } else if (tok == "element") {
      std::string name;
      ss >> name >> h.count;
      if (name != "vertex")
        throw ValidationError(path + ": expected a single vertex element");
    } else if (tok == "property") {
      std::string type, name;
      ss >> type >> name;
      if (type == "list") throw ValidationError(path + ": list properties are not supported");
      h.props.push_back(name);
    } else if (tok == "end_header") {
      ended = true;
      break;
    } else if (!tok.empty()) {
      throw ValidationError(path + ": unknown header line '" + line + "'");
    }
  }
  if (!ascii || !ended) throw ValidationError(path + ": malformed PLY header");
  h.body = in.tellg();
  return h;
}

}  // namespace

void save_ply_cloud(const GaussianCloud& cloud, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write PLY file: " + path);
  out << "ply\nformat ascii 1.0\nelement vertex " << cloud.gaussians.size() << "\n";
  for (const char* p : kCloudProps) out << "property float " << p << "\n";
  out << "end_header\n";
  out << std::setprecision(9);
  for (const auto& g : cloud.gaussians) {
    double w, x, y, z;
    mat_to_quat(g.rotation.m, w, x, y, z);
    out << g.position.x << ' ' << g.position.y << ' ' << g.position.z << ' ' << w
        << ' ' << x << ' ' << y << ' ' << z << ' ' << g.scale.x << ' ' << g.scale.y
        << ' ' << g.scale.z << ' ' << g.opacity << ' ' << g.color.x << ' '
        << g.color.y << ' ' << g.color.z << '\n';
  }
}

GaussianCloud load_ply_cloud(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open PLY file: " + path);
  PlyHeader h = read_ply_header(in, path);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < h.props.size(); ++i) col[h.props[i]] = i;
  for (const char* p : kCloudProps)
    if (!col.count(p))
      throw ValidationError(path + ": missing Gaussian property '" + std::string(p) + "'");

  GaussianCloud cloud;
  cloud.gaussians.reserve(h.count);
  std::vector<double> row(h.props.size());
  for (std::size_t r = 0; r < h.count; ++r) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (!(in >> row[c]))
        throw ValidationError(path + ": truncated vertex data at row " + std::to_string(r));
    }
    Gaussian3D g;
    g.position = {row[col["x"]], row[col["y"]], row[col["z"]]};
    double qw = row[col["rot_w"]], qx = row[col["rot_x"]], qy = row[col["rot_y"]],
           qz = row[col["rot_z"]];
    double qn = std::sqrt(qw * qw + qx * qx + qy * qy + qz * qz);
    if (std::abs(qn - 1.0) > 1e-3)
      throw ValidationError(path + ": row " + std::to_string(r) +
                            " rotation quaternion is not unit length (|q| = " +
                            std::to_string(qn) + ")");
    g.rotation = RotationMatrix{quat_to_mat(qw, qx, qy, qz)};
    g.scale = {row[col["scale_x"]], row[col["scale_y"]], row[col["scale_z"]]};
    g.opacity = row[col["opacity"]];
    g.color = {row[col["red"]], row[col["green"]], row[col["blue"]]};
    g.validate();
    cloud.gaussians.push_back(g);
  }
  return cloud;
}

void save_ply_points(const std::vector<Vec3>& points, const std::string& path,
                     const std::vector<Vec3>* normals) {
  if (normals && normals->size() != points.size())
    throw ValidationError("point PLY: normals do not match point count");
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write PLY file: " + path);
  out << "ply\nformat ascii 1.0\nelement vertex " << points.size() << "\n";
  out << "property float x\nproperty float y\nproperty float z\n";
  if (normals)
    out << "property float nx\nproperty float ny\nproperty float nz\n";
  out << "end_header\n";
  out << std::setprecision(9);
  for (std::size_t i = 0; i < points.size(); ++i) {
    out << points[i].x << ' ' << points[i].y << ' ' << points[i].z;
    if (normals)
      out << ' ' << (*normals)[i].x << ' ' << (*normals)[i].y << ' ' << (*normals)[i].z;
    out << '\n';
  }
}

std::vector<Vec3> load_ply_points(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open PLY file: " + path);
  PlyHeader h = read_ply_header(in, path);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < h.props.size(); ++i) col[h.props[i]] = i;
  for (const char* p : {"x", "y", "z"})
    if (!col.count(p))
      throw ValidationError(path + ": missing point property '" + std::string(p) + "'");
  std::vector<Vec3> points;
  points.reserve(h.count);
  std::vector<double> row(h.props.size());
  for (std::size_t r = 0; r < h.count; ++r) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (!(in >> row[c]))
        throw ValidationError(path + ": truncated vertex data at row " + std::to_string(r));
    }
    points.push_back({row[col["x"]], row[col["y"]], row[col["z"]]});
  }
  return points;
}

}  // namespace kgas
