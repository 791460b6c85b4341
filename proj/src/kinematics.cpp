#include "kgas/kinematics.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "kgas/error.hpp"

namespace kgas {

void KinematicTree::validate() const {
  if (parent.size() != rest.size())
    throw ValidationError("kinematic tree: parent and rest arrays differ in length");
  if (parent.empty()) throw ValidationError("kinematic tree: no joints");
  for (std::size_t i = 0; i < parent.size(); ++i) {
    int p = parent[i];
    if (p != -1 && (p < 0 || static_cast<std::size_t>(p) >= i))
      throw ValidationError("kinematic tree: parent of joint " + std::to_string(i) +
                            " must be -1 or a smaller index");
  }
}

void SkinWeights::validate(std::size_t joint_count) const {
  for (std::size_t v = 0; v < rows.size(); ++v) {
    const auto& row = rows[v];
    if (row.empty() || row.size() > 4)
      throw ValidationError("skin weights: vertex " + std::to_string(v) +
                            " must bind 1 to 4 joints");
    double sum = 0.0;
    for (const auto& e : row) {
      if (e.joint < 0 || static_cast<std::size_t>(e.joint) >= joint_count)
        throw ValidationError("skin weights: vertex " + std::to_string(v) +
                              " references invalid joint " + std::to_string(e.joint));
      if (e.weight < 0.0)
        throw ValidationError("skin weights: vertex " + std::to_string(v) +
                              " has a negative weight");
      sum += e.weight;
    }
    if (std::abs(sum - 1.0) > 1e-6)
      throw ValidationError("skin weights: vertex " + std::to_string(v) +
                            " weights sum to " + std::to_string(sum) + ", expected 1");
  }
}

JointTransforms forward_kinematics(const KinematicTree& tree, const Pose& pose) {
  tree.validate();
  if (pose.size() != tree.joint_count())
    throw ValidationError("forward kinematics: pose size does not match joint count");
  std::size_t n = tree.joint_count();
  JointTransforms out;
  out.rotation.resize(n);
  out.translation.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    // Local transform rotates about the rest joint position:
    // x -> R (x - j) + j.
    const Mat3& r = pose[k].m;
    Vec3 t = tree.rest[k] - r * tree.rest[k];
    int p = tree.parent[k];
    if (p == -1) {
      out.rotation[k] = r;
      out.translation[k] = t;
    } else {
      out.rotation[k] = out.rotation[p] * r;
      out.translation[k] = out.rotation[p] * t + out.translation[p];
    }
  }
  return out;
}

std::vector<Vec3> lbs_skin(const SkinWeights& weights,
                           const JointTransforms& transforms,
                           const std::vector<Vec3>& vertices) {
  if (weights.rows.size() != vertices.size())
    throw ValidationError("lbs: weight rows do not match vertex count");
  weights.validate(transforms.rotation.size());
  std::vector<Vec3> out(vertices.size());
  for (std::size_t v = 0; v < vertices.size(); ++v) {
    Vec3 acc{0.0, 0.0, 0.0};
    for (const auto& e : weights.rows[v]) {
      acc += e.weight * (transforms.rotation[e.joint] * vertices[v] +
                         transforms.translation[e.joint]);
    }
    out[v] = acc;
  }
  return out;
}

std::vector<FisherParams> jntm_propagate(const KinematicTree& tree,
                                         const std::vector<FisherParams>& params,
                                         double gamma) {
  tree.validate();
  if (params.size() != tree.joint_count())
    throw ValidationError("motion propagation: parameter count does not match joint count");
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw ValidationError("motion propagation: gamma must lie in [0, 1]");
  std::vector<FisherParams> refined;
  refined.reserve(params.size());
  for (std::size_t k = 0; k < params.size(); ++k) {
    int p = tree.parent[k];
    if (p == -1) {
      refined.push_back(params[k]);
      continue;
    }
    RotationMatrix parent_mode = mode(refined[p]);
    AxisAngle aa = log_so3(parent_mode);
    RotationMatrix geo = exp_so3(AxisAngle{aa.axis, gamma * aa.angle});
    refined.push_back(FisherParams::from(geo.m * params[k].f));
  }
  return refined;
}

MotionFactors motion_factors(const std::vector<FisherParams>& params) {
  MotionFactors out;
  out.s.reserve(params.size());
  out.r_mode.reserve(params.size());
  for (const auto& p : params) {
    out.s.push_back(p.svd.s);
    out.r_mode.push_back(mode(p));
  }
  return out;
}

namespace {

// Strips comments and surrounding whitespace; returns false for blank lines.
bool clean_line(std::string& line) {
  auto hash = line.find('#');
  if (hash != std::string::npos) line.erase(hash);
  auto begin = line.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return false;
  auto end = line.find_last_not_of(" \t\r\n");
  line = line.substr(begin, end - begin + 1);
  return true;
}

[[noreturn]] void parse_fail(const std::string& path, int line_no, const std::string& what) {
  throw ValidationError(path + ":" + std::to_string(line_no) + ": " + what);
}

}  // namespace

Rig load_rig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open rig file: " + path);

  Rig rig;
  std::vector<std::pair<int, std::vector<SkinWeightEntry>>> weight_rows;
  enum class Section { None, Joints, Weights, Vertices } section = Section::None;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!clean_line(line)) continue;
    if (line == "joints") { section = Section::Joints; continue; }
    if (line == "weights") { section = Section::Weights; continue; }
    if (line == "vertices") { section = Section::Vertices; continue; }

    std::istringstream ss(line);
    switch (section) {
      case Section::None:
        parse_fail(path, line_no, "data before any section header");
      case Section::Joints: {
        int idx = 0, parent = 0;
        Vec3 p;
        if (!(ss >> idx >> parent >> p.x >> p.y >> p.z))
          parse_fail(path, line_no, "expected 'index parent x y z'");
        if (idx != static_cast<int>(rig.tree.parent.size()))
          parse_fail(path, line_no, "joint indices must be consecutive from 0");
        rig.tree.parent.push_back(parent);
        rig.tree.rest.push_back(p);
        break;
      }
      case Section::Weights: {
        int vertex = 0;
        if (!(ss >> vertex))
          parse_fail(path, line_no, "expected 'vertex joint:weight ...'");
        std::vector<SkinWeightEntry> row;
        std::string pair;
        while (ss >> pair) {
          auto colon = pair.find(':');
          if (colon == std::string::npos)
            parse_fail(path, line_no, "weight entry '" + pair + "' is not joint:weight");
          try {
            SkinWeightEntry e;
            e.joint = std::stoi(pair.substr(0, colon));
            e.weight = std::stod(pair.substr(colon + 1));
            row.push_back(e);
          } catch (const std::exception&) {
            parse_fail(path, line_no, "cannot parse weight entry '" + pair + "'");
          }
        }
        if (row.empty()) parse_fail(path, line_no, "vertex binds no joints");
        weight_rows.emplace_back(vertex, std::move(row));
        break;
      }
      case Section::Vertices: {
        Vec3 p;
        if (!(ss >> p.x >> p.y >> p.z))
          parse_fail(path, line_no, "expected 'x y z'");
        rig.vertices.push_back(p);
        break;
      }
    }
  }

  rig.weights.rows.resize(weight_rows.size());
  for (std::size_t i = 0; i < weight_rows.size(); ++i) {
    if (weight_rows[i].first != static_cast<int>(i))
      throw ValidationError(path + ": weight rows must cover vertices 0.." +
                            std::to_string(weight_rows.size() - 1) + " in order");
    rig.weights.rows[i] = std::move(weight_rows[i].second);
  }
  rig.validate();
  return rig;
}

void Rig::validate() const {
  tree.validate();
  weights.validate(tree.joint_count());
  if (weights.rows.size() != vertices.size())
    throw ValidationError("rig: weight rows (" + std::to_string(weights.rows.size()) +
                          ") do not match vertex count (" + std::to_string(vertices.size()) + ")");
}

void save_rig(const Rig& rig, const std::string& path) {
  rig.validate();
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write rig file: " + path);
  out.precision(17);
  out << "joints\n";
  for (std::size_t i = 0; i < rig.tree.joint_count(); ++i) {
    out << i << ' ' << rig.tree.parent[i] << ' ' << rig.tree.rest[i].x << ' '
        << rig.tree.rest[i].y << ' ' << rig.tree.rest[i].z << '\n';
  }
  out << "weights\n";
  for (std::size_t v = 0; v < rig.weights.rows.size(); ++v) {
    out << v;
    for (const auto& e : rig.weights.rows[v]) out << ' ' << e.joint << ':' << e.weight;
    out << '\n';
  }
  out << "vertices\n";
  for (const auto& p : rig.vertices)
    out << p.x << ' ' << p.y << ' ' << p.z << '\n';
}

}  // namespace kgas
