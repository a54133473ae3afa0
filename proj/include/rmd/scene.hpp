#ifndef RMD_SCENE_HPP_
#define RMD_SCENE_HPP_

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rmd/geometry.hpp"
#include "rmd/plan.hpp"
#include "rmd/skeleton.hpp"

namespace rmd {

//! Box in the object's yaw-aligned local frame.
struct Aabb {
  Vec3 center = Vec3::Zero();
  Vec3 half_extents = Vec3::Constant(0.5);
  double yaw = 0.0;

  Vec3 size() const { return 2.0 * half_extents; }
};

//! Named point cloud in the object-local frame (origin at the box center).
struct ObjectPart {
  std::string name;
  std::vector<Vec3> points;
};

struct ObjectState {
  Vec3 position = Vec3::Zero();
  //! Intrinsic XYZ Euler angles, each wrapped to (-pi, pi].
  Vec3 rotation = Vec3::Zero();
  Vec3 linear_velocity = Vec3::Zero();
  Vec3 angular_velocity = Vec3::Zero();

  Mat3 rotation_matrix() const { return euler_xyz_to_matrix(rotation); }

  double heading() const {
    double yaw = rotation.z();
    heading_of(rotation_matrix(), yaw);
    return yaw;
  }

  Vec3 to_world(const Vec3& local) const { return position + rotation_matrix() * local; }
};

//! Revolute joint about the world z axis. Angle 0 is the loaded pose.
struct Hinge {
  Vec3 pivot = Vec3::Zero();  // world
  double angle = 0.0;
  double min_angle = -kPi;
  double max_angle = kPi;
  Vec3 base_position = Vec3::Zero();
  double base_yaw = 0.0;

  //! Object root position and heading at the given hinge angle.
  std::pair<Vec3, double> pose_at(double a) const {
    const Vec3 arm = base_position - pivot;
    return {pivot + yaw_matrix(a) * arm, wrap_angle(base_yaw + a)};
  }
};

struct SceneObject {
  std::string name;
  Aabb aabb;
  std::vector<ObjectPart> parts;
  bool movable = false;
  //! Non-physical marker; usable as a target, invisible to the heightmap.
  bool waypoint = false;
  std::optional<Hinge> hinge;
  ObjectState state;

  const ObjectPart* find_part(std::string_view part) const {
    for (const auto& p : parts) {
      if (p.name == part) return &p;
    }
    return nullptr;
  }

  //! World-frame corners of the box at the current state.
  std::array<Vec3, 8> vertices() const {
    std::array<Vec3, 8> out;
    const Vec3& h = aabb.half_extents;
    for (int i = 0; i < 8; ++i) {
      const Vec3 local((i & 1) ? h.x() : -h.x(), (i & 2) ? h.y() : -h.y(),
                       (i & 4) ? h.z() : -h.z());
      out[i] = state.to_world(local);
    }
    return out;
  }
};

//! Regular elevation grid; heights are row-major with rows along +y.
struct HeightField {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double spacing = 1.0;
  int rows = 0;
  int cols = 0;
  std::vector<double> heights;

  double at(double x, double y) const {
    if (rows == 0 || cols == 0) return 0.0;
    const double gx = std::clamp((x - origin_x) / spacing, 0.0, double(cols - 1));
    const double gy = std::clamp((y - origin_y) / spacing, 0.0, double(rows - 1));
    const int c0 = std::min(int(gx), cols - 1);
    const int r0 = std::min(int(gy), rows - 1);
    const int c1 = std::min(c0 + 1, cols - 1);
    const int r1 = std::min(r0 + 1, rows - 1);
    const double fx = gx - c0;
    const double fy = gy - r0;
    auto h = [&](int r, int c) { return heights[std::size_t(r) * cols + c]; };
    return (1 - fy) * ((1 - fx) * h(r0, c0) + fx * h(r0, c1)) +
           fy * ((1 - fx) * h(r1, c0) + fx * h(r1, c1));
  }
};

struct Scene {
  std::string scene_id;
  std::vector<SceneObject> objects;
  std::optional<HeightField> ground;
  Vec3 agent_start = Vec3::Zero();  // ground point; z ignored
  double agent_yaw = 0.0;

  const SceneObject* find(std::string_view name) const {
    for (const auto& o : objects) {
      if (o.name == name) return &o;
    }
    return nullptr;
  }
  SceneObject* find(std::string_view name) {
    for (auto& o : objects) {
      if (o.name == name) return &o;
    }
    return nullptr;
  }
  const SceneObject& at(std::string_view name) const;
};

class SceneError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

//! A name (object, part, body) that does not resolve.
class UnknownNameError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline const SceneObject& Scene::at(std::string_view name) const {
  const auto* o = find(name);
  if (o == nullptr) throw UnknownNameError("unknown object: " + std::string(name));
  return *o;
}

inline constexpr double kPartInflation = 0.05;
inline constexpr double kRelationScale = 0.7;

/*
 * Displacement of a relation token in the object's local frame, as a fraction
 * of the box edge lengths.
 */
inline Vec3 relation_displacement(Relation relation, const Vec3& size) {
  const double k = kRelationScale;
  switch (relation) {
    case Relation::Center: return Vec3::Zero();
    case Relation::Forward: return {k * size.x(), 0.0, 0.0};
    case Relation::Back: return {-k * size.x(), 0.0, 0.0};
    case Relation::Left: return {0.0, k * size.y(), 0.0};
    case Relation::Right: return {0.0, -k * size.y(), 0.0};
    case Relation::Up: return {0.0, 0.0, k * size.z()};
    case Relation::Down: return {0.0, 0.0, -k * size.z()};
  }
  return Vec3::Zero();
}

//! World position named by `object(relation)` at the object's current pose.
inline Vec3 resolve_target(const TargetSpec& spec, const Scene& scene) {
  const SceneObject& obj = scene.at(spec.object);
  return obj.state.position +
         yaw_matrix(obj.state.heading()) * relation_displacement(spec.relation, obj.aabb.size());
}

struct SurfacePoint {
  Vec3 point = Vec3::Zero();
  std::size_t index = 0;
};

//! Closest transformed part point to `query`; ties go to the lowest index.
inline SurfacePoint nearest_surface_point(const ObjectPart& part, const ObjectState& pose,
                                          const Vec3& query) {
  if (part.points.empty()) throw std::invalid_argument("part '" + part.name + "' has no points");
  const Mat3 r = pose.rotation_matrix();
  SurfacePoint best;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < part.points.size(); ++i) {
    const Vec3 p = pose.position + r * part.points[i];
    const double d2 = (p - query).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = {p, i};
    }
  }
  return best;
}

//! Rigid-body velocity field of the object evaluated at a world point.
inline Vec3 surface_point_velocity(const ObjectState& state, const Vec3& point_world) {
  return state.linear_velocity + state.angular_velocity.cross(point_world - state.position);
}

inline constexpr int kHeightmapSize = 9;
inline constexpr int kHeightmapCells = kHeightmapSize * kHeightmapSize;
inline constexpr double kHeightmapSpacing = 0.2;

using Heightmap = std::array<double, kHeightmapCells>;

//! World xy of lattice cell (i, j): i steps forward, j steps left of the root.
inline Vec3 heightmap_cell_position(const Vec3& root, double yaw, int i, int j) {
  const int half = kHeightmapSize / 2;
  const Vec3 local((i - half) * kHeightmapSpacing, (j - half) * kHeightmapSpacing, 0.0);
  Vec3 p = yaw_matrix(yaw) * local;
  p.x() += root.x();
  p.y() += root.y();
  return p;
}

//! Elevation of the tallest surface (ground or object top) above a world xy.
inline double elevation_at(const Scene& scene, double x, double y) {
  double h = scene.ground ? scene.ground->at(x, y) : 0.0;
  for (const auto& obj : scene.objects) {
    if (obj.waypoint) continue;
    const Mat3 r = yaw_matrix(-obj.state.heading());
    const Vec3 local = r * Vec3(x - obj.state.position.x(), y - obj.state.position.y(), 0.0);
    if (std::abs(local.x()) > obj.aabb.half_extents.x() ||
        std::abs(local.y()) > obj.aabb.half_extents.y())
      continue;
    double top = -std::numeric_limits<double>::infinity();
    for (const auto& v : obj.vertices()) top = std::max(top, v.z());
    h = std::max(h, top);
  }
  return h;
}

inline double root_heading(const AgentState& agent, double fallback = 0.0) {
  double yaw = fallback;
  heading_of(agent.root().rotation.toRotationMatrix(), yaw);
  return yaw;
}

/*
 * 9x9 elevation samples around the root, lattice aligned with the root
 * heading; entry i * 9 + j is i cells forward and j cells left (offset by 4).
 */
inline Heightmap sample_heightmap(const Scene& scene, const AgentState& agent,
                                  double fallback_yaw = 0.0) {
  Heightmap out{};
  const Vec3& root = agent.root().position;
  const double yaw = root_heading(agent, fallback_yaw);
  for (int i = 0; i < kHeightmapSize; ++i) {
    for (int j = 0; j < kHeightmapSize; ++j) {
      const Vec3 p = heightmap_cell_position(root, yaw, i, j);
      out[i * kHeightmapSize + j] = elevation_at(scene, p.x(), p.y());
    }
  }
  return out;
}

//! Result of resolving an edge's object-part token.
struct PartRef {
  const SceneObject* object = nullptr;
  const ObjectPart* part = nullptr;
  std::string error;

  explicit operator bool() const { return part != nullptr; }
};

/*
 * Resolves a part token: "object.part" is explicit; a bare token is looked up
 * in the object target's object, then the human target's object, then anywhere
 * in the scene (must be unique).
 */
inline PartRef resolve_part(const InteractionStep& step, const Scene& scene,
                            std::string_view token) {
  PartRef ref;
  const auto dot = token.find('.');
  if (dot != std::string_view::npos) {
    const auto* obj = scene.find(token.substr(0, dot));
    if (obj == nullptr) {
      ref.error = "unknown object: " + std::string(token.substr(0, dot));
      return ref;
    }
    const auto* part = obj->find_part(token.substr(dot + 1));
    if (part == nullptr) {
      ref.error = "unknown part: " + std::string(token);
      return ref;
    }
    return {obj, part, {}};
  }
  for (const TargetSpec* t : {step.object_target ? &*step.object_target : nullptr,
                              &step.human_target}) {
    if (t == nullptr) continue;
    if (const auto* obj = scene.find(t->object)) {
      if (const auto* part = obj->find_part(token)) return {obj, part, {}};
    }
  }
  for (const auto& obj : scene.objects) {
    if (const auto* part = obj.find_part(token)) {
      if (ref.part != nullptr) {
        return {nullptr, nullptr, "ambiguous part: " + std::string(token)};
      }
      ref = {&obj, part, {}};
    }
  }
  if (!ref) ref.error = "unknown part: " + std::string(token);
  return ref;
}

inline PartRef require_part(const InteractionStep& step, const Scene& scene,
                            std::string_view token) {
  PartRef ref = resolve_part(step, scene, token);
  if (!ref) throw UnknownNameError(ref.error);
  return ref;
}

namespace detail {

inline Vec3 read_vec3(const nlohmann::json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) throw SceneError(path + ": expected [x, y, z]");
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) throw SceneError(path + ": expected numbers");
    v[i] = j[i].get<double>();
  }
  return v;
}

inline const nlohmann::json& scene_field(const nlohmann::json& j, const char* key,
                                         const std::string& path) {
  const auto it = j.find(key);
  if (it == j.end()) throw SceneError(path + ": missing field '" + key + "'");
  return *it;
}

inline double read_number(const nlohmann::json& j, const std::string& path) {
  if (!j.is_number()) throw SceneError(path + ": expected number");
  return j.get<double>();
}

inline SceneObject read_object(const nlohmann::json& j, const std::string& path) {
  if (!j.is_object()) throw SceneError(path + ": expected object");
  SceneObject obj;
  const auto& name = scene_field(j, "name", path);
  if (!name.is_string() || name.get<std::string>().empty())
    throw SceneError(path + ".name: expected non-empty string");
  obj.name = name.get<std::string>();
  const auto& movable = scene_field(j, "movable", path);
  if (!movable.is_boolean()) throw SceneError(path + ".movable: expected bool");
  obj.movable = movable.get<bool>();
  obj.waypoint = j.value("waypoint", false);

  const auto& box = scene_field(j, "aabb", path);
  obj.aabb.center = read_vec3(scene_field(box, "center", path + ".aabb"), path + ".aabb.center");
  const Vec3 size = read_vec3(scene_field(box, "size", path + ".aabb"), path + ".aabb.size");
  if ((size.array() <= 0.0).any())
    throw SceneError(path + ".aabb.size: edge lengths must be positive");
  obj.aabb.half_extents = 0.5 * size;
  if (box.contains("yaw")) obj.aabb.yaw = read_number(box["yaw"], path + ".aabb.yaw");

  std::set<std::string> part_names;
  if (j.contains("parts")) {
    const auto& parts = j["parts"];
    if (!parts.is_array()) throw SceneError(path + ".parts: expected array");
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const std::string ppath = path + ".parts[" + std::to_string(i) + "]";
      ObjectPart part;
      const auto& pname = scene_field(parts[i], "name", ppath);
      if (!pname.is_string()) throw SceneError(ppath + ".name: expected string");
      part.name = pname.get<std::string>();
      if (!part_names.insert(part.name).second)
        throw SceneError(ppath + ": duplicate part name '" + part.name + "' in " + obj.name);
      const auto& pts = scene_field(parts[i], "points", ppath);
      if (!pts.is_array() || pts.empty())
        throw SceneError(ppath + ": part '" + part.name + "' needs at least one point");
      const Vec3 limit = obj.aabb.half_extents.array() + kPartInflation;
      for (std::size_t k = 0; k < pts.size(); ++k) {
        const Vec3 p = read_vec3(pts[k], ppath + ".points[" + std::to_string(k) + "]");
        if ((p.cwiseAbs().array() > limit.array() + 1e-12).any())
          throw SceneError(ppath + ": point of part '" + part.name +
                           "' lies outside the inflated box of " + obj.name);
        part.points.push_back(p);
      }
      obj.parts.push_back(std::move(part));
    }
  } else if (!obj.waypoint) {
    throw SceneError(path + ": missing field 'parts'");
  }

  obj.state.position = obj.aabb.center;
  obj.state.rotation = Vec3(0.0, 0.0, wrap_angle(obj.aabb.yaw));
  if (j.contains("initial_state")) {
    const auto& s = j["initial_state"];
    const std::string spath = path + ".initial_state";
    if (!s.is_object()) throw SceneError(spath + ": expected object");
    if (s.contains("position")) obj.state.position = read_vec3(s["position"], spath + ".position");
    if (s.contains("rotation")) {
      obj.state.rotation = read_vec3(s["rotation"], spath + ".rotation");
      for (int i = 0; i < 3; ++i) obj.state.rotation[i] = wrap_angle(obj.state.rotation[i]);
    }
    if (s.contains("linear_velocity"))
      obj.state.linear_velocity = read_vec3(s["linear_velocity"], spath + ".linear_velocity");
    if (s.contains("angular_velocity"))
      obj.state.angular_velocity = read_vec3(s["angular_velocity"], spath + ".angular_velocity");
  }
  if (!obj.movable && (!obj.state.linear_velocity.isZero(0.0) ||
                       !obj.state.angular_velocity.isZero(0.0)))
    throw SceneError(path + ": static object '" + obj.name + "' cannot have velocity");

  if (j.contains("hinge")) {
    const auto& h = j["hinge"];
    const std::string hpath = path + ".hinge";
    if (!obj.movable) throw SceneError(hpath + ": hinged object must be movable");
    const auto& pivot = scene_field(h, "pivot", hpath);
    if (!pivot.is_array() || pivot.size() != 2)
      throw SceneError(hpath + ".pivot: expected [x, y] in the object frame");
    Hinge hinge;
    const Vec3 local(read_number(pivot[0], hpath + ".pivot"), read_number(pivot[1], hpath + ".pivot"),
                     0.0);
    hinge.pivot = obj.state.position + yaw_matrix(obj.state.heading()) * local;
    hinge.pivot.z() = 0.0;
    hinge.min_angle = read_number(scene_field(h, "min_angle", hpath), hpath + ".min_angle");
    hinge.max_angle = read_number(scene_field(h, "max_angle", hpath), hpath + ".max_angle");
    if (hinge.min_angle > 0.0 || hinge.max_angle < 0.0 || hinge.min_angle >= hinge.max_angle)
      throw SceneError(hpath + ": angle range must contain 0");
    hinge.base_position = obj.state.position;
    hinge.base_yaw = obj.state.heading();
    obj.hinge = hinge;
  }
  return obj;
}

}  // namespace detail

//! Parses a scene document and establishes every scene invariant.
inline Scene load_scene(std::string_view document) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document.begin(), document.end());
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    const auto [line, column] = detail::line_column(document, byte);
    throw SceneError("syntax error at line " + std::to_string(line) + ", column " +
                     std::to_string(column) + ": " + e.what());
  }
  if (!doc.is_object()) throw SceneError("$: expected object");
  Scene scene;
  scene.scene_id = doc.value("scene_id", std::string());
  const auto& objects = detail::scene_field(doc, "objects", "$");
  if (!objects.is_array()) throw SceneError("$.objects: expected array");
  std::set<std::string> names;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const std::string path = "$.objects[" + std::to_string(i) + "]";
    SceneObject obj = detail::read_object(objects[i], path);
    if (!names.insert(obj.name).second)
      throw SceneError(path + ": duplicate object name '" + obj.name + "'");
    scene.objects.push_back(std::move(obj));
  }
  if (doc.contains("agent")) {
    const auto& a = doc["agent"];
    if (a.contains("position")) {
      const auto& p = a["position"];
      if (!p.is_array() || p.size() != 2) throw SceneError("$.agent.position: expected [x, y]");
      scene.agent_start = Vec3(p[0].get<double>(), p[1].get<double>(), 0.0);
    }
    scene.agent_yaw = a.value("yaw", 0.0);
  }
  if (doc.contains("ground") && !doc["ground"].is_null()) {
    const auto& g = doc["ground"];
    HeightField field;
    const auto& origin = detail::scene_field(g, "origin", "$.ground");
    if (!origin.is_array() || origin.size() != 2)
      throw SceneError("$.ground.origin: expected [x, y]");
    field.origin_x = origin[0].get<double>();
    field.origin_y = origin[1].get<double>();
    field.spacing = detail::read_number(detail::scene_field(g, "spacing", "$.ground"),
                                        "$.ground.spacing");
    field.rows = detail::scene_field(g, "rows", "$.ground").get<int>();
    field.cols = detail::scene_field(g, "cols", "$.ground").get<int>();
    field.heights = detail::scene_field(g, "heights", "$.ground").get<std::vector<double>>();
    if (field.spacing <= 0.0 || field.rows <= 0 || field.cols <= 0 ||
        field.heights.size() != std::size_t(field.rows) * field.cols)
      throw SceneError("$.ground: inconsistent grid dimensions");
    scene.ground = std::move(field);
  }
  return scene;
}

}  // namespace rmd

#endif  // RMD_SCENE_HPP_
