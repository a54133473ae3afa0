#ifndef RMD_RANDOMIZE_HPP_
#define RMD_RANDOMIZE_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>

#include "rmd/geometry.hpp"
#include "rmd/scene.hpp"

namespace rmd {

struct PlacementRanges {
  double min_distance = 4.0;
  double max_distance = 10.0;
  double min_scale = 0.8;
  double max_scale = 1.2;
  double finish_distance = 3.0;
};

struct Placement {
  double orientation = 0.0;  // [0, 2pi)
  double distance = 0.0;     // agent start to anchor, m
  double bearing = 0.0;      // direction of the anchor seen from the agent start
  double scale = 1.0;
  double finish_angle = 0.0;
};

inline constexpr std::string_view kFinishName = "finish";

/*
 * Draws one placement. Uniform draws come from explicit inverse transforms on
 * raw 64-bit output so that results do not depend on the standard library's
 * distribution implementations.
 */
inline Placement sample_placement(std::uint64_t seed, const PlacementRanges& ranges = {}) {
  std::mt19937_64 rng(seed);
  auto unit = [&rng] { return double(rng() >> 11) * 0x1.0p-53; };  // [0, 1)
  Placement p;
  p.orientation = 2.0 * kPi * unit();
  p.distance = ranges.min_distance + (ranges.max_distance - ranges.min_distance) * unit();
  p.bearing = 2.0 * kPi * unit();
  p.scale = ranges.min_scale + (ranges.max_scale - ranges.min_scale) * unit();
  p.finish_angle = 2.0 * kPi * unit();
  if (p.orientation >= 2.0 * kPi) p.orientation = 0.0;
  if (p.distance > ranges.max_distance) p.distance = ranges.max_distance;
  if (p.scale > ranges.max_scale) p.scale = ranges.max_scale;
  return p;
}

//! First non-waypoint object; the layout is rotated and scaled about it.
inline const SceneObject& placement_anchor(const Scene& scene) {
  for (const auto& o : scene.objects) {
    if (!o.waypoint) return o;
  }
  throw SceneError("scene has no physical object to place");
}

/*
 * Moves the object layout so the anchor sits `distance` from the agent start,
 * turns it by `orientation` about the anchor, and scales geometry by `scale`
 * (heights scale from the floor; waypoint heights are kept). A waypoint named
 * "finish" is put on a circle of `finish_distance` around the anchor.
 */
inline Scene apply_placement(const Scene& scene, const Placement& p,
                             const PlacementRanges& ranges = {}) {
  Scene out = scene;
  const Vec3 anchor = placement_anchor(scene).state.position;
  const Vec3 new_anchor = scene.agent_start +
                          p.distance * Vec3(std::cos(p.bearing), std::sin(p.bearing), 0.0);
  const Mat3 turn = yaw_matrix(p.orientation);
  auto map_point = [&](const Vec3& v, bool keep_height) {
    Vec3 flat(v.x() - anchor.x(), v.y() - anchor.y(), 0.0);
    Vec3 w = turn * (p.scale * flat);
    return Vec3(new_anchor.x() + w.x(), new_anchor.y() + w.y(), keep_height ? v.z() : p.scale * v.z());
  };

  for (auto& obj : out.objects) {
    const bool keep_height = obj.waypoint;
    obj.state.position = map_point(obj.state.position, keep_height);
    obj.state.rotation = matrix_to_euler_xyz(turn * obj.state.rotation_matrix());
    obj.state.linear_velocity = turn * obj.state.linear_velocity;
    obj.state.angular_velocity = turn * obj.state.angular_velocity;
    obj.aabb.center = map_point(obj.aabb.center, keep_height);
    obj.aabb.yaw = wrap_angle(obj.aabb.yaw + p.orientation);
    if (!obj.waypoint) {
      obj.aabb.half_extents *= p.scale;
      for (auto& part : obj.parts) {
        for (auto& pt : part.points) pt *= p.scale;
      }
    }
    if (obj.hinge) {
      obj.hinge->pivot = map_point(obj.hinge->pivot, false);
      obj.hinge->base_position = map_point(obj.hinge->base_position, false);
      obj.hinge->base_yaw = wrap_angle(obj.hinge->base_yaw + p.orientation);
    }
    if (obj.waypoint && obj.name == kFinishName) {
      const double z = obj.state.position.z();
      obj.state.position = new_anchor + ranges.finish_distance *
                                            Vec3(std::cos(p.finish_angle), std::sin(p.finish_angle), 0.0);
      obj.state.position.z() = z;
      obj.aabb.center = obj.state.position;
    }
  }
  return out;
}

inline std::pair<Scene, Placement> randomize_scene(const Scene& scene, std::uint64_t seed,
                                                   const PlacementRanges& ranges = {}) {
  const Placement p = sample_placement(seed, ranges);
  return {apply_placement(scene, p, ranges), p};
}

}  // namespace rmd

#endif  // RMD_RANDOMIZE_HPP_
