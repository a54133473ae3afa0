#ifndef RMD_GOAL_HPP_
#define RMD_GOAL_HPP_

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "rmd/geometry.hpp"
#include "rmd/plan.hpp"
#include "rmd/scene.hpp"
#include "rmd/skeleton.hpp"

namespace rmd {

//! Heading-aligned frame anchored at the root's ground projection.
struct AgentFrame {
  Vec3 origin = Vec3::Zero();
  double yaw = 0.0;
};

/*
 * Frame of the agent. When the root's forward axis is vertical the heading is
 * undefined and `previous_yaw` (or 0 on the first frame) is used instead.
 */
inline AgentFrame agent_frame(const AgentState& agent,
                              std::optional<double> previous_yaw = std::nullopt) {
  AgentFrame frame;
  const Vec3& root = agent.root().position;
  frame.origin = Vec3(root.x(), root.y(), 0.0);
  frame.yaw = root_heading(agent, previous_yaw.value_or(0.0));
  return frame;
}

enum class VectorKind { Point, Direction };

inline Vec3 to_agent_frame(const Vec3& v, const AgentFrame& frame, VectorKind kind) {
  const Mat3 rt = yaw_matrix(frame.yaw).transpose();
  return kind == VectorKind::Point ? Vec3(rt * (v - frame.origin)) : Vec3(rt * v);
}

inline Vec3 from_agent_frame(const Vec3& v, const AgentFrame& frame, VectorKind kind) {
  const Vec3 w = yaw_matrix(frame.yaw) * v;
  return kind == VectorKind::Point ? Vec3(w + frame.origin) : w;
}

struct EdgeFeature {
  Vec3 rel_position = Vec3::Zero();
  Vec3 rel_velocity = Vec3::Zero();
  std::array<double, 4> dynamic_onehot{};
};

inline std::array<double, 4> onehot(MovementDynamic d) {
  std::array<double, 4> out{};
  out[code_of(d)] = 1.0;
  return out;
}

/*
 * Object whose state fills the object block and whose root is scored against
 * the object destination: the first movable object touched by the graph, else
 * the object target's object, else the first edge's object.
 */
inline const SceneObject& focus_object(const InteractionStep& step, const Scene& scene) {
  const SceneObject* first = nullptr;
  for (const auto& edge : step.graph.edges) {
    const PartRef ref = resolve_part(step, scene, edge.object_part);
    if (!ref) continue;
    if (ref.object->movable) return *ref.object;
    if (first == nullptr) first = ref.object;
  }
  if (step.object_target) return scene.at(step.object_target->object);
  if (first != nullptr) return *first;
  return scene.at(step.human_target.object);
}

//! World-frame destinations for the human root and the focus object root.
struct StepTargets {
  Vec3 human = Vec3::Zero();
  Vec3 object = Vec3::Zero();
};

inline StepTargets resolve_step_targets(const InteractionStep& step, const Scene& scene) {
  StepTargets t;
  t.human = resolve_target(step.human_target, scene);
  t.object = step.object_target ? resolve_target(*step.object_target, scene)
                                : focus_object(step, scene).state.position;
  return t;
}

/*
 * Relative position and velocity of each edge's object point with respect to
 * its human body, expressed in the agent frame. Order follows the plan.
 */
inline std::vector<EdgeFeature> edge_features(const InteractionStep& step, const Scene& scene,
                                              const AgentState& agent, const AgentFrame& frame) {
  std::vector<EdgeFeature> out;
  out.reserve(step.graph.edges.size());
  for (const auto& edge : step.graph.edges) {
    const PartRef ref = require_part(step, scene, edge.object_part);
    const BodyState& body = agent[edge.human_part];
    const SurfacePoint sp = nearest_surface_point(*ref.part, ref.object->state, body.position);
    const Vec3 point_velocity = surface_point_velocity(ref.object->state, sp.point);
    EdgeFeature f;
    f.rel_position = to_agent_frame(sp.point - body.position, frame, VectorKind::Direction);
    f.rel_velocity =
        to_agent_frame(point_velocity - body.linear_velocity, frame, VectorKind::Direction);
    f.dynamic_onehot = onehot(edge.dynamic);
    out.push_back(f);
  }
  return out;
}

inline std::vector<EdgeFeature> edge_features(const InteractionStep& step, const Scene& scene,
                                              const AgentState& agent) {
  return edge_features(step, scene, agent, agent_frame(agent));
}

inline constexpr std::size_t kEdgeFeatureSize = 10;
inline constexpr std::size_t kDestinationSize = 6;
inline constexpr std::size_t kObjectBlockSize = 33;
inline constexpr std::size_t kGoalFixedSize =
    kDestinationSize + std::size_t(kHeightmapCells) + kObjectBlockSize;

//! Goal representation; blocks are concatenated in declaration order.
struct GoalState {
  std::vector<double> rmd_block;
  std::array<double, kDestinationSize> destination{};
  Heightmap heightmap{};
  std::array<double, kObjectBlockSize> object_block{};

  std::size_t size() const { return rmd_block.size() + kGoalFixedSize; }

  std::vector<double> flatten() const {
    std::vector<double> out;
    out.reserve(size());
    out.insert(out.end(), rmd_block.begin(), rmd_block.end());
    out.insert(out.end(), destination.begin(), destination.end());
    out.insert(out.end(), heightmap.begin(), heightmap.end());
    out.insert(out.end(), object_block.begin(), object_block.end());
    return out;
  }
};

inline void put3(double* dst, const Vec3& v) {
  dst[0] = v.x();
  dst[1] = v.y();
  dst[2] = v.z();
}

//! Object block: 8 box vertices, relative Euler angles, linear and angular velocity.
inline std::array<double, kObjectBlockSize> encode_object(const SceneObject& obj,
                                                          const AgentFrame& frame) {
  std::array<double, kObjectBlockSize> out{};
  const auto verts = obj.vertices();
  for (int k = 0; k < 8; ++k) put3(&out[3 * k], to_agent_frame(verts[k], frame, VectorKind::Point));
  const Mat3 relative = yaw_matrix(frame.yaw).transpose() * obj.state.rotation_matrix();
  put3(&out[24], matrix_to_euler_xyz(relative));
  put3(&out[27], to_agent_frame(obj.state.linear_velocity, frame, VectorKind::Direction));
  put3(&out[30], to_agent_frame(obj.state.angular_velocity, frame, VectorKind::Direction));
  return out;
}

inline GoalState encode_goal(const InteractionStep& step, const Scene& scene,
                             const AgentState& agent, const StepTargets& targets,
                             std::optional<double> previous_yaw = std::nullopt) {
  const AgentFrame frame = agent_frame(agent, previous_yaw);
  GoalState goal;
  goal.rmd_block.reserve(kEdgeFeatureSize * step.graph.edges.size());
  for (const auto& f : edge_features(step, scene, agent, frame)) {
    for (int i = 0; i < 3; ++i) goal.rmd_block.push_back(f.rel_position[i]);
    for (int i = 0; i < 3; ++i) goal.rmd_block.push_back(f.rel_velocity[i]);
    for (double w : f.dynamic_onehot) goal.rmd_block.push_back(w);
  }
  const SceneObject& focus = focus_object(step, scene);
  put3(&goal.destination[0],
       to_agent_frame(targets.human - agent.root().position, frame, VectorKind::Direction));
  put3(&goal.destination[3],
       to_agent_frame(targets.object - focus.state.position, frame, VectorKind::Direction));
  goal.heightmap = sample_heightmap(scene, agent, frame.yaw);
  goal.object_block = encode_object(focus, frame);
  return goal;
}

//! Column names of a flattened goal with `num_edges` edges.
inline std::vector<std::string> goal_slot_names(std::size_t num_edges) {
  std::vector<std::string> names;
  static const char* kEdgeSlots[kEdgeFeatureSize] = {"px", "py", "pz", "vx", "vy",
                                                     "vz", "w0", "w1", "w2", "w3"};
  for (std::size_t e = 0; e < num_edges; ++e) {
    for (const char* s : kEdgeSlots) names.push_back("rmd" + std::to_string(e) + "_" + s);
  }
  for (const char* s : {"dh_x", "dh_y", "dh_z", "do_x", "do_y", "do_z"}) names.emplace_back(s);
  for (int i = 0; i < kHeightmapCells; ++i)
    names.push_back("h_" + std::to_string(i / kHeightmapSize) + "_" +
                    std::to_string(i % kHeightmapSize));
  for (int k = 0; k < 8; ++k) {
    for (const char* a : {"x", "y", "z"}) names.push_back("box" + std::to_string(k) + "_" + a);
  }
  for (const char* s : {"theta_x", "theta_y", "theta_z", "v_x", "v_y", "v_z", "w_x", "w_y", "w_z"})
    names.emplace_back(s);
  return names;
}

inline constexpr std::size_t kProprioceptionSize = 223;

using Proprioception = std::array<double, kProprioceptionSize>;

/*
 * Layout: root height (1), body rotations as tangent/normal columns (15 x 6),
 * linear velocities (15 x 3), angular velocities (15 x 3), non-root body
 * positions relative to the root (14 x 3). Everything but the root height is
 * in the agent frame.
 */
inline Proprioception encode_proprioception(const AgentState& agent,
                                            std::optional<double> previous_yaw = std::nullopt) {
  const AgentFrame frame = agent_frame(agent, previous_yaw);
  const Mat3 rt = yaw_matrix(frame.yaw).transpose();
  Proprioception out{};
  std::size_t k = 0;
  out[k++] = agent.root().position.z();
  for (const auto& body : agent.bodies) {
    const Mat3 r = rt * body.rotation.toRotationMatrix();
    put3(&out[k], r.col(0));
    put3(&out[k + 3], r.col(2));
    k += 6;
  }
  for (const auto& body : agent.bodies) {
    put3(&out[k], rt * body.linear_velocity);
    k += 3;
  }
  for (const auto& body : agent.bodies) {
    put3(&out[k], rt * body.angular_velocity);
    k += 3;
  }
  for (int i = 1; i < kNumBodies; ++i) {
    put3(&out[k], rt * (agent.bodies[i].position - agent.root().position));
    k += 3;
  }
  return out;
}

}  // namespace rmd

#endif  // RMD_GOAL_HPP_
