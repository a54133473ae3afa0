#ifndef RMD_SKELETON_HPP_
#define RMD_SKELETON_HPP_

#include <array>
#include <cmath>
#include <optional>
#include <string_view>

#include "rmd/geometry.hpp"

namespace rmd {

//! The 15 rigid bodies of the humanoid. Index 0 is the root.
enum class Body : int {
  Pelvis = 0,
  Torso,
  Head,
  LeftUpperArm,
  LeftLowerArm,
  LeftHand,
  RightUpperArm,
  RightLowerArm,
  RightHand,
  LeftThigh,
  LeftShin,
  LeftFoot,
  RightThigh,
  RightShin,
  RightFoot,
};

inline constexpr int kNumBodies = 15;
inline constexpr int kNumDofs = 28;

inline constexpr std::array<std::string_view, kNumBodies> kBodyNames{
    "pelvis",         "torso",          "head",
    "left_upper_arm", "left_lower_arm", "left_hand",
    "right_upper_arm", "right_lower_arm", "right_hand",
    "left_thigh",     "left_shin",      "left_foot",
    "right_thigh",    "right_shin",     "right_foot",
};

constexpr int index_of(Body b) { return static_cast<int>(b); }

inline std::string_view body_name(Body b) { return kBodyNames[index_of(b)]; }

inline std::optional<Body> body_from_name(std::string_view name) {
  for (int i = 0; i < kNumBodies; ++i) {
    if (kBodyNames[i] == name) return static_cast<Body>(i);
  }
  return std::nullopt;
}

struct BodyState {
  Vec3 position = Vec3::Zero();
  Quat rotation = Quat::Identity();
  Vec3 linear_velocity = Vec3::Zero();
  Vec3 angular_velocity = Vec3::Zero();
};

//! Kinematic snapshot of the skeleton; bodies are indexed by `Body`.
struct AgentState {
  std::array<BodyState, kNumBodies> bodies;

  const BodyState& root() const { return bodies[0]; }
  BodyState& root() { return bodies[0]; }
  const BodyState& operator[](Body b) const { return bodies[index_of(b)]; }
  BodyState& operator[](Body b) { return bodies[index_of(b)]; }

  bool is_valid(double tolerance = 1e-6) const {
    for (const auto& body : bodies) {
      if (std::abs(body.rotation.norm() - 1.0) > tolerance) return false;
      if (!body.position.allFinite() || !body.linear_velocity.allFinite() ||
          !body.angular_velocity.allFinite())
        return false;
    }
    return true;
  }
};

inline constexpr double kStandingRootHeight = 0.95;
inline constexpr double kSittingRootHeight = 0.45;

using PoseOffsets = std::array<Vec3, kNumBodies>;

//! Body origins relative to the pelvis, in the heading frame (x forward, y left).
inline const PoseOffsets& standing_offsets() {
  static const PoseOffsets offsets{
      Vec3(0.0, 0.0, 0.0),      Vec3(0.0, 0.0, 0.25),    Vec3(0.0, 0.0, 0.60),
      Vec3(0.0, 0.20, 0.40),    Vec3(0.0, 0.22, 0.12),   Vec3(0.0, 0.22, -0.12),
      Vec3(0.0, -0.20, 0.40),   Vec3(0.0, -0.22, 0.12),  Vec3(0.0, -0.22, -0.12),
      Vec3(0.0, 0.10, -0.05),   Vec3(0.0, 0.10, -0.45),  Vec3(0.05, 0.10, -0.88),
      Vec3(0.0, -0.10, -0.05),  Vec3(0.0, -0.10, -0.45), Vec3(0.05, -0.10, -0.88),
  };
  return offsets;
}

inline const PoseOffsets& sitting_offsets() {
  static const PoseOffsets offsets{
      Vec3(0.0, 0.0, 0.0),      Vec3(-0.03, 0.0, 0.25),  Vec3(-0.05, 0.0, 0.60),
      Vec3(-0.02, 0.20, 0.40),  Vec3(0.0, 0.22, 0.14),   Vec3(0.12, 0.22, 0.02),
      Vec3(-0.02, -0.20, 0.40), Vec3(0.0, -0.22, 0.14),  Vec3(0.12, -0.22, 0.02),
      Vec3(0.10, 0.10, 0.0),    Vec3(0.45, 0.10, -0.05), Vec3(0.50, 0.10, -0.40),
      Vec3(0.10, -0.10, 0.0),   Vec3(0.45, -0.10, -0.05), Vec3(0.50, -0.10, -0.40),
  };
  return offsets;
}

//! Builds a motionless agent with the given pose, root at `root_position`.
inline AgentState make_posed_agent(const Vec3& root_position, double yaw,
                                   const PoseOffsets& offsets) {
  AgentState agent;
  const Mat3 r = yaw_matrix(yaw);
  const Quat q = yaw_quaternion(yaw);
  for (int i = 0; i < kNumBodies; ++i) {
    agent.bodies[i].position = root_position + r * offsets[i];
    agent.bodies[i].rotation = q;
  }
  return agent;
}

inline AgentState make_standing_agent(double x, double y, double yaw) {
  return make_posed_agent(Vec3(x, y, kStandingRootHeight), yaw, standing_offsets());
}

}  // namespace rmd

#endif  // RMD_SKELETON_HPP_
