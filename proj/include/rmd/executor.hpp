#ifndef RMD_EXECUTOR_HPP_
#define RMD_EXECUTOR_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rmd/geometry.hpp"
#include "rmd/goal.hpp"
#include "rmd/plan.hpp"
#include "rmd/reward.hpp"
#include "rmd/scene.hpp"
#include "rmd/skeleton.hpp"

namespace rmd {

struct ExecutorConfig {
  double transition_threshold = 0.9;
  int max_episode_frames = 450;
  double dt = 1.0 / 30.0;
  WeightingMode weighting = WeightingMode::Adaptive;
  //! Supplies alpha_task/alpha_style, v_star and epsilon; lambdas are per step.
  RewardWeights reward;

  void check() const {
    if (!(transition_threshold > 0.0 && transition_threshold < 1.0))
      throw std::invalid_argument("transition threshold must lie in (0, 1)");
    if (max_episode_frames < 1) throw std::invalid_argument("max_episode_frames must be >= 1");
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  }
};

inline constexpr double kMaxLinearSpeed = 2.0;   // m/s
inline constexpr double kMaxAngularSpeed = 4.0;  // rad/s
inline constexpr double kAttachRadius = 0.10;    // m

struct StageStatus {
  int stage_index = 1;  // 1-based
  bool completed = false;
  int frames_in_stage = 0;

  bool operator==(const StageStatus&) const = default;
};

/*
 * Stage transition rule: a task reward strictly above the threshold moves to
 * the next step (or completes the last one). The returned status is the one
 * used on the following frame.
 */
inline StageStatus advance_check(double r_task, const StageStatus& status, const Plan& plan,
                                 const ExecutorConfig& config) {
  StageStatus next = status;
  if (status.completed) return next;
  if (r_task > config.transition_threshold) {
    if (status.stage_index < int(plan.steps.size())) {
      next.stage_index = status.stage_index + 1;
      next.frames_in_stage = 0;
    } else {
      next.completed = true;
      next.frames_in_stage = status.frames_in_stage + 1;
    }
  } else {
    next.frames_in_stage = status.frames_in_stage + 1;
  }
  return next;
}

//! Mutable simulation state owned by one executor.
struct WorldState {
  Scene scene;
  AgentState agent;
  //! Carried object name -> body it is rigidly attached to.
  std::map<std::string, Body> attachments;
  int frame = 0;
  double time = 0.0;
};

inline WorldState initial_world(const Scene& scene) {
  WorldState world;
  world.scene = scene;
  world.agent = make_standing_agent(scene.agent_start.x(), scene.agent_start.y(), scene.agent_yaw);
  return world;
}

struct ControllerCommand {
  std::optional<Vec3> root_position;
  std::optional<Quat> root_rotation;
  //! World-space targets for non-root bodies; index 0 is ignored.
  std::array<std::optional<Vec3>, kNumBodies> body_positions{};
  std::array<std::optional<Quat>, kNumBodies> body_rotations{};
  //! Hinged object name -> commanded hinge angle.
  std::map<std::string, double> hinge_angles;

  bool empty() const {
    if (root_position || root_rotation || !hinge_angles.empty()) return false;
    for (int i = 1; i < kNumBodies; ++i) {
      if (body_positions[i] || body_rotations[i]) return false;
    }
    return true;
  }
};

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline Quat quat_from_euler(const Vec3& euler) {
  return Quat(euler_xyz_to_matrix(euler)).normalized();
}

/*
 * Advances the kinematic world by one dt. Commanded bodies move toward their
 * targets under the linear/angular speed limits; uncommanded bodies ride
 * rigidly with the root. Attached objects inherit their body's rigid motion,
 * hinged objects turn about their pivot. Velocities are finite differences.
 */
inline WorldState step(const WorldState& world, const ControllerCommand& command,
                       const ExecutorConfig& config) {
  for (const auto& [name, angle] : command.hinge_angles) {
    const auto* obj = world.scene.find(name);
    if (obj == nullptr || !obj->hinge)
      throw SimulationError("command for unknown hinged object: " + name);
  }

  const double dt = config.dt;
  const double max_lin = kMaxLinearSpeed * dt;
  const double max_ang = kMaxAngularSpeed * dt;
  WorldState next = world;

  const BodyState& old_root = world.agent.root();
  BodyState& root = next.agent.root();
  if (command.root_position) root.position = step_toward(old_root.position, *command.root_position, max_lin);
  if (command.root_rotation) root.rotation = rotate_toward(old_root.rotation, *command.root_rotation, max_ang);
  const Quat root_delta = (root.rotation * old_root.rotation.conjugate()).normalized();

  for (int i = 1; i < kNumBodies; ++i) {
    const BodyState& old_body = world.agent.bodies[i];
    BodyState& body = next.agent.bodies[i];
    if (command.body_positions[i]) {
      body.position = step_toward(old_body.position, *command.body_positions[i], max_lin);
      body.rotation = old_body.rotation;
    } else {
      body.position = root.position + root_delta * (old_body.position - old_root.position);
      body.rotation = (root_delta * old_body.rotation).normalized();
    }
    if (command.body_rotations[i])
      body.rotation = rotate_toward(old_body.rotation, *command.body_rotations[i], max_ang);
  }
  for (int i = 0; i < kNumBodies; ++i) {
    const BodyState& old_body = world.agent.bodies[i];
    BodyState& body = next.agent.bodies[i];
    body.linear_velocity = (body.position - old_body.position) / dt;
    body.angular_velocity = angular_velocity(old_body.rotation, body.rotation, dt);
  }

  for (std::size_t k = 0; k < next.scene.objects.size(); ++k) {
    const SceneObject& old_obj = world.scene.objects[k];
    SceneObject& obj = next.scene.objects[k];
    if (!obj.movable) continue;
    Quat old_q = quat_from_euler(old_obj.state.rotation);
    Quat new_q = old_q;
    Vec3 new_pos = old_obj.state.position;
    if (const auto it = command.hinge_angles.find(obj.name); it != command.hinge_angles.end()) {
      Hinge& hinge = *obj.hinge;
      const double goal = std::clamp(it->second, hinge.min_angle, hinge.max_angle);
      hinge.angle += std::clamp(goal - hinge.angle, -max_ang, max_ang);
      const auto [pos, yaw] = hinge.pose_at(hinge.angle);
      new_pos = pos;
      new_q = quat_from_euler(Vec3(old_obj.state.rotation.x(), old_obj.state.rotation.y(), yaw));
    } else if (const auto at = world.attachments.find(obj.name); at != world.attachments.end()) {
      const BodyState& b0 = world.agent[at->second];
      const BodyState& b1 = next.agent[at->second];
      const Quat delta = (b1.rotation * b0.rotation.conjugate()).normalized();
      new_pos = b1.position + delta * (old_obj.state.position - b0.position);
      new_q = (delta * old_q).normalized();
    }
    obj.state.position = new_pos;
    obj.state.rotation = matrix_to_euler_xyz(new_q.toRotationMatrix());
    obj.state.linear_velocity = (new_pos - old_obj.state.position) / dt;
    obj.state.angular_velocity = angular_velocity(old_q, new_q, dt);
  }

  next.frame = world.frame + 1;
  next.time = world.time + dt;
  return next;
}

/*
 * Grasp bookkeeping: a movable object attaches to the first body that holds a
 * stationary edge on it within 10 cm, and detaches once the active step no
 * longer holds that edge.
 */
inline void update_attachments(WorldState& world, const InteractionStep& step) {
  auto holds = [&](const std::string& object, Body body) {
    for (const auto& edge : step.graph.edges) {
      if (edge.dynamic != MovementDynamic::Stationary || edge.human_part != body) continue;
      const PartRef ref = resolve_part(step, world.scene, edge.object_part);
      if (ref && ref.object->name == object) return true;
    }
    return false;
  };
  for (auto it = world.attachments.begin(); it != world.attachments.end();) {
    it = holds(it->first, it->second) ? std::next(it) : world.attachments.erase(it);
  }
  for (const auto& edge : step.graph.edges) {
    if (edge.dynamic != MovementDynamic::Stationary) continue;
    const PartRef ref = resolve_part(step, world.scene, edge.object_part);
    if (!ref || !ref.object->movable || ref.object->hinge || ref.object->waypoint) continue;
    if (world.attachments.count(ref.object->name)) continue;
    const Vec3& p = world.agent[edge.human_part].position;
    const SurfacePoint sp = nearest_surface_point(*ref.part, ref.object->state, p);
    if ((sp.point - p).norm() <= kAttachRadius) world.attachments[ref.object->name] = edge.human_part;
  }
}

using Controller =
    std::function<ControllerCommand(const InteractionStep&, const WorldState&, const ExecutorConfig&)>;

inline ControllerCommand zero_controller(const InteractionStep&, const WorldState&,
                                         const ExecutorConfig&) {
  return {};
}

namespace controller_gains {
inline constexpr double kWalkSpeed = 1.5;        // m/s cruising speed
inline constexpr double kSpeedGain = 1.5;        // 1/s, speed per metre to go
inline constexpr double kStandUpDistance = 1.0;  // m, walk at standing height beyond this
inline constexpr double kAlignDistance = 0.02;   // m, descend only once above the target
inline constexpr double kReachDistance = 1.0;    // m, start of the synchronized final approach
inline constexpr double kTurnDistance = 0.3;     // m, keep heading inside this radius
inline constexpr double kSitHeight = 0.7;        // m, root height switching to the seated pose
inline constexpr double kHandleSpeed = 1.0;      // m/s, rim speed of a driven hinge
inline constexpr double kDeadband = 1e-9;
}  // namespace controller_gains

/*
 * Proportional servo standing in for a learned policy. Speeds never drop below
 * v* until arrival, so approach edges are met at the planned closing speed.
 */
inline ControllerCommand scripted_controller(const InteractionStep& step, const WorldState& world,
                                             const ExecutorConfig& config) {
  using namespace controller_gains;
  const Scene& scene = world.scene;
  const AgentState& agent = world.agent;
  const double dt = config.dt;
  const double v_star = config.reward.v_star;
  const StepTargets targets = resolve_step_targets(step, scene);
  auto speed_for = [&](double dist) { return std::clamp(kSpeedGain * dist, v_star, kWalkSpeed); };

  ControllerCommand cmd;

  // A stationary edge on a movable object that is not yet in hand must first
  // close its gap; the root waits for the grip.
  auto grip_gap = [&](const EdgeSpec& e, const PartRef& ref) {
    const Vec3& p = agent[e.human_part].position;
    return (nearest_surface_point(*ref.part, ref.object->state, p).point - p).norm();
  };
  bool grip_pending = false;
  for (const auto& e : step.graph.edges) {
    if (e.dynamic != MovementDynamic::Stationary || e.human_part == Body::Pelvis) continue;
    const PartRef ref = require_part(step, scene, e.object_part);
    if (ref.object->movable && grip_gap(e, ref) > kAttachRadius) grip_pending = true;
  }

  // root
  const Vec3 root = agent.root().position;
  Vec3 goal = targets.human;
  const double horizontal = std::hypot(goal.x() - root.x(), goal.y() - root.y());
  // A pelvis that approaches a surface lowers straight onto it.
  const bool root_approaches = std::any_of(
      step.graph.edges.begin(), step.graph.edges.end(), [](const EdgeSpec& e) {
        return e.human_part == Body::Pelvis && e.dynamic == MovementDynamic::Approach;
      });
  if (horizontal > (root_approaches ? kAlignDistance : kStandUpDistance))
    goal.z() = std::max(goal.z(), kStandingRootHeight);
  const double root_dist = (goal - root).norm();
  const double root_path = root_dist + (targets.human - goal).norm();
  // Final approach: inside reach of the goal every approaching mover (root
  // included) runs on one clock at v*. A mover whose remaining distance is
  // short of v* * clock holds still, so all of them land together at v*.
  const bool final_approach = root_path <= kReachDistance;
  double clock = 0.0;
  if (final_approach) {
    if (!grip_pending) clock = root_path / v_star;
    for (const auto& e : step.graph.edges) {
      if (e.dynamic != MovementDynamic::Approach || e.human_part == Body::Pelvis) continue;
      const PartRef ref = require_part(step, scene, e.object_part);
      const Vec3& p = agent[e.human_part].position;
      clock = std::max(clock, (nearest_surface_point(*ref.part, ref.object->state, p).point - p).norm() / v_star);
    }
  }
  auto waits = [&](double remaining) { return remaining < v_star * (clock - dt); };

  Vec3 next_root = root;
  if (!grip_pending && root_dist > kDeadband) {
    if (!final_approach) {
      next_root = step_toward(root, goal, speed_for(root_path) * dt);
    } else if (!waits(root_path)) {
      next_root = step_toward(root, goal, v_star * dt);
    }
    if (next_root != root) cmd.root_position = next_root;
  }

  double next_yaw = root_heading(agent);
  if (horizontal > kTurnDistance) {
    const Quat desired = yaw_quaternion(std::atan2(goal.y() - root.y(), goal.x() - root.x()));
    if (agent.root().rotation.angularDistance(desired) > kDeadband) {
      cmd.root_rotation = desired;
      const Quat q = rotate_toward(agent.root().rotation, desired, kMaxAngularSpeed * dt);
      heading_of(q.toRotationMatrix(), next_yaw);
    }
  }
  const PoseOffsets& offsets = next_root.z() < kSitHeight ? sitting_offsets() : standing_offsets();
  const Mat3 next_heading = yaw_matrix(next_yaw);
  auto rest = [&](int b) { return Vec3(next_root + next_heading * offsets[b]); };

  // object
  const SceneObject& focus = focus_object(step, scene);
  const bool has_destination =
      step.object_target && focus.movable && step.object_target->object != focus.name;
  Vec3 carry_delta = Vec3::Zero();
  std::optional<double> hinge_delta;
  if (has_destination && !grip_pending && world.attachments.count(focus.name)) {
    const double od = (targets.object - focus.state.position).norm();
    if (od > kDeadband)
      carry_delta = step_toward(focus.state.position, targets.object, speed_for(od) * dt) -
                    focus.state.position;
  }
  if (has_destination && !grip_pending && focus.hinge) {
    const Hinge& hinge = *focus.hinge;
    double radius = 0.0;
    for (const auto& edge : step.graph.edges) {
      if (edge.dynamic != MovementDynamic::Stationary) continue;
      const PartRef ref = resolve_part(step, scene, edge.object_part);
      if (!ref || ref.object != &focus) continue;
      const Vec3& p = agent[edge.human_part].position;
      if ((nearest_surface_point(*ref.part, focus.state, p).point - p).norm() > kAttachRadius) continue;
      radius = std::max(radius, std::hypot(p.x() - hinge.pivot.x(), p.y() - hinge.pivot.y()));
    }
    if (radius > 0.0) {
      const Vec3 arm = hinge.base_position - hinge.pivot;
      const Vec3 want = targets.object - hinge.pivot;
      const double desired = std::clamp(
          wrap_angle(std::atan2(want.y(), want.x()) - std::atan2(arm.y(), arm.x())),
          hinge.min_angle, hinge.max_angle);
      const double rate = std::min(kMaxAngularSpeed, kHandleSpeed / std::max(radius, 0.1));
      const double delta = std::clamp(desired - hinge.angle, -rate * dt, rate * dt);
      if (std::abs(delta) > kDeadband) {
        hinge_delta = delta;
        cmd.hinge_angles[focus.name] = hinge.angle + delta;
      }
    }
  }

  // bodies
  for (int b = 1; b < kNumBodies; ++b) {
    const Body body = static_cast<Body>(b);
    const Vec3& pos = agent.bodies[b].position;
    Vec3 target = rest(b);
    bool hold = false;  // command even a zero move so the body does not ride the root
    const auto edge = std::find_if(step.graph.edges.begin(), step.graph.edges.end(),
                                   [&](const EdgeSpec& e) { return e.human_part == body; });
    if (edge != step.graph.edges.end()) {
      const PartRef ref = require_part(step, scene, edge->object_part);
      const SurfacePoint sp = nearest_surface_point(*ref.part, ref.object->state, pos);
      switch (edge->dynamic) {
        case MovementDynamic::Approach: {
          if (!final_approach) break;
          const double d = (sp.point - pos).norm();
          target = waits(d) ? pos : step_toward(pos, sp.point, v_star * dt);
          hold = true;
          break;
        }
        case MovementDynamic::Stationary:
          if (ref.object->movable && (sp.point - pos).norm() > kAttachRadius) {
            const double gap = (sp.point - pos).norm();
            target = step_toward(pos, sp.point, speed_for(gap) * dt);
          } else if (ref.object == &focus && hinge_delta) {
            const Vec3 arm = pos - focus.hinge->pivot;
            target = focus.hinge->pivot + yaw_matrix(*hinge_delta) * arm;
            target.z() = pos.z();
          } else if (ref.object == &focus && world.attachments.count(focus.name)) {
            target = pos + carry_delta;
          } else {
            target = pos + surface_point_velocity(ref.object->state, sp.point) * dt;
          }
          break;
        case MovementDynamic::Leave:
        case MovementDynamic::Free:
          break;
      }
    }
    if (hold || (target - pos).norm() > kDeadband) cmd.body_positions[b] = target;
  }
  return cmd;
}

struct FrameRecord {
  int index = 0;
  double time = 0.0;
  //! Stage evaluated on this frame and the status carried into the next one.
  StageStatus status;
  StageStatus next_status;
  AgentState agent;
  std::vector<ObjectState> objects;
  GoalState goal;
  StepTargets targets;
  RewardBreakdown reward;
};

struct EpisodeTrace {
  std::vector<std::string> object_names;
  std::vector<FrameRecord> frames;
  bool completed = false;
  int stages_completed = 0;
  std::optional<std::string> error;
  int error_frame = -1;
};

/*
 * Runs a plan frame by frame: encode goal -> controller -> step -> rewards ->
 * stage check. Ends on completion, on the frame budget, or on a fault (which
 * is recorded and truncates the trace).
 */
inline EpisodeTrace run_episode(const Plan& plan, const Scene& scene, const ExecutorConfig& config,
                                const Controller& controller = scripted_controller,
                                const StyleProvider& style = constant_style(0.0)) {
  config.check();
  if (plan.steps.empty()) throw std::invalid_argument("run_episode: plan has no steps");
  EpisodeTrace trace;
  for (const auto& o : scene.objects) trace.object_names.push_back(o.name);

  WorldState world = initial_world(scene);
  StageStatus status;
  double yaw = root_heading(world.agent, 0.0);
  for (int k = 0; k < config.max_episode_frames; ++k) {
    try {
      const InteractionStep& current = plan.steps[status.stage_index - 1];
      update_attachments(world, current);
      FrameRecord rec;
      rec.index = k;
      rec.status = status;
      rec.goal = encode_goal(current, world.scene, world.agent,
                             resolve_step_targets(current, world.scene), yaw);

      const ControllerCommand cmd = controller(current, world, config);
      const AgentState previous = world.agent;
      world = step(world, cmd, config);

      const AgentFrame frame = agent_frame(world.agent, yaw);
      yaw = frame.yaw;
      rec.targets = resolve_step_targets(current, world.scene);
      const auto features = edge_features(current, world.scene, world.agent, frame);
      std::vector<MovementDynamic> dynamics;
      for (const auto& e : current.graph.edges) dynamics.push_back(e.dynamic);
      const SceneObject& focus = focus_object(current, world.scene);
      const double r_dh = distance_reward(world.agent.root().position, rec.targets.human);
      const double r_do = distance_reward(focus.state.position, rec.targets.object);
      rec.reward = evaluate_reward(features, dynamics, r_dh, r_do, current.object_target.has_value(),
                                   config.weighting, config.reward, style(previous, world.agent));
      rec.next_status = advance_check(rec.reward.r_task, status, plan, config);
      rec.time = world.time;
      rec.agent = world.agent;
      for (const auto& o : world.scene.objects) rec.objects.push_back(o.state);
      trace.frames.push_back(std::move(rec));
      status = trace.frames.back().next_status;
    } catch (const std::exception& e) {
      trace.error = e.what();
      trace.error_frame = k;
      break;
    }
    if (status.completed) break;
  }
  trace.completed = status.completed;
  trace.stages_completed = status.stage_index - 1 + (status.completed ? 1 : 0);
  return trace;
}

}  // namespace rmd

#endif  // RMD_EXECUTOR_HPP_
