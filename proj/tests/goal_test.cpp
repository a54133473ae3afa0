#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"

namespace rmd {
namespace {

InteractionStep make_step(std::vector<EdgeSpec> edges, TargetSpec human,
                          std::optional<TargetSpec> object = std::nullopt) {
  InteractionStep s;
  s.label = "t";
  s.human_target = std::move(human);
  s.object_target = std::move(object);
  s.graph.edges = std::move(edges);
  return s;
}

// Flat scene: a 1 m seat slab whose part is two points at seat height.
Scene seat_scene() {
  return load_scene(R"({"objects": [{"name": "bench", "movable": true,
      "aabb": {"center": [0, 0, 0.5], "size": [2, 2, 1]},
      "parts": [{"name": "seat", "points": [[1, 0, 0.5], [-1, 0, 0.5]]}]}]})");
}

TEST(AgentFrame, IdentityAndQuarterTurn) {
  AgentState a = make_standing_agent(2, 3, 0);
  a.root().position.z() = 1.0;
  const AgentFrame f = agent_frame(a);
  EXPECT_EQ(f.origin, Vec3(2, 3, 0));
  EXPECT_EQ(f.yaw, 0.0);
  EXPECT_NEAR(agent_frame(make_standing_agent(0, 0, kPi / 2)).yaw, kPi / 2, 1e-12);
}

TEST(AgentFrame, YawMatchesForwardAxisOracle) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  for (int i = 0; i < 500; ++i) {
    AgentState a = make_standing_agent(0, 0, 0);
    a.root().rotation = Quat(n(rng), n(rng), n(rng), n(rng)).normalized();
    const Vec3 fwd = a.root().rotation * Vec3::UnitX();
    if (std::hypot(fwd.x(), fwd.y()) < 1e-3) continue;
    EXPECT_NEAR(wrap_angle(agent_frame(a).yaw - std::atan2(fwd.y(), fwd.x())), 0.0, 1e-9);
  }
}

TEST(AgentFrame, VerticalForwardFallsBackToPreviousYaw) {
  AgentState a = make_standing_agent(0, 0, 0);
  a.root().rotation = Quat(Eigen::AngleAxisd(-kPi / 2, Vec3::UnitY()));  // x axis points up
  EXPECT_EQ(agent_frame(a).yaw, 0.0);
  EXPECT_EQ(agent_frame(a, 1.25).yaw, 1.25);
}

TEST(ToAgentFrame, PointsDirectionsAndInverse) {
  const AgentFrame f{Vec3(1, 2, 0), kPi / 2};
  EXPECT_NEAR(to_agent_frame(Vec3(1, 2, 0), f, VectorKind::Point).norm(), 0.0, 1e-15);
  EXPECT_NEAR((to_agent_frame(Vec3(1, 0, 0), f, VectorKind::Direction) - Vec3(0, -1, 0)).norm(), 0.0,
              1e-15);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int i = 0; i < 100; ++i) {
    const AgentFrame g{Vec3(u(rng), u(rng), 0), u(rng)};
    const Vec3 v(u(rng), u(rng), u(rng));
    for (auto kind : {VectorKind::Point, VectorKind::Direction}) {
      EXPECT_NEAR((from_agent_frame(to_agent_frame(v, g, kind), g, kind) - v).norm(), 0.0, 1e-12);
    }
  }
}

TEST(EdgeFeatures, HandOnPointIsZero) {
  const Scene s = seat_scene();
  AgentState a = make_standing_agent(0, 0, 0);
  a[Body::RightHand].position = Vec3(1, 0, 1);
  const auto step = make_step({{Body::RightHand, "seat", MovementDynamic::Stationary}}, {"bench"});
  const auto f = edge_features(step, s, a);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_NEAR(f[0].rel_position.norm(), 0.0, 1e-15);
  EXPECT_EQ(f[0].rel_velocity, Vec3::Zero());
  EXPECT_EQ(f[0].dynamic_onehot, (std::array<double, 4>{1, 0, 0, 0}));
}

TEST(EdgeFeatures, OffsetToNearestSeatPoint) {
  const Scene s = seat_scene();
  AgentState a = make_standing_agent(0, 0, 0);
  a[Body::RightHand].position = Vec3(0.1, 0, 1);  // nearer to (1, 0, 1)
  const auto step = make_step({{Body::RightHand, "seat", MovementDynamic::Approach}}, {"bench"});
  const auto f = edge_features(step, s, a);
  EXPECT_NEAR((f[0].rel_position - Vec3(0.9, 0, 0)).norm(), 0.0, 1e-12);
  EXPECT_EQ(f[0].dynamic_onehot, (std::array<double, 4>{0, 1, 0, 0}));
}

TEST(EdgeFeatures, MovingObjectVelocityRotatesWithHeading) {
  Scene s = seat_scene();
  s.objects[0].state.linear_velocity = Vec3(1, 0, 0);
  const auto step = make_step({{Body::LeftHand, "seat", MovementDynamic::Leave}}, {"bench"});
  const auto f0 = edge_features(step, s, make_standing_agent(0, 0, 0));
  EXPECT_NEAR((f0[0].rel_velocity - Vec3(1, 0, 0)).norm(), 0.0, 1e-12);
  const auto f1 = edge_features(step, s, make_standing_agent(0, 0, kPi / 2));
  EXPECT_NEAR((f1[0].rel_velocity - Vec3(0, -1, 0)).norm(), 0.0, 1e-12);
}

TEST(EdgeFeatures, OrderFollowsPlanAndFeedsRmdBlock) {
  const Scene s = testing::load_fixture_scene("living_room");
  const Plan p = testing::load_fixture_plan("sit_stand_leave");
  const AgentState a = make_standing_agent(-2, 0.3, 0.2);
  const auto& step = p.steps[0];
  const auto feats = edge_features(step, s, a);
  const GoalState g = encode_goal(step, s, a, resolve_step_targets(step, s));
  ASSERT_EQ(feats.size(), step.graph.edges.size());
  for (std::size_t e = 0; e < feats.size(); ++e) {
    const double* blk = &g.rmd_block[e * kEdgeFeatureSize];
    const PartRef ref = require_part(step, s, step.graph.edges[e].object_part);
    const Vec3 body = a[step.graph.edges[e].human_part].position;
    const Vec3 expect_world = nearest_surface_point(*ref.part, ref.object->state, body).point - body;
    const Vec3 expect = yaw_matrix(0.2).transpose() * expect_world;
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(blk[i], expect[i], 1e-12);
    EXPECT_EQ(blk[6 + code_of(step.graph.edges[e].dynamic)], 1.0);
  }
}

TEST(GoalState, DimensionContract) {
  const Scene s = testing::load_fixture_scene("living_room");
  const std::vector<Body> hands{Body::Pelvis, Body::LeftHand, Body::RightHand, Body::Head, Body::Torso};
  for (std::size_t n : {1u, 2u, 3u, 5u}) {
    std::vector<EdgeSpec> edges;
    for (std::size_t i = 0; i < n; ++i) edges.push_back({hands[i], "seat", MovementDynamic(i % 4)});
    const auto step = make_step(edges, {"couch"});
    const AgentState a = make_standing_agent(-1, 0, 0);
    const GoalState g = encode_goal(step, s, a, resolve_step_targets(step, s));
    EXPECT_EQ(g.size(), 10 * n + 120);
    EXPECT_EQ(g.flatten().size(), 10 * n + 120);
    EXPECT_EQ(goal_slot_names(n).size(), 10 * n + 120);
    for (std::size_t e = 0; e < n; ++e) {
      double sum = 0;
      for (int k = 0; k < 4; ++k) sum += g.rmd_block[e * 10 + 6 + k];
      EXPECT_EQ(sum, 1.0);
    }
  }
  EXPECT_EQ(kGoalFixedSize, 120u);
}

TEST(GoalState, AtTargetDestinationIsZero) {
  const Scene s = seat_scene();
  const auto step = make_step({{Body::Pelvis, "seat", MovementDynamic::Stationary}}, {"bench"});
  AgentState a = make_standing_agent(0, 0, 0.3);
  StepTargets t{a.root().position, s.objects[0].state.position};
  const GoalState g = encode_goal(step, s, a, t);
  for (double v : g.destination) EXPECT_EQ(v, 0.0);
}

TEST(Proprioception, LengthAndZeroVelocityBlocks) {
  const auto p = encode_proprioception(make_standing_agent(0, 0, 0));
  EXPECT_EQ(p.size(), 223u);
  EXPECT_EQ(p[0], kStandingRootHeight);
  for (std::size_t i = 91; i < 181; ++i) EXPECT_EQ(p[i], 0.0) << i;
}

TEST(Proprioception, HorizontalTranslationInvariant) {
  AgentState a = make_standing_agent(0, 0, 0.4);
  a[Body::LeftHand].linear_velocity = Vec3(0.3, -0.2, 0.1);
  AgentState b = a;
  for (auto& body : b.bodies) body.position += Vec3(7.5, -3.25, 0);
  const auto pa = encode_proprioception(a);
  const auto pb = encode_proprioception(b);
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_NEAR(pa[i], pb[i], 1e-12) << i;
}

TEST(GoalState, FrameInvariance) {
  std::mt19937_64 rng(77);
  const auto worst = testing::max_frame_invariance_error(rng, 200);
  EXPECT_LT(worst, 1e-6);
}

}  // namespace
}  // namespace rmd
