#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "test_support.hpp"

namespace rmd {
namespace {

void shift_agent(AgentState& a, const Vec3& d) {
  for (auto& b : a.bodies) b.position += d;
}

TEST(IsStanding, RestPoseStands) { EXPECT_TRUE(is_standing(make_standing_agent(1, 2, 0.5))); }

TEST(IsStanding, RejectsLowRootFastBodyAndLowHead) {
  AgentState low = make_standing_agent(0, 0, 0);
  shift_agent(low, Vec3(0, 0, -0.4));
  EXPECT_FALSE(is_standing(low));

  AgentState fast = make_standing_agent(0, 0, 0);
  fast[Body::LeftHand].linear_velocity = Vec3(0, 0.31, 0);
  EXPECT_FALSE(is_standing(fast));
  fast[Body::LeftHand].linear_velocity = Vec3(0, 0.29, 0);
  EXPECT_TRUE(is_standing(fast));

  AgentState bowed = make_standing_agent(0, 0, 0);
  bowed[Body::Head].position.z() = bowed.root().position.z() + 0.2;
  EXPECT_FALSE(is_standing(bowed));

  AgentState nan = make_standing_agent(0, 0, 0);
  nan[Body::Torso].linear_velocity.x() = std::nan("");
  EXPECT_FALSE(is_standing(nan));
}

struct SitRun {
  Plan plan = testing::load_fixture_plan("sit_stand_leave");
  Scene scene = testing::load_fixture_scene("living_room");
  EpisodeTrace trace = run_episode(plan, scene, ExecutorConfig{});
};

const SitRun& sit_run() {
  static const SitRun r;
  return r;
}

TEST(EvaluateTrial, FixtureCompletes) {
  const auto& r = sit_run();
  const TrialOutcome o = evaluate_trial(r.trace, r.plan, r.scene);
  EXPECT_TRUE(o.completed);
  EXPECT_TRUE(o.standing);
  EXPECT_LT(o.final_root_error, 0.2);
  EXPECT_EQ(o.substeps_completed, o.substeps_total);
  EXPECT_EQ(o.substep_errors.size(), r.plan.steps.size());
  EXPECT_FALSE(o.faulted);
}

TEST(EvaluateTrial, FinalRootErrorDecidesCompletion) {
  const auto& r = sit_run();
  const Vec3 finish = resolve_target(r.plan.steps.back().human_target, r.scene);
  for (const auto& [offset, expect] : std::vector<std::pair<double, bool>>{{0.05, true}, {0.25, false}}) {
    EpisodeTrace t = r.trace;
    AgentState& a = t.frames.back().agent;
    const Vec3 root = a.root().position;
    shift_agent(a, Vec3(finish.x() + offset - root.x(), finish.y() - root.y(), 0.0));
    const TrialOutcome o = evaluate_trial(t, r.plan, r.scene);
    EXPECT_NEAR(o.final_root_error, std::hypot(offset, root.z() - finish.z()), 1e-12);
    EXPECT_EQ(o.completed, expect) << offset;
  }
}

TEST(EvaluateTrial, PartialRunCountsSubsteps) {
  const auto& r = sit_run();
  EpisodeTrace t = r.trace;
  // Cut the trace right after the second step finished.
  std::size_t cut = 0;
  for (std::size_t k = 0; k < t.frames.size(); ++k) {
    if (t.frames[k].next_status.stage_index == 3) {
      cut = k + 1;
      break;
    }
  }
  ASSERT_GT(cut, 0u);
  t.frames.resize(cut);
  t.completed = false;
  t.stages_completed = 2;
  const TrialOutcome o = evaluate_trial(t, r.plan, r.scene);
  EXPECT_EQ(o.substeps_completed, 2);
  EXPECT_EQ(o.substeps_total, 3);
  EXPECT_EQ(o.substep_errors.size(), 2u);
  EXPECT_FALSE(o.completed);
}

TEST(EvaluateTrial, EmptyTraceThrows) {
  const auto& r = sit_run();
  EXPECT_THROW(evaluate_trial(EpisodeTrace{}, r.plan, r.scene), std::invalid_argument);
}

TEST(ClassifyStep, FixtureKinds) {
  const Plan carry = testing::load_fixture_plan("carry_box");
  const Scene room = testing::load_fixture_scene("storage_room");
  std::vector<StepKind> kinds;
  for (const auto& s : carry.steps) kinds.push_back(classify_step(s, room));
  EXPECT_NE(std::find(kinds.begin(), kinds.end(), StepKind::DynamicInteraction), kinds.end());
  const Plan sit = testing::load_fixture_plan("sit_stand_leave");
  EXPECT_EQ(classify_step(sit.steps[0], testing::load_fixture_scene("living_room")),
            StepKind::StaticInteraction);
}

TrialOutcome outcome(bool completed, bool success, int done, int total, std::vector<double> sub,
                     std::vector<double> track) {
  TrialOutcome o;
  o.completed = completed;
  o.interaction_success = success;
  o.substeps_completed = done;
  o.substeps_total = total;
  o.substep_errors = std::move(sub);
  o.tracking_errors = std::move(track);
  return o;
}

TEST(Aggregate, HandComputedRates) {
  const std::vector<TrialOutcome> v{outcome(true, true, 3, 3, {0.1, 0.2, 0.3}, {0.05, 0.15}),
                                    outcome(false, false, 2, 3, {0.4, 0.0}, {0.1})};
  const MetricsReport r = aggregate(v);
  EXPECT_EQ(r.n_trials, 2);
  EXPECT_DOUBLE_EQ(r.completion_rate, 50.0);
  EXPECT_DOUBLE_EQ(r.success_rate, 50.0);
  EXPECT_NEAR(r.substep_completion_ratio, 500.0 / 6.0, 1e-12);
  ASSERT_TRUE(r.substep_precision.has_value());
  EXPECT_NEAR(*r.substep_precision, 100.0 * 1.0 / 5.0, 1e-12);
  ASSERT_TRUE(r.precision.has_value());
  EXPECT_NEAR(*r.precision, 10.0, 1e-12);  // only the successful trial counts
}

TEST(Aggregate, PrecisionAbsentWithoutSuccess) {
  const MetricsReport r = aggregate({outcome(false, false, 0, 2, {}, {0.1})});
  EXPECT_FALSE(r.precision.has_value());
  EXPECT_FALSE(r.substep_precision.has_value());
  EXPECT_EQ(r.completion_rate, 0.0);
  EXPECT_THROW(aggregate({}), std::invalid_argument);
  const auto j = to_json(r);
  EXPECT_TRUE(j["precision_cm"].is_null());
  EXPECT_NE(format_report_table(r).find("n/a"), std::string::npos);
}

TEST(Aggregate, PermutationInvariant) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 0.3);
  std::vector<TrialOutcome> v;
  for (int i = 0; i < 40; ++i) {
    const int total = 1 + int(rng() % 5);
    v.push_back(outcome(rng() % 2, rng() % 2, int(rng() % (total + 1)), total, {u(rng), u(rng)}, {u(rng)}));
  }
  const MetricsReport a = aggregate(v);
  for (int t = 0; t < 5; ++t) {
    std::shuffle(v.begin(), v.end(), rng);
    const MetricsReport b = aggregate(v);
    EXPECT_DOUBLE_EQ(a.completion_rate, b.completion_rate);
    EXPECT_DOUBLE_EQ(a.success_rate, b.success_rate);
    EXPECT_DOUBLE_EQ(a.substep_completion_ratio, b.substep_completion_ratio);
    EXPECT_NEAR(*a.substep_precision, *b.substep_precision, 1e-12);
    EXPECT_NEAR(*a.precision, *b.precision, 1e-12);
  }
}

}  // namespace
}  // namespace rmd
