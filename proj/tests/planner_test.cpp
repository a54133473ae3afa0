#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>

#include <unistd.h>

#include "test_support.hpp"

namespace rmd {
namespace {

namespace fs = std::filesystem;

const char* kSitInstruction = "sit on the couch, then get up and walk away";

PromptTemplates templates() { return load_templates(testing::data_dir() / "templates"); }

fs::path scratch_dir(const std::string& tag) {
  static std::atomic<int> n{0};
  const fs::path p = fs::temp_directory_path() / ("rmd_planner_" + tag + "_" + std::to_string(::getpid()) +
                                                  "_" + std::to_string(n++));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

TEST(BuildPrompt, SixSectionsInOrderWithPlaceholdersFilled) {
  const Scene scene = testing::load_fixture_scene("living_room");
  const PromptBundle b = build_prompt(kSitInstruction, scene, templates(), "top.png");
  ASSERT_EQ(b.sections.size(), 6u);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(b.sections[i].first, kPromptSections[i]);
  const std::string text = b.render();
  EXPECT_EQ(text.find("{{"), std::string::npos);
  EXPECT_NE(text.find(kSitInstruction), std::string::npos);
  EXPECT_NE(text.find("couch"), std::string::npos);
  EXPECT_NE(text.find("top.png"), std::string::npos);
}

TEST(BuildPrompt, MissingSectionIsNamed) {
  PromptTemplates t = templates();
  t.erase("plan_rules");
  try {
    build_prompt("x", testing::load_fixture_scene("living_room"), t);
    FAIL() << "expected PlannerError";
  } catch (const PlannerError& e) {
    EXPECT_NE(std::string(e.what()).find("plan_rules"), std::string::npos);
  }
}

TEST(BuildPrompt, ByteIdenticalAcrossCalls) {
  const Scene scene = testing::load_fixture_scene("living_room");
  EXPECT_EQ(build_prompt("a", scene, templates()).render(), build_prompt("a", scene, templates()).render());
}

TEST(BuildPrompt, RecordedRequestMatchesCurrentTemplates) {
  const Scene scene = testing::load_fixture_scene("living_room");
  const std::string key = fixture_key("living_room", kSitInstruction);
  const std::string recorded =
      read_text_file(testing::data_dir() / "planner_fixtures" / (key + ".request.txt"));
  EXPECT_EQ(build_prompt(kSitInstruction, scene, templates(), "living_room_top.png").render(), recorded);
}

TEST(FixtureKey, StableAndInstructionSensitive) {
  EXPECT_EQ(fixture_key("living_room", kSitInstruction), "living_room_eeef58062937446f");
  EXPECT_NE(fixture_key("living_room", "a"), fixture_key("living_room", "b"));
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(RequestPlan, FixtureReplayParsesThreeSteps) {
  const Scene scene = testing::load_fixture_scene("living_room");
  const auto r = request_plan(build_prompt(kSitInstruction, scene, templates()), "living_room",
                              testing::data_dir() / "planner_fixtures");
  ASSERT_TRUE(r.plan.has_value()) << r.parse_error.value_or("");
  EXPECT_EQ(r.plan->steps.size(), 3u);
  EXPECT_EQ(r.provenance, Provenance::Fixture);
  EXPECT_EQ(*r.plan, testing::load_fixture_plan("sit_stand_leave"));
  EXPECT_TRUE(validate_plan(*r.plan, scene).empty());
}

TEST(RequestPlan, MissingFixtureNamesKey) {
  const Scene scene = testing::load_fixture_scene("living_room");
  try {
    request_plan(build_prompt("dance", scene, templates()), "living_room",
                 testing::data_dir() / "planner_fixtures");
    FAIL() << "expected FixtureMissingError";
  } catch (const FixtureMissingError& e) {
    EXPECT_EQ(e.key(), fixture_key("living_room", "dance"));
  }
}

TEST(RequestPlan, MalformedReplyKeepsRawText) {
  const Scene scene = testing::load_fixture_scene("living_room");
  const fs::path store = testing::data_dir() / "planner_fixtures";
  const auto r = request_plan(build_prompt("lie down on the couch", scene, templates()), "living_room", store);
  EXPECT_FALSE(r.plan.has_value());
  ASSERT_TRUE(r.parse_error.has_value());
  EXPECT_EQ(r.raw_text,
            read_text_file(store / (fixture_key("living_room", "lie down on the couch") + ".response.txt")));
}

TEST(RequestPlan, LiveTransportIsRecordedThenReplayable) {
  const Scene scene = testing::load_fixture_scene("living_room");
  const fs::path store = scratch_dir("live");
  const std::string reply = "```json\n" + serialize_plan(testing::load_fixture_plan("sit_stand_leave")) + "```\n";
  std::string seen_prompt, seen_image;
  const PlannerTransport fake = [&](const std::string& prompt, const std::string& image) {
    seen_prompt = prompt;
    seen_image = image;
    return reply;
  };
  const PromptBundle bundle = build_prompt(kSitInstruction, scene, templates(), "img.png");
  const auto live = request_plan(bundle, "living_room", store, fake);
  EXPECT_EQ(live.provenance, Provenance::Live);
  ASSERT_TRUE(live.plan.has_value());
  EXPECT_EQ(seen_prompt, bundle.render());
  EXPECT_EQ(seen_image, "img.png");
  const std::string key = fixture_key("living_room", kSitInstruction);
  EXPECT_EQ(read_text_file(store / (key + ".request.txt")), bundle.render());
  EXPECT_EQ(read_text_file(store / (key + ".response.txt")), reply);

  const auto replay = request_plan(bundle, "living_room", store);
  EXPECT_EQ(replay.provenance, Provenance::Fixture);
  EXPECT_EQ(replay.plan, live.plan);
  fs::remove_all(store);
}

TEST(RequestPlan, TransportErrorPropagates) {
  const Scene scene = testing::load_fixture_scene("living_room");
  const fs::path store = scratch_dir("err");
  const PlannerTransport down = [](const std::string&, const std::string&) -> std::string {
    throw TransportError("connection refused");
  };
  EXPECT_THROW(request_plan(build_prompt("x", scene, templates()), "living_room", store, down), TransportError);
  EXPECT_TRUE(fs::is_empty(store));
  fs::remove_all(store);
}

TEST(StripCodeFence, Variants) {
  EXPECT_EQ(strip_code_fence("{}"), "{}");
  EXPECT_EQ(strip_code_fence("intro\n```json\n{}\n```\ntrailer"), "{}\n");
  EXPECT_EQ(strip_code_fence("```\n[1]\n```"), "[1]\n");
}

TEST(DescribeScene, WaypointsByNameOnly) {
  const std::string d = describe_scene(testing::load_fixture_scene("living_room"));
  EXPECT_NE(d.find("(waypoint)"), std::string::npos);
}

}  // namespace
}  // namespace rmd
