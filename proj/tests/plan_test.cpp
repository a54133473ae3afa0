#include <gtest/gtest.h>

#include <random>
#include <string>

#include "test_support.hpp"

namespace rmd {
namespace {

const char* kSitDoc = R"({
  "schema_version": 1,
  "scene_id": "living_room",
  "instruction": "sit",
  "steps": [
    {"label": "sit",
     "human_target": {"object": "couch", "relation": "forward"},
     "object_target": null,
     "edges": [
       {"human_part": "pelvis", "object_part": "seat", "dynamic": "approach"},
       {"human_part": "left_hand", "object_part": "backrest", "dynamic": "free"}
     ]}
  ]
})";

TEST(PlanParse, OneStepSitPlan) {
  const Plan p = parse_plan(kSitDoc);
  ASSERT_EQ(p.steps.size(), 1u);
  const auto& s = p.steps[0];
  EXPECT_EQ(s.label, "sit");
  EXPECT_EQ(s.human_target.object, "couch");
  EXPECT_EQ(s.human_target.relation, Relation::Forward);
  EXPECT_FALSE(s.object_target.has_value());
  ASSERT_EQ(s.graph.edges.size(), 2u);
  EXPECT_EQ(code_of(s.graph.edges[0].dynamic), 1);
  EXPECT_EQ(code_of(s.graph.edges[1].dynamic), 3);
  EXPECT_EQ(s.graph.edges[0].human_part, Body::Pelvis);
  EXPECT_EQ(s.graph.edges[1].object_part, "backrest");
}

TEST(PlanParse, UnknownDynamicIsSchemaErrorNamingToken) {
  std::string doc = kSitDoc;
  doc.replace(doc.find("\"free\""), 6, "\"hover\"");
  try {
    parse_plan(doc);
    FAIL() << "expected PlanError";
  } catch (const PlanError& e) {
    EXPECT_EQ(e.kind(), PlanError::Kind::Schema);
    EXPECT_NE(std::string(e.what()).find("hover"), std::string::npos);
  }
}

TEST(PlanParse, UnknownRelationIsDomainError) {
  std::string doc = kSitDoc;
  doc.replace(doc.find("\"forward\""), 9, "\"beside\"");
  try {
    parse_plan(doc);
    FAIL() << "expected PlanError";
  } catch (const PlanError& e) {
    EXPECT_EQ(e.kind(), PlanError::Kind::Domain);
    EXPECT_NE(std::string(e.what()).find("beside"), std::string::npos);
  }
}

TEST(PlanParse, SyntaxErrorCarriesLineAndColumn) {
  // Trailing comma before the closing bracket on line 3.
  const std::string doc = "{\n  \"steps\": [\n    1,]\n}";
  try {
    parse_plan(doc);
    FAIL() << "expected PlanError";
  } catch (const PlanError& e) {
    EXPECT_EQ(e.kind(), PlanError::Kind::Syntax);
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.column(), 7u);
  }
}

TEST(PlanParse, MalformedFixtureReportsPosition) {
  try {
    parse_plan(read_text_file(testing::data_dir() / "plans" / "malformed.json"));
    FAIL() << "expected PlanError";
  } catch (const PlanError& e) {
    EXPECT_EQ(e.kind(), PlanError::Kind::Syntax);
    EXPECT_GT(e.line(), 1u);
  }
}

TEST(PlanParse, MissingFieldsAndWrongTypes) {
  EXPECT_THROW(parse_plan(R"({"schema_version": 1, "scene_id": "s", "instruction": "i"})"), PlanError);
  EXPECT_THROW(parse_plan(R"({"schema_version": 2, "scene_id": "s", "instruction": "i", "steps": []})"),
               PlanError);
  EXPECT_THROW(parse_plan(R"({"schema_version": 1, "scene_id": "s", "instruction": "i", "steps": []})"),
               PlanError);
  EXPECT_THROW(parse_plan("[]"), PlanError);
  std::string doc = kSitDoc;
  doc.replace(doc.find("\"pelvis\""), 8, "\"tail\"");
  EXPECT_THROW(parse_plan(doc), PlanError);
}

TEST(PlanParse, UnknownFieldsWarnButParse) {
  std::string doc = kSitDoc;
  doc.replace(doc.find("\"label\": \"sit\""), 14, "\"label\": \"sit\", \"confidence\": 0.7");
  std::vector<std::string> warnings;
  const Plan p = parse_plan(doc, &warnings);
  EXPECT_EQ(p.steps.size(), 1u);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("confidence"), std::string::npos);
}

TEST(PlanParse, WalkthroughFixtureMatchesHandTranscription) {
  const Plan p = testing::load_fixture_plan("walkthrough");
  ASSERT_GE(p.steps.size(), 3u);
  EXPECT_EQ(p.steps[0].human_target, (TargetSpec{"couch", Relation::Forward}));
  EXPECT_EQ(p.steps[0].graph.edges[0], (EdgeSpec{Body::Pelvis, "seat", MovementDynamic::Approach}));
  EXPECT_EQ(p.steps[0].graph.edges[1], (EdgeSpec{Body::LeftHand, "backrest", MovementDynamic::Free}));
  EXPECT_EQ(p.steps[1].human_target, (TargetSpec{"box_stand", Relation::Center}));
  EXPECT_EQ(p.steps[1].graph.edges[0].dynamic, MovementDynamic::Leave);
  EXPECT_EQ(p.steps[2].human_target, (TargetSpec{"shelf_stand", Relation::Center}));
  ASSERT_TRUE(p.steps[2].object_target.has_value());
  EXPECT_EQ(*p.steps[2].object_target, (TargetSpec{"shelf", Relation::Up}));
  EXPECT_EQ(p.steps[2].graph.edges[0].dynamic, MovementDynamic::Stationary);
  EXPECT_EQ(p.steps[2].graph.edges[1].dynamic, MovementDynamic::Stationary);
}

TEST(PlanTokens, DynamicCodesRoundTrip) {
  for (int c = 0; c < 4; ++c) {
    const auto d = dynamic_from_code(c);
    ASSERT_TRUE(d.has_value());
    EXPECT_EQ(code_of(*d), c);
    EXPECT_EQ(dynamic_from_token(to_token(*d)), d);
  }
  EXPECT_FALSE(dynamic_from_code(4).has_value());
  EXPECT_FALSE(dynamic_from_code(-1).has_value());
  EXPECT_EQ(to_token(MovementDynamic::Stationary), "stationary");
  EXPECT_EQ(to_token(MovementDynamic::Free), "free");
}

TEST(PlanTokens, SevenRelations) {
  for (auto t : kRelationTokens) EXPECT_TRUE(relation_from_token(t).has_value());
  EXPECT_EQ(kRelationTokens.size(), 7u);
  EXPECT_FALSE(relation_from_token("Forward").has_value());
}

TEST(PlanSerialize, FixturesRoundTripAndAreByteStable) {
  for (const char* name : {"sit_stand_leave", "carry_box", "open_door", "walkthrough"}) {
    const Plan p = testing::load_fixture_plan(name);
    const std::string a = serialize_plan(p);
    EXPECT_EQ(parse_plan(a), p) << name;
    EXPECT_EQ(serialize_plan(parse_plan(a)), a) << name;
  }
}

TEST(PlanSerialize, EmptyPlanRejected) {
  EXPECT_THROW(serialize_plan(Plan{}), std::invalid_argument);
}

TEST(PlanSerialize, RandomPlansRoundTrip) {
  std::mt19937_64 rng(20240601);
  for (int i = 0; i < 200; ++i) {
    const Plan p = testing::random_plan(rng);
    EXPECT_EQ(parse_plan(serialize_plan(p)), p) << serialize_plan(p);
  }
}

}  // namespace
}  // namespace rmd
