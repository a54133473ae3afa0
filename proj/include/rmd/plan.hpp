#ifndef RMD_PLAN_HPP_
#define RMD_PLAN_HPP_

#include <algorithm>
#include <array>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rmd/skeleton.hpp"

namespace rmd {

//! Relative-motion pattern of one (human part, object part) edge.
enum class MovementDynamic : int {
  Stationary = 0,
  Approach = 1,
  Leave = 2,
  Free = 3,
};

inline constexpr std::array<std::string_view, 4> kDynamicTokens{"stationary", "approach",
                                                                 "leave", "free"};

constexpr int code_of(MovementDynamic d) { return static_cast<int>(d); }

inline std::string_view to_token(MovementDynamic d) { return kDynamicTokens[code_of(d)]; }

inline std::optional<MovementDynamic> dynamic_from_token(std::string_view token) {
  for (std::size_t i = 0; i < kDynamicTokens.size(); ++i) {
    if (kDynamicTokens[i] == token) return static_cast<MovementDynamic>(i);
  }
  return std::nullopt;
}

inline std::optional<MovementDynamic> dynamic_from_code(int code) {
  if (code < 0 || code > 3) return std::nullopt;
  return static_cast<MovementDynamic>(code);
}

//! The seven canonical spatial relations a target may name.
enum class Relation : int { Center = 0, Forward, Back, Left, Right, Up, Down };

inline constexpr std::array<std::string_view, 7> kRelationTokens{
    "center", "forward", "back", "left", "right", "up", "down"};

inline std::string_view to_token(Relation r) { return kRelationTokens[static_cast<int>(r)]; }

inline std::optional<Relation> relation_from_token(std::string_view token) {
  for (std::size_t i = 0; i < kRelationTokens.size(); ++i) {
    if (kRelationTokens[i] == token) return static_cast<Relation>(i);
  }
  return std::nullopt;
}

struct TargetSpec {
  std::string object;
  Relation relation = Relation::Center;

  bool operator==(const TargetSpec&) const = default;
};

struct EdgeSpec {
  Body human_part = Body::Pelvis;
  //! Part token, either bare ("seat") or qualified with its object ("couch.seat").
  std::string object_part;
  MovementDynamic dynamic = MovementDynamic::Free;

  bool operator==(const EdgeSpec&) const = default;
};

struct RmdGraphSpec {
  std::vector<EdgeSpec> edges;

  bool operator==(const RmdGraphSpec&) const = default;
};

struct InteractionStep {
  std::string label;
  TargetSpec human_target;
  std::optional<TargetSpec> object_target;
  RmdGraphSpec graph;

  bool operator==(const InteractionStep&) const = default;
};

struct Plan {
  std::string scene_id;
  std::string instruction;
  std::vector<InteractionStep> steps;

  bool operator==(const Plan&) const = default;
};

inline constexpr int kPlanSchemaVersion = 1;

/*
 * Raised for malformed plan documents. Syntax errors carry the 1-based line and
 * column of the offending byte; schema and domain errors carry the JSON path.
 */
class PlanError : public std::runtime_error {
 public:
  enum class Kind { Syntax, Schema, Domain };

  PlanError(Kind kind, std::string message, std::size_t line = 0, std::size_t column = 0)
      : std::runtime_error(std::move(message)), kind_(kind), line_(line), column_(column) {}

  Kind kind() const { return kind_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  Kind kind_;
  std::size_t line_;
  std::size_t column_;
};

namespace detail {

//! 1-based (line, column) of a byte offset.
inline std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

class PlanReader {
 public:
  explicit PlanReader(std::vector<std::string>* warnings) : warnings_(warnings) {}

  Plan read(const nlohmann::json& doc) {
    require_object(doc, "$");
    warn_unknown(doc, "$", {"schema_version", "scene_id", "instruction", "steps"});
    const auto& version = field(doc, "schema_version", "$");
    if (!version.is_number_integer() || version.get<long long>() != kPlanSchemaVersion) {
      throw schema("$.schema_version: expected " + std::to_string(kPlanSchemaVersion));
    }
    Plan plan;
    plan.scene_id = string_field(doc, "scene_id", "$");
    plan.instruction = string_field(doc, "instruction", "$");
    const auto& steps = field(doc, "steps", "$");
    if (!steps.is_array()) throw schema("$.steps: expected array");
    if (steps.empty()) throw schema("$.steps: a plan needs at least one step");
    for (std::size_t i = 0; i < steps.size(); ++i) {
      plan.steps.push_back(read_step(steps[i], "$.steps[" + std::to_string(i) + "]"));
    }
    return plan;
  }

 private:
  InteractionStep read_step(const nlohmann::json& j, const std::string& path) {
    require_object(j, path);
    warn_unknown(j, path, {"label", "human_target", "object_target", "edges"});
    InteractionStep step;
    step.label = string_field(j, "label", path);
    step.human_target = read_target(field(j, "human_target", path), path + ".human_target");
    const auto& obj = field(j, "object_target", path);
    if (!obj.is_null()) step.object_target = read_target(obj, path + ".object_target");
    const auto& edges = field(j, "edges", path);
    if (!edges.is_array()) throw schema(path + ".edges: expected array");
    for (std::size_t i = 0; i < edges.size(); ++i) {
      step.graph.edges.push_back(read_edge(edges[i], path + ".edges[" + std::to_string(i) + "]"));
    }
    return step;
  }

  TargetSpec read_target(const nlohmann::json& j, const std::string& path) {
    require_object(j, path);
    warn_unknown(j, path, {"object", "relation"});
    TargetSpec t;
    t.object = string_field(j, "object", path);
    const std::string rel = string_field(j, "relation", path);
    const auto relation = relation_from_token(rel);
    if (!relation) {
      throw PlanError(PlanError::Kind::Domain,
                      path + ".relation: unknown relation token '" + rel + "'");
    }
    t.relation = *relation;
    return t;
  }

  EdgeSpec read_edge(const nlohmann::json& j, const std::string& path) {
    require_object(j, path);
    warn_unknown(j, path, {"human_part", "object_part", "dynamic"});
    EdgeSpec e;
    const std::string human = string_field(j, "human_part", path);
    const auto body = body_from_name(human);
    if (!body) throw schema(path + ".human_part: unknown human part '" + human + "'");
    e.human_part = *body;
    e.object_part = string_field(j, "object_part", path);
    if (e.object_part.empty()) throw schema(path + ".object_part: empty token");
    const std::string dyn = string_field(j, "dynamic", path);
    const auto dynamic = dynamic_from_token(dyn);
    if (!dynamic) throw schema(path + ".dynamic: unknown dynamics token '" + dyn + "'");
    e.dynamic = *dynamic;
    return e;
  }

  static PlanError schema(std::string msg) {
    return PlanError(PlanError::Kind::Schema, std::move(msg));
  }

  static void require_object(const nlohmann::json& j, const std::string& path) {
    if (!j.is_object()) throw schema(path + ": expected object");
  }

  static const nlohmann::json& field(const nlohmann::json& j, const char* key,
                                     const std::string& path) {
    const auto it = j.find(key);
    if (it == j.end()) throw schema(path + ": missing field '" + key + "'");
    return *it;
  }

  static std::string string_field(const nlohmann::json& j, const char* key,
                                  const std::string& path) {
    const auto& v = field(j, key, path);
    if (!v.is_string()) throw schema(path + "." + key + ": expected string");
    return v.get<std::string>();
  }

  void warn_unknown(const nlohmann::json& j, const std::string& path,
                    std::initializer_list<std::string_view> known) {
    if (warnings_ == nullptr) return;
    for (const auto& [key, value] : j.items()) {
      if (std::find(known.begin(), known.end(), key) == known.end()) {
        warnings_->push_back(path + ": ignoring unknown field '" + key + "'");
      }
    }
  }

  std::vector<std::string>* warnings_;
};

}  // namespace detail

/*
 * Parses a plan document. Unknown fields are tolerated and reported through
 * `warnings` when given; closed-vocabulary violations always throw.
 */
inline Plan parse_plan(std::string_view document, std::vector<std::string>* warnings = nullptr) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document.begin(), document.end());
  } catch (const nlohmann::json::parse_error& e) {
    // e.byte is 1-based and points just past the offending character
    const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    const auto [line, column] = detail::line_column(document, byte);
    throw PlanError(PlanError::Kind::Syntax,
                    "syntax error at line " + std::to_string(line) + ", column " +
                        std::to_string(column) + ": " + e.what(),
                    line, column);
  }
  return detail::PlanReader(warnings).read(doc);
}

inline nlohmann::ordered_json to_json(const TargetSpec& t) {
  nlohmann::ordered_json j;
  j["object"] = t.object;
  j["relation"] = std::string(to_token(t.relation));
  return j;
}

inline nlohmann::ordered_json to_json(const Plan& plan) {
  nlohmann::ordered_json doc;
  doc["schema_version"] = kPlanSchemaVersion;
  doc["scene_id"] = plan.scene_id;
  doc["instruction"] = plan.instruction;
  auto steps = nlohmann::ordered_json::array();
  for (const auto& step : plan.steps) {
    nlohmann::ordered_json s;
    s["label"] = step.label;
    s["human_target"] = to_json(step.human_target);
    s["object_target"] = step.object_target ? to_json(*step.object_target) : nullptr;
    auto edges = nlohmann::ordered_json::array();
    for (const auto& e : step.graph.edges) {
      nlohmann::ordered_json je;
      je["human_part"] = std::string(body_name(e.human_part));
      je["object_part"] = e.object_part;
      je["dynamic"] = std::string(to_token(e.dynamic));
      edges.push_back(std::move(je));
    }
    s["edges"] = std::move(edges);
    steps.push_back(std::move(s));
  }
  doc["steps"] = std::move(steps);
  return doc;
}

//! Canonical document text; stable key order and two-space indentation.
inline std::string serialize_plan(const Plan& plan) {
  if (plan.steps.empty()) throw std::invalid_argument("serialize_plan: plan has no steps");
  return to_json(plan).dump(2) + "\n";
}

}  // namespace rmd

#endif  // RMD_PLAN_HPP_
