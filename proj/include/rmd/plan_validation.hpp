#ifndef RMD_PLAN_VALIDATION_HPP_
#define RMD_PLAN_VALIDATION_HPP_

#include <cstddef>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "rmd/plan.hpp"
#include "rmd/scene.hpp"

namespace rmd {

struct Violation {
  std::size_t step = 0;  // 1-based
  std::string message;

  std::string to_string() const {
    return "step " + std::to_string(step) + ": " + message;
  }
};

using ValidationReport = std::vector<Violation>;

/*
 * Checks a plan against a scene and returns every violation found; an empty
 * report means the plan is executable.
 */
inline ValidationReport validate_plan(const Plan& plan, const Scene& scene) {
  ValidationReport report;
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const std::size_t index = i + 1;
    const InteractionStep& step = plan.steps[i];
    std::set<std::string> reported;
    auto add = [&](const std::string& msg) {
      if (reported.insert(msg).second) report.push_back({index, msg});
    };

    if (scene.find(step.human_target.object) == nullptr)
      add("unknown object: " + step.human_target.object);
    if (step.object_target && scene.find(step.object_target->object) == nullptr)
      add("unknown object: " + step.object_target->object);

    if (step.graph.edges.empty()) add("empty graph");

    std::set<std::tuple<int, std::string, std::string>> seen;
    bool needs_object_target = false;
    for (const auto& edge : step.graph.edges) {
      const PartRef ref = resolve_part(step, scene, edge.object_part);
      if (!ref) {
        add(ref.error);
        continue;
      }
      const auto key = std::make_tuple(index_of(edge.human_part), ref.object->name, ref.part->name);
      if (!seen.insert(key).second) {
        report.push_back({index, "duplicate edge: (" + std::string(body_name(edge.human_part)) +
                                     ", " + edge.object_part + ")"});
      }
      if (edge.dynamic != MovementDynamic::Free && ref.object->movable) needs_object_target = true;
    }
    if (needs_object_target && !step.object_target)
      add("missing object_target: graph constrains a movable object");
  }
  return report;
}

}  // namespace rmd

#endif  // RMD_PLAN_VALIDATION_HPP_
