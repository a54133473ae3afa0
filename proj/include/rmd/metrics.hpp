#ifndef RMD_METRICS_HPP_
#define RMD_METRICS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rmd/executor.hpp"
#include "rmd/goal.hpp"
#include "rmd/plan.hpp"
#include "rmd/scene.hpp"
#include "rmd/skeleton.hpp"

namespace rmd {

inline constexpr double kStandingMinHeight = 0.8;
inline constexpr double kStandingMaxHeight = 1.1;
inline constexpr double kStandingMaxSpeed = 0.3;
inline constexpr double kStandingHeadClearance = 0.5;
inline constexpr double kSuccessRadius = 0.20;

inline bool is_standing(const AgentState& agent) {
  const double h = agent.root().position.z();
  if (h < kStandingMinHeight || h > kStandingMaxHeight) return false;
  for (const auto& b : agent.bodies) {
    if (!(b.linear_velocity.norm() < kStandingMaxSpeed)) return false;
  }
  return agent[Body::Head].position.z() - h >= kStandingHeadClearance;
}

enum class StepKind { Locomotion, StaticInteraction, DynamicInteraction };

/*
 * Dynamic steps move a movable object to a destination on another object;
 * static steps bring a body part onto an object (some edge approaches);
 * anything else is locomotion scored by the root.
 */
inline StepKind classify_step(const InteractionStep& step, const Scene& scene) {
  const SceneObject& focus = focus_object(step, scene);
  if (step.object_target && focus.movable && step.object_target->object != focus.name)
    return StepKind::DynamicInteraction;
  for (const auto& e : step.graph.edges) {
    if (e.dynamic == MovementDynamic::Approach) return StepKind::StaticInteraction;
  }
  return StepKind::Locomotion;
}

//! Scene with object states replaced by the ones recorded on a frame.
inline Scene scene_at(const Scene& scene, const FrameRecord& frame) {
  Scene s = scene;
  for (std::size_t i = 0; i < s.objects.size() && i < frame.objects.size(); ++i)
    s.objects[i].state = frame.objects[i];
  return s;
}

//! Tracking error of one frame for the step it evaluated.
inline double tracking_error(const InteractionStep& step, StepKind kind, const Scene& scene,
                             const FrameRecord& frame) {
  const Scene s = scene_at(scene, frame);
  switch (kind) {
    case StepKind::DynamicInteraction:
      return (focus_object(step, s).state.position - frame.targets.object).norm();
    case StepKind::StaticInteraction:
      for (const auto& e : step.graph.edges) {
        if (e.dynamic != MovementDynamic::Approach) continue;
        const PartRef ref = require_part(step, s, e.object_part);
        const Vec3& p = frame.agent[e.human_part].position;
        return (nearest_surface_point(*ref.part, ref.object->state, p).point - p).norm();
      }
      break;
    case StepKind::Locomotion:
      break;
  }
  return (frame.agent.root().position - frame.targets.human).norm();
}

struct TrialOutcome {
  int substeps_total = 0;
  int substeps_completed = 0;
  bool completed = false;
  bool interaction_success = false;
  bool standing = false;
  double final_root_error = std::numeric_limits<double>::infinity();
  //! Error of each completed sub-step on the frame it crossed the threshold.
  std::vector<double> substep_errors;
  //! Errors on interaction frames inside the success radius.
  std::vector<double> tracking_errors;
  bool faulted = false;
};

inline TrialOutcome evaluate_trial(const EpisodeTrace& trace, const Plan& plan, const Scene& scene) {
  if (trace.frames.empty()) throw std::invalid_argument("evaluate_trial: empty trace");
  TrialOutcome out;
  out.substeps_total = int(plan.steps.size());
  out.substeps_completed = trace.stages_completed;
  out.faulted = trace.error.has_value();

  std::vector<StepKind> kinds;
  for (const auto& s : plan.steps) kinds.push_back(classify_step(s, scene));
  std::vector<double> best(plan.steps.size(), std::numeric_limits<double>::infinity());
  for (const auto& f : trace.frames) {
    const std::size_t i = std::size_t(f.status.stage_index - 1);
    const double err = tracking_error(plan.steps[i], kinds[i], scene, f);
    best[i] = std::min(best[i], err);
    const bool finished_here =
        f.next_status.stage_index != f.status.stage_index || f.next_status.completed != f.status.completed;
    if (finished_here) out.substep_errors.push_back(err);
    if (kinds[i] != StepKind::Locomotion && err < kSuccessRadius) out.tracking_errors.push_back(err);
  }
  bool any_interaction = false;
  out.interaction_success = true;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    if (kinds[i] == StepKind::Locomotion) continue;
    any_interaction = true;
    if (!(best[i] < kSuccessRadius)) out.interaction_success = false;
  }
  if (!any_interaction) out.interaction_success = trace.completed;

  const FrameRecord& last = trace.frames.back();
  const Scene final_scene = scene_at(scene, last);
  const Vec3 finish = resolve_target(plan.steps.back().human_target, final_scene);
  out.final_root_error = (last.agent.root().position - finish).norm();
  out.standing = is_standing(last.agent);
  out.completed = trace.completed && out.standing && out.final_root_error < kSuccessRadius;
  return out;
}

struct MetricsReport {
  double completion_rate = 0.0;           // %
  double substep_completion_ratio = 0.0;  // %
  std::optional<double> substep_precision;  // cm
  double success_rate = 0.0;              // %
  std::optional<double> precision;        // cm
  int n_trials = 0;
  int faults = 0;
};

inline MetricsReport aggregate(const std::vector<TrialOutcome>& outcomes) {
  if (outcomes.empty()) throw std::invalid_argument("aggregate: no trials");
  MetricsReport r;
  r.n_trials = int(outcomes.size());
  long completed = 0, success = 0, sub_done = 0, sub_total = 0;
  double sub_err = 0.0, prec_sum = 0.0;
  long sub_count = 0, prec_count = 0;
  for (const auto& o : outcomes) {
    completed += o.completed;
    success += o.interaction_success;
    r.faults += o.faulted;
    sub_done += o.substeps_completed;
    sub_total += o.substeps_total;
    for (double e : o.substep_errors) {
      sub_err += e;
      ++sub_count;
    }
    if (o.interaction_success) {
      for (double e : o.tracking_errors) {
        prec_sum += e;
        ++prec_count;
      }
    }
  }
  const double n = double(outcomes.size());
  r.completion_rate = 100.0 * double(completed) / n;
  r.success_rate = 100.0 * double(success) / n;
  r.substep_completion_ratio = sub_total ? 100.0 * double(sub_done) / double(sub_total) : 0.0;
  if (sub_count) r.substep_precision = 100.0 * sub_err / double(sub_count);
  if (prec_count) r.precision = 100.0 * prec_sum / double(prec_count);
  return r;
}

inline nlohmann::ordered_json to_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  j["n_trials"] = r.n_trials;
  j["faults"] = r.faults;
  j["completion_rate"] = r.completion_rate;
  j["substep_completion_ratio"] = r.substep_completion_ratio;
  j["substep_precision_cm"] = opt(r.substep_precision);
  j["success_rate"] = r.success_rate;
  j["precision_cm"] = opt(r.precision);
  return j;
}

inline std::string format_report_table(const MetricsReport& r) {
  auto cell = [](const std::optional<double>& v) {
    char buf[32];
    if (!v) return std::string("n/a");
    std::snprintf(buf, sizeof buf, "%.2f", *v);
    return std::string(buf);
  };
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%-8s %-8s %-12s %-12s %-12s %-12s %-14s\n"
                "%-8d %-8d %-12.2f %-12.2f %-12s %-12.2f %-14s\n",
                "trials", "faults", "complete%", "substep%", "substep_cm", "success%", "precision_cm",
                r.n_trials, r.faults, r.completion_rate, r.substep_completion_ratio,
                cell(r.substep_precision).c_str(), r.success_rate, cell(r.precision).c_str());
  return buf;
}

}  // namespace rmd

#endif  // RMD_METRICS_HPP_
