#ifndef RMD_IO_HPP_
#define RMD_IO_HPP_

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rmd/executor.hpp"
#include "rmd/goal.hpp"
#include "rmd/metrics.hpp"
#include "rmd/plan.hpp"

namespace rmd {

//! Fixed-format number so that identical runs give identical bytes.
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

//! Widest graph in the plan; trace rows are padded to this many edge columns.
inline std::size_t max_edges(const Plan& plan) {
  std::size_t n = 0;
  for (const auto& s : plan.steps) n = std::max(n, s.graph.edges.size());
  return n;
}

/*
 * Reward trace: t, per_edge_0..k, r_RMD, r_dh, r_do, r_task, r_style, r_total,
 * stage_index. Steps with fewer edges leave the trailing edge cells empty.
 */
inline void write_reward_trace_csv(std::ostream& os, const EpisodeTrace& trace, const Plan& plan) {
  const std::size_t k = max_edges(plan);
  os << "t";
  for (std::size_t i = 0; i < k; ++i) os << ",per_edge_" << i;
  os << ",r_RMD,r_dh,r_do,r_task,r_style,r_total,stage_index\n";
  for (const auto& f : trace.frames) {
    os << fmt(f.time);
    for (std::size_t i = 0; i < k; ++i) {
      os << ',';
      if (i < f.reward.per_edge.size()) os << fmt(f.reward.per_edge[i]);
    }
    const auto& r = f.reward;
    os << ',' << fmt(r.r_rmd_total) << ',' << fmt(r.r_dh) << ',' << fmt(r.r_do) << ','
       << fmt(r.r_task) << ',' << fmt(r.r_style) << ',' << fmt(r.r_total) << ','
       << f.status.stage_index << '\n';
  }
}

inline nlohmann::ordered_json episode_summary(const EpisodeTrace& trace, const TrialOutcome& outcome) {
  nlohmann::ordered_json j;
  j["completed"] = outcome.completed;
  j["stages_completed"] = trace.stages_completed;
  j["frames"] = trace.frames.size();
  j["final_root_error_m"] = outcome.final_root_error;
  j["fsm_completed"] = trace.completed;
  j["standing"] = outcome.standing;
  j["interaction_success"] = outcome.interaction_success;
  if (trace.error) {
    j["error"] = *trace.error;
    j["error_frame"] = trace.error_frame;
  }
  return j;
}

//! One row per goal vector, padded with empty cells to `width` columns.
inline void write_goal_csv(std::ostream& os, const std::vector<std::string>& header,
                           const std::vector<std::vector<double>>& rows) {
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i) os << ',';
      if (i < row.size()) os << fmt(row[i]);
    }
    os << '\n';
  }
}

}  // namespace rmd

#endif  // RMD_IO_HPP_
