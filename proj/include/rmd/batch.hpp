#ifndef RMD_BATCH_HPP_
#define RMD_BATCH_HPP_

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "rmd/executor.hpp"
#include "rmd/metrics.hpp"
#include "rmd/plan.hpp"
#include "rmd/plan_validation.hpp"
#include "rmd/randomize.hpp"
#include "rmd/scene.hpp"

namespace rmd {

struct TrialSpec {
  const Plan* plan = nullptr;
  const Scene* scene = nullptr;
  //! Empty: run the scene as authored.
  std::optional<std::uint64_t> seed;
};

struct TrialResult {
  Scene scene;  // after placement
  std::optional<Placement> placement;
  EpisodeTrace trace;
  TrialOutcome outcome;
  //! Set when the trial could not run or the episode faulted.
  std::optional<std::string> fault;
};

/*
 * One isolated trial: place, validate against the placed scene, run, score.
 * Never throws; problems end up in `fault` with outcome.faulted set.
 */
inline TrialResult run_trial(const TrialSpec& spec, const ExecutorConfig& config) {
  TrialResult r;
  try {
    if (spec.seed) {
      auto [placed, placement] = randomize_scene(*spec.scene, *spec.seed);
      r.scene = std::move(placed);
      r.placement = placement;
    } else {
      r.scene = *spec.scene;
    }
    const ValidationReport report = validate_plan(*spec.plan, r.scene);
    if (!report.empty()) throw std::runtime_error("invalid plan: " + report.front().to_string());
    r.trace = run_episode(*spec.plan, r.scene, config);
    r.outcome = evaluate_trial(r.trace, *spec.plan, r.scene);
    if (r.trace.error) r.fault = *r.trace.error;
  } catch (const std::exception& e) {
    r.fault = e.what();
    r.outcome = TrialOutcome{};
    r.outcome.substeps_total = int(spec.plan->steps.size());
    r.outcome.faulted = true;
  }
  return r;
}

/*
 * Runs every spec on up to `jobs` threads. Results are stored by index, so the
 * output does not depend on scheduling.
 */
inline std::vector<TrialResult> run_trials(const std::vector<TrialSpec>& specs, const ExecutorConfig& config,
                                           unsigned jobs = 1) {
  std::vector<TrialResult> results(specs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < specs.size(); i = next++) results[i] = run_trial(specs[i], config);
  };
  const unsigned n = std::max(1u, std::min<unsigned>(jobs, unsigned(specs.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return results;
}

/*
 * Aggregates the trials that ran; faulted trials are only counted. With no
 * successful trial the rates are zero and both precisions stay empty.
 */
inline MetricsReport summarize(const std::vector<TrialResult>& results) {
  std::vector<TrialOutcome> ok;
  int faults = 0;
  for (const auto& r : results) {
    if (r.outcome.faulted) {
      ++faults;
    } else {
      ok.push_back(r.outcome);
    }
  }
  MetricsReport report;
  if (!ok.empty()) report = aggregate(ok);
  report.faults = faults;
  return report;
}

}  // namespace rmd

#endif  // RMD_BATCH_HPP_
