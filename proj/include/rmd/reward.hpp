#ifndef RMD_REWARD_HPP_
#define RMD_REWARD_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rmd/geometry.hpp"
#include "rmd/goal.hpp"
#include "rmd/plan.hpp"

namespace rmd {

struct RewardWeights {
  std::vector<double> lambda_edges;
  double lambda_rmd = 1.0 / 3.0;
  double lambda_h = 1.0 / 3.0;
  double lambda_o = 1.0 / 3.0;
  double alpha_task = 0.5;
  double alpha_style = 0.5;
  double v_star = 1.0;     // m/s
  double epsilon = 1e-3;   // m

  //! Throws std::invalid_argument if any invariant is broken.
  void check() const {
    constexpr double tol = 1e-9;
    double sum = 0.0;
    for (double l : lambda_edges) {
      if (l < 0.0) throw std::invalid_argument("edge weights must be non-negative");
      sum += l;
    }
    if (!lambda_edges.empty() && std::abs(sum - 1.0) > tol)
      throw std::invalid_argument("edge weights must sum to 1");
    if (lambda_rmd < 0.0 || lambda_h < 0.0 || lambda_o < 0.0 ||
        std::abs(lambda_rmd + lambda_h + lambda_o - 1.0) > tol)
      throw std::invalid_argument("term weights must lie on the simplex");
    if (v_star <= 0.0) throw std::invalid_argument("v_star must be positive");
    if (epsilon <= 0.0) throw std::invalid_argument("epsilon must be positive");
  }
};

inline RewardWeights uniform_weights(std::size_t num_edges) {
  RewardWeights w;
  w.lambda_edges.assign(num_edges, num_edges ? 1.0 / double(num_edges) : 0.0);
  return w;
}

struct RewardBreakdown {
  std::vector<double> per_edge;
  double r_rmd_total = 0.0;
  double r_dh = 0.0;
  double r_do = 0.0;
  double r_task = 0.0;
  double r_style = 0.0;
  double r_total = 0.0;
  RewardWeights weights;
};

/*
 * Alignment of one edge with its planned dynamic:
 *   stationary  exp(-(p.v)^2)
 *   approach    0.5 exp(-|p|^2) + 0.5 exp(-(v.p_hat + v*)^2)
 *   leave       0.5 (1 - exp(-|p|^2)) + 0.5 exp(-(v.p_hat - v*)^2)
 *   free        1
 * p_hat is the zero vector once |p| < epsilon.
 */
namespace detail {

//! Convex blends of [0, 1] terms can round one ulp past the ends.
inline double unit_clamp(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace detail

inline double rmd_edge_reward(const Vec3& rel_pos, const Vec3& rel_vel, MovementDynamic dynamic,
                              double v_star, double epsilon) {
  const double dist = rel_pos.norm();
  const Vec3 dir = dist < epsilon ? Vec3::Zero() : Vec3(rel_pos / dist);
  const double proj = rel_vel.dot(dir);
  switch (dynamic) {
    case MovementDynamic::Stationary: {
      const double d = rel_pos.dot(rel_vel);
      return std::exp(-d * d);
    }
    case MovementDynamic::Approach:
      return 0.5 * std::exp(-dist * dist) + 0.5 * std::exp(-(proj + v_star) * (proj + v_star));
    case MovementDynamic::Leave:
      return 0.5 * (1.0 - std::exp(-dist * dist)) +
             0.5 * std::exp(-(proj - v_star) * (proj - v_star));
    case MovementDynamic::Free:
      return 1.0;
  }
  return 1.0;
}

//! Weighted sum of per-edge rewards; returns (total, per-edge values).
inline std::pair<double, std::vector<double>> rmd_reward(
    const std::vector<EdgeFeature>& features, const std::vector<MovementDynamic>& dynamics,
    const RewardWeights& weights) {
  if (features.size() != dynamics.size() || features.size() != weights.lambda_edges.size())
    throw std::invalid_argument("rmd_reward: features, dynamics and weights differ in length");
  if (features.empty()) throw std::invalid_argument("rmd_reward: no edges");
  std::vector<double> per_edge(features.size());
  double total = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    per_edge[i] = rmd_edge_reward(features[i].rel_position, features[i].rel_velocity, dynamics[i],
                                  weights.v_star, weights.epsilon);
    total += weights.lambda_edges[i] * per_edge[i];
  }
  return {detail::unit_clamp(total), std::move(per_edge)};
}

inline double distance_reward(const Vec3& current, const Vec3& target) {
  return std::exp(-(current - target).squaredNorm());
}

/*
 * Convex blend of the three task terms. Without an object destination the
 * object weight is redistributed over the other two in proportion.
 */
inline double task_reward(double r_rmd, double r_dh, double r_do, const RewardWeights& weights,
                          bool has_object_target = true) {
  if (has_object_target) {
    return detail::unit_clamp(weights.lambda_rmd * r_rmd + weights.lambda_h * r_dh +
                              weights.lambda_o * r_do);
  }
  const double s = weights.lambda_rmd + weights.lambda_h;
  if (s <= 0.0) return 0.5 * (r_rmd + r_dh);
  return detail::unit_clamp((weights.lambda_rmd * r_rmd + weights.lambda_h * r_dh) / s);
}

inline constexpr double kAdaptiveFloor = 0.1;

namespace detail {

inline std::vector<double> adaptive_simplex(const std::vector<double>& rewards) {
  std::vector<double> w(rewards.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    w[i] = 1.0 - rewards[i] + kAdaptiveFloor;
    sum += w[i];
  }
  for (double& x : w) x /= sum;
  return w;
}

}  // namespace detail

/*
 * Re-balances weights towards lagging terms: each weight is proportional to
 * (1 - r + 0.1) of its own term, then normalized onto the simplex. The
 * non-weight fields are copied from `base`.
 */
inline RewardWeights adaptive_weights(const std::vector<double>& per_edge, double r_rmd,
                                      double r_dh, double r_do,
                                      const RewardWeights& base = RewardWeights{}) {
  RewardWeights out = base;
  out.lambda_edges = per_edge.empty() ? std::vector<double>{} : detail::adaptive_simplex(per_edge);
  const auto terms = detail::adaptive_simplex({r_rmd, r_dh, r_do});
  out.lambda_rmd = terms[0];
  out.lambda_h = terms[1];
  out.lambda_o = terms[2];
  return out;
}

inline double total_reward(double r_task, double r_style, const RewardWeights& weights) {
  return detail::unit_clamp(weights.alpha_task * r_task + weights.alpha_style * r_style);
}

enum class WeightingMode { Uniform, Adaptive };

inline std::string_view to_token(WeightingMode m) {
  return m == WeightingMode::Uniform ? "uniform" : "adaptive";
}

//! Style term supplier; the default stands in for a motion-prior discriminator.
using StyleProvider = std::function<double(const AgentState& previous, const AgentState& next)>;

inline StyleProvider constant_style(double value = 0.0) {
  return [value](const AgentState&, const AgentState&) { return value; };
}

/*
 * Full reward stack for one frame. In adaptive mode the edge weights are
 * derived from the per-edge rewards first, then the term weights from the
 * resulting r_RMD and the two distance terms.
 */
inline RewardBreakdown evaluate_reward(const std::vector<EdgeFeature>& features,
                                       const std::vector<MovementDynamic>& dynamics,
                                       double r_dh, double r_do, bool has_object_target,
                                       WeightingMode mode, const RewardWeights& base,
                                       double r_style) {
  RewardBreakdown out;
  RewardWeights weights = base;
  weights.lambda_edges = uniform_weights(features.size()).lambda_edges;
  auto [r_rmd, per_edge] = rmd_reward(features, dynamics, weights);
  if (mode == WeightingMode::Adaptive) {
    weights = adaptive_weights(per_edge, 0.0, 0.0, 0.0, base);
    r_rmd = detail::unit_clamp(
        std::inner_product(per_edge.begin(), per_edge.end(), weights.lambda_edges.begin(), 0.0));
    const RewardWeights terms = adaptive_weights({}, r_rmd, r_dh, r_do);
    weights.lambda_rmd = terms.lambda_rmd;
    weights.lambda_h = terms.lambda_h;
    weights.lambda_o = terms.lambda_o;
  }
  out.per_edge = std::move(per_edge);
  out.r_rmd_total = r_rmd;
  out.r_dh = r_dh;
  out.r_do = r_do;
  out.r_task = task_reward(r_rmd, r_dh, r_do, weights, has_object_target);
  out.r_style = r_style;
  out.r_total = total_reward(out.r_task, r_style, weights);
  out.weights = std::move(weights);
  return out;
}

}  // namespace rmd

#endif  // RMD_REWARD_HPP_
