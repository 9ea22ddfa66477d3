#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>

#include "copoe/explore_geometry.hpp"
#include "copoe/linmdp_env.hpp"
#include "copoe/policy.hpp"

namespace copoe {

struct ValueTable {
  Vector q;  // pair-indexed, s * A + a
  Vector v;  // per state
  std::string reward_tag = "original";

  double q_at(const LinearMdp& mdp, StateId s, ActionId a) const { return q(mdp.pair_index(s, a)); }
};

/// Normalized discounted state-action visitation, pair-indexed.
struct OccupancyMeasure {
  Vector dist;
  /// Marginal over states.
  Vector state_marginal(const LinearMdp& mdp) const;
};

/// Exact Q^pi and V^pi for reward r (+ extra_reward when given, pair-indexed).
ValueTable exact_q(const LinearMdp& mdp, const StochasticPolicy& policy,
                   const Vector* extra_reward = nullptr);

/// Deterministic optimal policy with lowest-index tie-breaking and its values.
/// Value iteration to `tol`, then policy-iteration polishing to the exact fixpoint.
std::pair<TablePolicy, ValueTable> optimal_policy(const LinearMdp& mdp, double tol = 1e-10);

/// d^pi from state s0.
OccupancyMeasure occupancy(const LinearMdp& mdp, const StochasticPolicy& policy, StateId s0);
/// Occupancy of an episode-level mixture: weighted average of member occupancies.
OccupancyMeasure occupancy(const LinearMdp& mdp, const MixturePolicy& policy, StateId s0);

/// V(s0) of a policy, and of an episode-level mixture.
double policy_value(const LinearMdp& mdp, const StochasticPolicy& policy);
double policy_value(const LinearMdp& mdp, const MixturePolicy& policy);

/// 0.5 * E_{(s,a)~dist} (phi^T w - target)^2.
double population_loss(const LinearMdp& mdp, const Vector& dist, const Vector& target,
                       const Eigen::VectorXd& w);

/// argmin_{||w|| <= W} of the population loss under `dist`.
Eigen::VectorXd best_fit_w(const LinearMdp& mdp, const Vector& dist, const Vector& target, double W);

/// d^comparator state marginal with uniform actions, pair-indexed.
Vector comparator_uniform_dist(const LinearMdp& mdp, const StochasticPolicy& comparator);

/**
 * Transfer error of the bonus-shifted target Q^inner(r + b) - b: fit under
 * `fit_dist` (the cover occupancy), loss evaluated under d^comparator x Unif(A).
 */
double transfer_error(const LinearMdp& mdp, const StochasticPolicy& comparator,
                      const GeometrySnapshot& snapshot, const StochasticPolicy& inner_policy,
                      const Vector& fit_dist, double W);

}  // namespace copoe
