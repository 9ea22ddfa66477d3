#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "copoe/explore_geometry.hpp"
#include "copoe/linmdp_env.hpp"
#include "copoe/rng.hpp"

namespace copoe {

/// Markov policy: a distribution over actions at every state.
class StochasticPolicy {
 public:
  virtual ~StochasticPolicy() = default;
  /// Writes pi(.|s) into `out` (size num_actions).
  virtual void action_probs(const LinearMdp& mdp, StateId s, std::span<double> out) const = 0;

  Eigen::VectorXd action_probs(const LinearMdp& mdp, StateId s) const;
  ActionId sample_action(const LinearMdp& mdp, StateId s, Rng& rng) const;
  /// S x A probability table.
  RowMatrix to_table(const LinearMdp& mdp) const;
};

/// Explicit S x A probability table.
class TablePolicy final : public StochasticPolicy {
 public:
  explicit TablePolicy(RowMatrix probs);
  static TablePolicy uniform(int num_states, int num_actions);
  static TablePolicy deterministic(const std::vector<ActionId>& actions, int num_actions);

  using StochasticPolicy::action_probs;
  void action_probs(const LinearMdp& mdp, StateId s, std::span<double> out) const override;
  const RowMatrix& table() const noexcept { return probs_; }

 private:
  RowMatrix probs_;
};

/**
 * Exponentiated-weights policy over a frozen known set.
 *
 * At a known state s the policy is the softmax of
 *   c(s, a) = eta * sum_i [ phi(s,a)^T w_i + b_phi(s,a) ]
 * over the accumulated critic weights w_i, i.e. the product of the
 * multiplicative updates pi <- pi * exp(eta * Qhat_i) started from uniform.
 * Only the running weight sum and the count are needed to evaluate it. At an
 * unknown state it is uniform over the unknown actions.
 *
 * A probability table is cached when the instance is small enough.
 */
class LogLinearPolicy final : public StochasticPolicy {
 public:
  LogLinearPolicy(SnapshotPtr snapshot, double eta, int dim);

  using StochasticPolicy::action_probs;
  void action_probs(const LinearMdp& mdp, StateId s, std::span<double> out) const override;

  /// Closed-form probabilities from the weight sum, ignoring any cache.
  void closed_form_probs(const LinearMdp& mdp, StateId s, std::span<double> out) const;

  /// Copy with w appended to the history.
  LogLinearPolicy appended(const Eigen::VectorXd& w) const;

  /// Fills the probability cache (no-op for large instances).
  void materialize(const LinearMdp& mdp);

  const SnapshotPtr& snapshot() const noexcept { return snapshot_; }
  double eta() const noexcept { return eta_; }
  const std::vector<Eigen::VectorXd>& weight_history() const noexcept { return history_; }
  const Eigen::VectorXd& weight_sum() const noexcept { return weight_sum_; }
  std::size_t num_updates() const noexcept { return history_.size(); }

 private:
  SnapshotPtr snapshot_;
  double eta_;
  std::vector<Eigen::VectorXd> history_;
  Eigen::VectorXd weight_sum_;
  std::shared_ptr<const RowMatrix> cache_;
};

using PolicyPtr = std::shared_ptr<const StochasticPolicy>;

/// Uniform-over-unknown-actions at unknown states, uniform elsewhere.
LogLinearPolicy init_policy(SnapshotPtr snapshot, double eta, const LinearMdp& mdp);

/// Episode-level mixture: draw a member by weight, follow it for the episode.
class MixturePolicy {
 public:
  MixturePolicy() = default;

  void add(PolicyPtr member, double weight = 1.0);
  /// Adds every member of `other`, scaled so they jointly carry `total_weight`.
  void add_mixture(const MixturePolicy& other, double total_weight);

  bool empty() const noexcept { return members_.empty(); }
  std::size_t size() const noexcept { return members_.size(); }
  const std::vector<PolicyPtr>& members() const noexcept { return members_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  double total_weight() const noexcept { return cumulative_.empty() ? 0.0 : cumulative_.back(); }

  std::size_t sample_index(Rng& rng) const;
  const StochasticPolicy& sample_member(Rng& rng) const;

 private:
  std::vector<PolicyPtr> members_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
};

/// Samples an action index from a probability vector.
ActionId sample_from(std::span<const double> probs, Rng& rng);

}  // namespace copoe
