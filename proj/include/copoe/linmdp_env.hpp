#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "copoe/rng.hpp"

namespace copoe {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

using StateId = int;
using ActionId = int;

struct StateAction {
  StateId state = 0;
  ActionId action = 0;
  friend bool operator==(const StateAction&, const StateAction&) = default;
};

/**
 * Finite discounted MDP with a d-dimensional feature map.
 *
 * Tables are indexed by the flat pair index `s * num_actions + a`:
 *   features    (S*A) x d
 *   reward      (S*A)
 *   transitions (S*A) x S
 *   mu          S x d      (only for exactly linear instances, p = phi^T mu)
 *
 * Immutable after construction; safe to share between rollout workers.
 */
class LinearMdp {
 public:
  LinearMdp(int num_states, int num_actions, double gamma, RowMatrix features, Vector reward,
            RowMatrix transitions, std::optional<RowMatrix> mu, StateId start_state,
            std::string label, std::uint64_t seed = 0);

  int num_states() const noexcept { return num_states_; }
  int num_actions() const noexcept { return num_actions_; }
  int num_pairs() const noexcept { return num_states_ * num_actions_; }
  int feature_dim() const noexcept { return static_cast<int>(features_.cols()); }
  double gamma() const noexcept { return gamma_; }
  StateId start_state() const noexcept { return start_state_; }
  const std::string& label() const noexcept { return label_; }
  std::uint64_t seed() const noexcept { return seed_; }

  int pair_index(StateId s, ActionId a) const noexcept { return s * num_actions_ + a; }
  bool valid_state(StateId s) const noexcept { return s >= 0 && s < num_states_; }
  bool valid_pair(StateId s, ActionId a) const noexcept {
    return valid_state(s) && a >= 0 && a < num_actions_;
  }

  Eigen::Map<const Vector> phi(StateId s, ActionId a) const {
    return Eigen::Map<const Vector>(features_.row(pair_index(s, a)).data(), feature_dim());
  }
  double reward(StateId s, ActionId a) const { return reward_(pair_index(s, a)); }
  double transition(StateId s, ActionId a, StateId next) const {
    return transitions_(pair_index(s, a), next);
  }

  const RowMatrix& features() const noexcept { return features_; }
  const Vector& rewards() const noexcept { return reward_; }
  const RowMatrix& transitions() const noexcept { return transitions_; }
  const std::optional<RowMatrix>& mu() const noexcept { return mu_; }

  /// Draws the successor of (s, a) from a uniform variate in [0, 1).
  StateId sample_next(StateId s, ActionId a, double u) const;

  /// Same instance with a different discount factor.
  LinearMdp with_gamma(double gamma) const;

 private:
  int num_states_;
  int num_actions_;
  double gamma_;
  RowMatrix features_;
  Vector reward_;
  RowMatrix transitions_;
  std::optional<RowMatrix> mu_;
  StateId start_state_;
  std::string label_;
  std::uint64_t seed_;
  RowMatrix cdf_;
};

struct StepResult {
  StateId next_state;
  double reward;
};

/// Simulates one transition. Throws ParameterError for invalid indices.
StepResult step(const LinearMdp& mdp, StateId s, ActionId a, Rng& rng);

/// Exactly linear instance from the anchor construction: d anchor
/// distributions over states, simplex features, p(.|s,a) = sum_j phi_j nu_j.
/// Rewards are r = phi^T theta with theta uniform in [0,1]^d.
LinearMdp make_random_linear_mdp(int num_states, int num_actions, int dim, double gamma,
                                 std::uint64_t seed);

/// Chain of `horizon_len` states plus an absorbing zero-reward sink. One
/// action per chain state advances, every other action falls into the sink.
/// The last chain state pays reward 1 for any action and then moves to the
/// sink, so V*(start) = gamma^(horizon_len - 1). Features are one-hot over
/// (state, action).
LinearMdp make_comb_lock(int horizon_len, double gamma, std::uint64_t seed, int num_actions = 2);

/// Replaces the features of `base` by one-hot vectors over (cluster, action).
/// `num_clusters` defaults to 1 + max(cluster_map).
LinearMdp make_aggregated_mdp(const LinearMdp& base, const std::vector<int>& cluster_map,
                              std::optional<int> num_clusters = std::nullopt);

/// Advancing action at each chain state of a lock built by make_comb_lock.
std::vector<ActionId> comb_lock_solution(int horizon_len, std::uint64_t seed, int num_actions = 2);

struct ValidationReport {
  double max_row_sum_deviation = 0.0;
  double max_negative_mass = 0.0;
  std::optional<double> max_factor_residual;  // |p - phi^T mu|, when mu is present
  double closure_residual = 0.0;  // worst population LS residual over one-hot f
  double reward_residual = 0.0;   // LS residual of r on phi (informational)
  double max_feature_norm = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

ValidationReport validate_linear(const LinearMdp& mdp, double tolerance);

// JSON environment files.
std::string mdp_to_json(const LinearMdp& mdp);
LinearMdp mdp_from_json(const std::string& text);
void write_mdp(const LinearMdp& mdp, const std::filesystem::path& path);
LinearMdp read_mdp(const std::filesystem::path& path);

}  // namespace copoe
