#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <vector>

#include "copoe/linmdp_env.hpp"

namespace copoe {

/**
 * Regularized empirical feature covariance lambda*I + sum phi phi^T.
 *
 * The inverse is maintained with rank-1 inverse updates and the log
 * determinant with the matrix determinant lemma. Every `refactor_period`
 * updates both are recomputed from a Cholesky factorization of the
 * covariance itself to stop drift.
 */
class CovarianceState {
 public:
  static constexpr int kDefaultRefactorPeriod = 256;

  CovarianceState(int dim, double lambda, int refactor_period = kDefaultRefactorPeriod);
  /// Restores a stored covariance (inverse and log det recomputed).
  static CovarianceState from_matrix(const Eigen::MatrixXd& sigma, double lambda, long update_count = 0);

  int dim() const noexcept { return static_cast<int>(sigma_.rows()); }
  double lambda() const noexcept { return lambda_; }
  const Eigen::MatrixXd& sigma() const noexcept { return sigma_; }
  const Eigen::MatrixXd& sigma_inv() const noexcept { return sigma_inv_; }
  double log_det() const noexcept { return log_det_; }
  long update_count() const noexcept { return update_count_; }
  int refactor_period() const noexcept { return refactor_period_; }

  /// phi^T Sigma^-1 phi.
  double quad_form(const Eigen::Ref<const Eigen::VectorXd>& phi) const;

  /// Sigma += phi phi^T. Returns the quadratic form before the update.
  double rank1_update(const Eigen::Ref<const Eigen::VectorXd>& phi);

  /// Recomputes inverse and log determinant densely.
  void refactorize();

  /// ln det Sigma from a fresh factorization, without touching the state.
  double dense_log_det() const;

 private:
  void check_dim(Eigen::Index n) const;

  double lambda_;
  int refactor_period_;
  Eigen::MatrixXd sigma_;
  Eigen::MatrixXd sigma_inv_;
  double log_det_;
  long update_count_ = 0;
};

CovarianceState init_covariance(int dim, double lambda,
                                int refactor_period = CovarianceState::kDefaultRefactorPeriod);

struct BonusParams {
  double beta;
  double gamma;

  BonusParams(double beta, double gamma);
  /// Bonus on unknown pairs, 3 / (1 - gamma).
  double indicator_bonus() const { return 3.0 / (1.0 - gamma); }
};

double quad_form(const CovarianceState& state, const Eigen::Ref<const Eigen::VectorXd>& phi);
void rank1_update(CovarianceState& state, const Eigen::Ref<const Eigen::VectorXd>& phi);

/// sqrt(beta) * ||phi||_{Sigma^-1} < 1, strictly.
bool is_known(const CovarianceState& state, const Eigen::Ref<const Eigen::VectorXd>& phi,
              const BonusParams& params);
/// Every action of s is a known pair.
bool is_known_state(const CovarianceState& state, const LinearMdp& mdp, StateId s,
                    const BonusParams& params);
/// 2 sqrt(beta) ||phi||_{Sigma^-1} on known states, 3/(1-gamma) on unknown
/// pairs, 0 for a known pair at an unknown state.
double bonus(const CovarianceState& state, const LinearMdp& mdp, StateId s, ActionId a,
             const BonusParams& params);

/// Doubling rule for lazy refreshes: first iteration, or log det grew by more than ln 2.
bool should_refresh(double current_log_det, double snapshot_log_det, long outer_index);

/**
 * Frozen view of the known set and bonus for one outer iteration.
 *
 * Built once per refresh and then shared read-only by solver, critic and
 * rollout workers. Per-pair tables are precomputed for the instance.
 */
class GeometrySnapshot {
 public:
  enum class BonusMode { kOptimistic, kZero };

  GeometrySnapshot(const CovarianceState& state, const LinearMdp& mdp, const BonusParams& params,
                   std::uint64_t id, BonusMode mode = BonusMode::kOptimistic);

  /// Every state known, zero bonus. Its initial policy is uniform everywhere.
  static std::shared_ptr<const GeometrySnapshot> all_known(const LinearMdp& mdp,
                                                           std::uint64_t id = 0);

  std::uint64_t id() const noexcept { return id_; }
  double beta() const noexcept { return beta_; }
  double gamma() const noexcept { return gamma_; }
  double log_det() const noexcept { return log_det_; }
  BonusMode mode() const noexcept { return mode_; }
  int num_actions() const noexcept { return num_actions_; }

  bool known_pair(StateId s, ActionId a) const { return known_pair_[idx(s, a)] != 0; }
  bool known_state(StateId s) const { return known_state_[static_cast<std::size_t>(s)] != 0; }
  /// sqrt(beta) ||phi||_{Sigma^-1} on known states, else 0.
  double bonus_phi(StateId s, ActionId a) const { return bonus_phi_[idx(s, a)]; }
  /// Full bonus b = 2 b_phi + b_indicator (0 everywhere in zero-bonus mode).
  double bonus(StateId s, ActionId a) const { return bonus_[idx(s, a)]; }
  /// Actions a with (s, a) unknown.
  std::vector<ActionId> unknown_actions(StateId s) const;

  const Eigen::MatrixXd& sigma_inv() const noexcept { return sigma_inv_; }
  const Eigen::MatrixXd& sigma() const noexcept { return sigma_; }

  double known_pair_fraction() const;
  double known_state_fraction() const;
  /// Bonus table as (S*A) vector, pair-indexed like LinearMdp.
  Eigen::VectorXd bonus_table() const;
  Eigen::VectorXd bonus_phi_table() const;

 private:
  GeometrySnapshot() = default;
  std::size_t idx(StateId s, ActionId a) const {
    return static_cast<std::size_t>(s) * static_cast<std::size_t>(num_actions_) +
           static_cast<std::size_t>(a);
  }

  std::uint64_t id_ = 0;
  double beta_ = 0.0;
  double gamma_ = 0.0;
  double log_det_ = 0.0;
  BonusMode mode_ = BonusMode::kOptimistic;
  int num_actions_ = 1;
  Eigen::MatrixXd sigma_;
  Eigen::MatrixXd sigma_inv_;
  std::vector<char> known_pair_;
  std::vector<char> known_state_;
  std::vector<double> bonus_phi_;
  std::vector<double> bonus_;
};

using SnapshotPtr = std::shared_ptr<const GeometrySnapshot>;

/// Theoretical ridge floor d * ln(n / delta) with unit constant.
double lambda_min_formula(int dim, long n, double delta);

}  // namespace copoe
