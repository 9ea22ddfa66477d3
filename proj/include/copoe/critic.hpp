#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "copoe/explore_geometry.hpp"
#include "copoe/linmdp_env.hpp"
#include "copoe/policy.hpp"
#include "copoe/rollout.hpp"

namespace copoe {

/// Ridge added to the Gram matrix of the empirical critic regression.
inline constexpr double kCriticRidge = 1e-10;

struct BallLsResult {
  Eigen::VectorXd w;
  double multiplier = 0.0;  // Lagrange ridge mu* (0 when the constraint is slack)
  bool constraint_active = false;
};

/**
 * Least squares over the ball ||w||_2 <= W given the Gram matrix G = X^T X
 * (or its population analogue) and rhs = X^T y:
 *
 *   min_w  w^T G w - 2 w^T rhs   s.t.  ||w|| <= W.
 *
 * If the ridge-regularized solution is feasible it is returned. Otherwise the
 * KKT multiplier mu with ||(G + (ridge + mu) I)^-1 rhs|| = W is found by
 * bisection to relative tolerance 1e-10; the returned point is on the
 * feasible side of the bracket. With ridge = 0 directions with numerically
 * zero curvature are dropped (minimum-norm solution).
 */
class BallConstrainedLs {
 public:
  explicit BallConstrainedLs(const Eigen::MatrixXd& gram, double ridge = kCriticRidge);
  BallLsResult solve(const Eigen::VectorXd& rhs, double W) const;
  int dim() const noexcept { return static_cast<int>(eigenvalues_.size()); }

 private:
  Eigen::VectorXd weights_for(const Eigen::VectorXd& z, double mu) const;

  Eigen::MatrixXd eigenvectors_;
  Eigen::VectorXd eigenvalues_;  // includes the ridge
  double ridge_;
  double cutoff_;
};

struct CriticFit {
  Eigen::VectorXd w_hat;
  double w_norm_cap = 0.0;
  double max_ratio = 0.0;
  double mean_sq_residual = 0.0;
  long num_records = 0;
  bool constraint_active = false;
  long ratios_above_two = 0;   // stability diagnostic
  long would_clip = 0;         // ratios above the optional cap
  std::uint64_t snapshot_id = 0;
  std::vector<double> ratios;  // per record, in dataset order
};

struct CriticOptions {
  /// Clip importance ratios at this value when > 0 (diagnostics only).
  double ratio_cap = 0.0;
  double ridge = kCriticRidge;
};

/// prod_{tau=2..t} pi(a_tau|s_tau) / pi_behavior(a_tau|s_tau).
double importance_ratio(const LinearMdp& mdp, const std::vector<StateAction>& path,
                        const StochasticPolicy& target, const StochasticPolicy& behavior);

/// Gram matrix of a dataset, factorized once and reused across refits.
class CriticDesign {
 public:
  CriticDesign(const Dataset& data, int dim, double ridge = kCriticRidge);
  const Eigen::MatrixXd& features() const noexcept { return x_; }
  const BallConstrainedLs& solver() const noexcept { return solver_; }
  std::uint64_t bonus_tag() const noexcept { return bonus_tag_; }
  std::size_t num_records() const noexcept { return static_cast<std::size_t>(x_.rows()); }

 private:
  Eigen::MatrixXd x_;
  BallConstrainedLs solver_;
  std::uint64_t bonus_tag_;
};

/// Importance-weighted constrained regression of rho_i G_i on phi_1.
CriticFit fit(const Dataset& data, const LinearMdp& mdp, const StochasticPolicy& behavior,
              const StochasticPolicy& target, double W, const CriticOptions& options = {});
CriticFit fit(const CriticDesign& design, const Dataset& data, const LinearMdp& mdp,
              const StochasticPolicy& behavior, const StochasticPolicy& target, double W,
              const CriticOptions& options = {});

/// phi^T w_hat + b_phi on known pairs at known states, the full bonus elsewhere.
double q_hat(const CriticFit& fit, const GeometrySnapshot& snapshot, const LinearMdp& mdp,
             StateId s, ActionId a);

}  // namespace copoe
