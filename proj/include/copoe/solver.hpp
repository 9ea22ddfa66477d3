#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "copoe/critic.hpp"
#include "copoe/explore_geometry.hpp"
#include "copoe/linmdp_env.hpp"
#include "copoe/policy.hpp"
#include "copoe/rng.hpp"

namespace copoe {

struct SolverConfig {
  int K = 1;
  double eta = 0.0;
  /// Data reuse window. 0 collects fresh data at every inner step.
  int kappa = 1;
  double W = 1.0;
  /// Monte Carlo records per collection.
  int mc_count = 1;
  int t_max = 1000;
  CriticOptions critic;

  void validate() const;
};

struct Hyperparams {
  double eta;
  int kappa;
  double W;
  double B;
  double G_max;
  std::string warning;  // nonempty when K < 4 ln|A|
};

/// eta = sqrt(ln|A|) / (sqrt(K) W), W = 2 G_max, and the reuse window
/// kappa = max(1, floor((1-gamma) ln 2 / (2 ln(8 N^2 K / delta) eta (B + W)))).
Hyperparams default_hyperparams(int K, int num_actions, double gamma, long N, double delta);

/// The learning-rate rule alone, for a given W.
double eta_rule(int K, int num_actions, double W);
/// The reuse-window rule alone, floored at 1.
int kappa_rule(double gamma, long N, int K, double delta, double eta, double B, double W);


/// Appends w_hat to the policy history. The fit must come from the same snapshot.
LogLinearPolicy npg_update(const LogLinearPolicy& policy, const CriticFit& fit, const LinearMdp& mdp);

struct InnerStep {
  int k = 0;
  bool collected = false;
  const LogLinearPolicy* policy = nullptr;    // pi_k
  const LogLinearPolicy* behavior = nullptr;  // pi_{k_lo}
  const CriticFit* fit = nullptr;
  const Dataset* data = nullptr;              // null with an injected critic
};

struct SolverHooks {
  /// Replaces the Monte Carlo critic: returns w_hat for pi_k.
  std::function<Eigen::VectorXd(int k, const LogLinearPolicy& pi_k)> critic;
  std::function<void(const InnerStep&)> observer;
};

struct SolverStats {
  int collections = 0;
  long env_steps = 0;
  long ratios_total = 0;
  long ratios_above_two = 0;
  double max_ratio = 0.0;
  long would_clip = 0;
  long truncations = 0;
  int constraint_active = 0;
};

struct SolveResult {
  MixturePolicy mixture;  // uniform over pi_0 .. pi_{K-1}
  std::vector<std::shared_ptr<const LogLinearPolicy>> iterates;
  SolverStats stats;
};

SolveResult solve(const LinearMdp& mdp, const MixturePolicy& cover, const SnapshotPtr& snapshot,
                  const SolverConfig& config, Rng& rng, const SolverHooks& hooks = {});

/// Collection indices the refresh rule produces: k = 0 or k - k_lo > kappa.
std::vector<int> collection_schedule(int K, int kappa);

}  // namespace copoe
