#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "copoe/explore_geometry.hpp"
#include "copoe/linmdp_env.hpp"
#include "copoe/policy.hpp"
#include "copoe/rng.hpp"

namespace copoe {

struct GeometricDraw {
  int value = 1;
  bool truncated = false;
};

/// tau >= 1 with P(tau) = gamma^(tau-1) (1 - gamma), clamped to t_max.
GeometricDraw sample_geometric(double gamma, Rng& rng, int t_max);

/// ceil(ln(16 N^2 K / delta) / (1 - gamma)).
int default_t_max(long N, int K, double delta, double gamma);

/// B = 3 / (1 - gamma) and G_max = (2 + B) / (1 - gamma).
double indicator_bonus_magnitude(double gamma);
double return_bound(double gamma);

struct TrajectoryRecord {
  Eigen::VectorXd phi1;          // feature of the initial pair
  std::vector<StateAction> path;  // (s_1, a_1) ... (s_t, a_t)
  double g_return = 0.0;
  double b1 = 0.0;                // bonus of the initial pair
  int length = 0;
  bool truncated = false;         // continuation length hit t_max
};

struct Dataset {
  std::vector<TrajectoryRecord> records;
  std::string behavior_tag;
  std::uint64_t bonus_tag = 0;
  long env_steps = 0;
  long cover_truncations = 0;  // prefix length (tau) hit t_max
  long truncations() const;
};

struct FeatureSample {
  Eigen::VectorXd phi;
  StateAction pair;
  int tau = 1;
  bool truncated = false;
  long env_steps = 0;
};

/// Rolls `policy` for tau-1 steps from the start state and samples a ~ pi(.|s).
FeatureSample feature_sampler(const LinearMdp& mdp, const StochasticPolicy& policy, Rng& rng,
                              int t_max);
/// Same with the policy drawn once from an episode-level mixture.
FeatureSample feature_sampler(const LinearMdp& mdp, const MixturePolicy& policy, Rng& rng,
                              int t_max);

/// Continuation from a fixed (s, a) under `eval_policy` with geometric length h:
/// G = (r + b)(s_h, a_h) / (1 - gamma) if h >= 2, r(s_1, a_1) / (1 - gamma) if h = 1.
TrajectoryRecord rollout_from(const LinearMdp& mdp, StateAction start,
                              const StochasticPolicy& eval_policy, const GeometrySnapshot& bonus,
                              Rng& rng, int t_max, long* env_steps = nullptr);

struct MonteCarloOptions {
  int t_max = 1000;
  std::string behavior_tag;
};

/// q bonus-augmented return records with initial pairs drawn from the cover.
/// Record i uses its own substream, so the output does not depend on the
/// order in which records are generated.
Dataset monte_carlo(const LinearMdp& mdp, const MixturePolicy& cover,
                    const StochasticPolicy& eval_policy, const GeometrySnapshot& bonus, int q,
                    Rng& rng, const MonteCarloOptions& options);

/// JSON lines debug dump: phi1, path, g, b1, t, truncated.
void write_dataset_jsonl(const Dataset& data, std::ostream& out);

}  // namespace copoe
