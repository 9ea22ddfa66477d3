#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "copoe/explore_geometry.hpp"
#include "copoe/linmdp_env.hpp"
#include "copoe/policy.hpp"
#include "copoe/solver.hpp"

namespace copoe {

enum class Mode { kCopoe, kPcpgStyle, kNoBonus };

std::string mode_name(Mode mode);
Mode parse_mode(const std::string& name);

struct CopoeConfig {
  long N = 1;
  SolverConfig solver;
  double lambda = 1.0;
  double beta = 1.0;
  double delta = 0.1;
  int mc_multiplier = 1;
  std::uint64_t seed = 0;
  Mode mode = Mode::kCopoe;
  /// Stop once this many environment steps were used (0 = no limit).
  long step_budget = 0;
  /// Evaluate every outer policy exactly (needs a small instance).
  bool oracle = true;

  void validate() const;
};

struct TelemetryRow {
  long n = 0;
  bool refreshed = false;
  long solver_calls = 0;
  long samples_used = 0;
  double log_det = 0.0;     // ln det Sigma^n, before this iteration's update
  double known_frac = 0.0;  // known pairs in the active snapshot
  double subopt = 0.0;      // V*(s0) - V^{pi^n}(s0), NaN without oracle
  double mean_bonus = 0.0;  // running mean of b at sampled pairs since the last refresh
};

struct RunTelemetry {
  std::vector<TelemetryRow> rows;
  /// phi_n^T Sigma_{sigma(n)}^-1 phi_n for every outer step.
  std::vector<double> snapshot_quad;
  /// ln det of Sigma_1 and Sigma_{N+1}.
  double log_det_initial = 0.0;
  double log_det_final = 0.0;
  /// ln det of the current covariance minus that of its snapshot, just before each refresh.
  std::vector<double> refresh_log_det_gap;
  std::vector<long> refresh_points;
  std::vector<Eigen::VectorXd> features;
  SolverStats solver_totals;
  long solver_calls = 0;
  long samples_used = 0;
  bool budget_exhausted = false;
  /// steps used when subopt first reached the 0.1 V* threshold, -1 if never
  long steps_to_threshold = -1;
  double v_star = 0.0;
};

struct OuterPolicy {
  std::shared_ptr<const MixturePolicy> policy;
  SnapshotPtr snapshot;
  long first_n = 0;
  long count = 0;  // outer iterations that used it
  double value = 0.0;
};

struct RunResult {
  RunTelemetry telemetry;
  std::vector<OuterPolicy> outer;  // pi^0 (uniform) followed by one entry per solver call
  CovarianceState final_covariance{1, 1.0};
  /// Uniform mixture over pi^1 .. pi^N, with counts as weights.
  MixturePolicy average_policy() const;
  /// Oracle-best outer policy (index into `outer`), and the last one.
  std::size_t best_index() const;
  std::size_t last_index() const { return outer.size() - 1; }
  double average_value = 0.0;
};

struct DriverHooks {
  /// Called after every solver call with the snapshot used and the solver output.
  std::function<void(long n, const SnapshotPtr&, const MixturePolicy& cover, const SolveResult&)>
      on_solve;
  SolverHooks solver;
};

RunResult run(const LinearMdp& mdp, const CopoeConfig& config, const DriverHooks& hooks = {});

struct PotentialReport {
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

/// sum_n phi_n^T Sigma_{sigma(n)}^-1 phi_n <= 3 (ln det Sigma_{N+1} - ln det Sigma_1).
PotentialReport potential_check(const RunTelemetry& telemetry);

/// d log2(1 + (N + 1) / (d lambda)).
double switch_bound(int dim, long N, double lambda);

/// Theoretical confidence width c (d W^2 + d G_max^2) ln(N / delta) with unit constant.
double beta_theory(int dim, double W, double G_max, long N, double delta);
/// c_beta d / (1 - gamma)^2.
double beta_practical(double c_beta, int dim, double gamma);

}  // namespace copoe
