#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace copoe {

struct CheckResult {
  std::string name;
  bool pass = false;
  double metric = 0.0;  // the statistic compared against the threshold
  double threshold = 0.0;
  std::string detail;
};

// Randomized property suites. Each takes its sizes explicitly so the same
// code serves unit tests, the `check` command and the acceptance binary.

/// Relative error of det(S + phi phi^T) = det(S)(1 + phi^T S^-1 phi) against dense determinants.
CheckResult check_determinant_ratio(const std::vector<int>& dims, int updates, std::uint64_t seed);

/// max |Sigma Sigma^-1 - I| over a sequence of rank-1 updates.
CheckResult check_inverse_fidelity(int dim, int updates, int refactor_period, std::uint64_t seed);

struct RunSuiteOptions {
  int configs = 50;
  int max_dim = 16;
  long min_N = 10;
  long max_N = 5000;
  double min_lambda = 1.0;
  double max_lambda = 4.0;
  std::uint64_t seed = 0;
};

/// Driver runs on random configurations: switch bound, potential argument, and
/// determinant overshoot at refresh (one result each).
std::vector<CheckResult> check_run_invariants(const RunSuiteOptions& options);

/// Comparator regret of the solver with exact injected critics against 2 W sqrt(ln|A| K).
CheckResult check_npg_regret(int instances, const std::vector<int>& Ks, int max_actions,
                             std::uint64_t seed);

/// Closed-form policy vs sequential exponentiated updates.
CheckResult check_policy_form(int histories, std::uint64_t seed);

struct IsUnbiasedOptions {
  int pairs = 5;
  int records = 20000;
  int seeds = 20;
  std::uint64_t seed = 0;
};
/// Importance-weighted continuation returns vs Q^target(r + b) - b, in standard errors.
CheckResult check_is_unbiased(const IsUnbiasedOptions& options);

/// Fraction of importance ratios <= 2 over one run with default kappa.
CheckResult check_ratio_stability(long N, int K, std::uint64_t seed);

struct OneSidedOptions {
  int seeds = 10;
  long N = 200;
  int K = 4;
  int dim = 4;
  int states = 6;
  int actions = 2;
  double gamma = 0.5;
  double beta = 4.0;
  double lambda = 1.0;
  int mc_multiplier = 200;
  std::uint64_t seed = 0;
};
/// Two results: fraction with 0 <= Q* - Qhat <= 2 b_phi, and the one-sided failure fraction.
std::vector<CheckResult> check_one_sided(const OneSidedOptions& options);

/// Transfer error on exact instances, and on an aggregated instance against brute force.
std::vector<CheckResult> check_transfer(int instances, std::uint64_t seed);

struct SandwichOptions {
  int seeds = 10;
  long N = 600;
  int probes = 50;
  std::uint64_t seed = 0;
};
/// Probe pass rate of (1/3) M <= Sigma_hat <= (5/3) M with M the expected covariance.
CheckResult check_covariance_sandwich(const SandwichOptions& options);

}  // namespace copoe
