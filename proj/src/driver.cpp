#include "copoe/driver.hpp"

#include <cmath>
#include <limits>

#include "copoe/errors.hpp"
#include "copoe/oracle_eval.hpp"
#include "copoe/rollout.hpp"

namespace copoe {

std::string mode_name(Mode mode) {
  switch (mode) {
    case Mode::kCopoe: return "copoe";
    case Mode::kPcpgStyle: return "pcpg_style";
    case Mode::kNoBonus: return "no_bonus";
  }
  return "copoe";
}

Mode parse_mode(const std::string& name) {
  if (name == "copoe") return Mode::kCopoe;
  if (name == "pcpg_style") return Mode::kPcpgStyle;
  if (name == "no_bonus") return Mode::kNoBonus;
  throw ParameterError("unknown mode '" + name + "'");
}

void CopoeConfig::validate() const {
  if (N < 0) throw ParameterError("N must be nonnegative");
  solver.validate();
  if (!(lambda > 0.0)) throw ParameterError("lambda must be positive");
  if (!(beta > 0.0)) throw ParameterError("beta must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("delta must lie in (0, 1)");
  if (mc_multiplier < 1) throw ParameterError("mc_multiplier must be at least 1");
  if (step_budget < 0) throw ParameterError("step_budget must be nonnegative");
}

double switch_bound(int dim, long N, double lambda) {
  return dim * std::log2(1.0 + (static_cast<double>(N) + 1.0) / (dim * lambda));
}

double beta_theory(int dim, double W, double G_max, long N, double delta) {
  return dim * (W * W + G_max * G_max) * std::log(static_cast<double>(std::max(N, 2L)) / delta);
}

double beta_practical(double c_beta, int dim, double gamma) {
  return c_beta * dim / ((1.0 - gamma) * (1.0 - gamma));
}

MixturePolicy RunResult::average_policy() const {
  MixturePolicy avg;
  for (std::size_t i = 1; i < outer.size(); ++i)
    if (outer[i].count > 0) avg.add_mixture(*outer[i].policy, static_cast<double>(outer[i].count));
  if (avg.empty()) avg.add_mixture(*outer[0].policy, 1.0);
  return avg;
}

std::size_t RunResult::best_index() const {
  std::size_t best = outer.size() - 1;
  for (std::size_t i = 1; i < outer.size(); ++i)
    if (outer[i].value > outer[best].value) best = i;
  return best;
}

RunResult run(const LinearMdp& mdp, const CopoeConfig& config, const DriverHooks& hooks) {
  config.validate();
  const int d = mdp.feature_dim();
  const BonusParams params(config.beta, mdp.gamma());
  const auto bonus_mode = config.mode == Mode::kNoBonus ? GeometrySnapshot::BonusMode::kZero
                                                        : GeometrySnapshot::BonusMode::kOptimistic;
  SolverConfig solver_config = config.solver;
  if (config.mode == Mode::kPcpgStyle) solver_config.kappa = 0;

  RunResult result;
  RunTelemetry& tel = result.telemetry;
  CovarianceState sigma = init_covariance(d, config.lambda);
  tel.log_det_initial = sigma.log_det();

  double v_star = std::numeric_limits<double>::quiet_NaN();
  if (config.oracle) v_star = optimal_policy(mdp).second.v(mdp.start_state());
  tel.v_star = v_star;

  {
    auto pi0 = std::make_shared<MixturePolicy>();
    pi0->add(std::make_shared<TablePolicy>(TablePolicy::uniform(mdp.num_states(), mdp.num_actions())));
    OuterPolicy entry{pi0, GeometrySnapshot::all_known(mdp, 0), 0, 1, 0.0};
    if (config.oracle) entry.value = policy_value(mdp, *pi0);
    result.outer.push_back(std::move(entry));
  }

  std::size_t active = 0;  // index of pi^{n_lo} in result.outer
  double snapshot_log_det = sigma.log_det();
  double bonus_sum = 0.0;
  long bonus_count = 0;

  for (long n = 1; n <= config.N; ++n) {
    if (config.step_budget > 0 && tel.samples_used >= config.step_budget) {
      tel.budget_exhausted = true;
      break;
    }
    TelemetryRow row;
    row.n = n;
    row.log_det = sigma.log_det();
    const bool refresh = config.mode == Mode::kPcpgStyle ||
                         should_refresh(sigma.log_det(), snapshot_log_det, n);
    if (refresh) {
      if (n > 1) tel.refresh_log_det_gap.push_back(sigma.log_det() - snapshot_log_det);
      tel.refresh_points.push_back(n);
      auto snapshot = std::make_shared<const GeometrySnapshot>(
          sigma, mdp, params, static_cast<std::uint64_t>(n), bonus_mode);
      MixturePolicy cover;
      for (const auto& o : result.outer) cover.add_mixture(*o.policy, static_cast<double>(o.count));
      solver_config.mc_count = static_cast<int>(n * config.mc_multiplier);
      Rng solver_rng = make_rng(config.seed, "solve", static_cast<std::uint64_t>(n));
      SolveResult solved = solve(mdp, cover, snapshot, solver_config, solver_rng, hooks.solver);
      ++tel.solver_calls;
      tel.samples_used += solved.stats.env_steps;
      auto& totals = tel.solver_totals;
      totals.collections += solved.stats.collections;
      totals.env_steps += solved.stats.env_steps;
      totals.ratios_total += solved.stats.ratios_total;
      totals.ratios_above_two += solved.stats.ratios_above_two;
      totals.max_ratio = std::max(totals.max_ratio, solved.stats.max_ratio);
      totals.would_clip += solved.stats.would_clip;
      totals.truncations += solved.stats.truncations;
      totals.constraint_active += solved.stats.constraint_active;
      if (hooks.on_solve) hooks.on_solve(n, snapshot, cover, solved);

      auto policy = std::make_shared<MixturePolicy>(std::move(solved.mixture));
      OuterPolicy entry{policy, snapshot, n, 0, 0.0};
      if (config.oracle) entry.value = policy_value(mdp, *policy);
      result.outer.push_back(std::move(entry));
      active = result.outer.size() - 1;
      snapshot_log_det = sigma.log_det();
      bonus_sum = 0.0;
      bonus_count = 0;
    }
    OuterPolicy& current = result.outer[active];
    ++current.count;
    const GeometrySnapshot& snap = *current.snapshot;

    Rng sample_rng = make_rng(config.seed, "feature", static_cast<std::uint64_t>(n));
    const FeatureSample sample = feature_sampler(mdp, *current.policy, sample_rng, solver_config.t_max);
    tel.samples_used += sample.env_steps;
    tel.features.push_back(sample.phi);
    tel.snapshot_quad.push_back(sample.phi.dot(snap.sigma_inv() * sample.phi));
    bonus_sum += snap.bonus(sample.pair.state, sample.pair.action);
    ++bonus_count;
    sigma.rank1_update(sample.phi);

    row.refreshed = refresh;
    row.solver_calls = tel.solver_calls;
    row.samples_used = tel.samples_used;
    row.known_frac = snap.known_pair_fraction();
    row.subopt = config.oracle ? v_star - current.value : std::numeric_limits<double>::quiet_NaN();
    row.mean_bonus = bonus_sum / static_cast<double>(bonus_count);
    if (config.oracle && tel.steps_to_threshold < 0 && row.subopt <= 0.1 * v_star)
      tel.steps_to_threshold = tel.samples_used;
    tel.rows.push_back(row);
  }
  tel.log_det_final = sigma.log_det();
  result.final_covariance = sigma;
  if (config.oracle) result.average_value = policy_value(mdp, result.average_policy());
  return result;
}

PotentialReport potential_check(const RunTelemetry& telemetry) {
  if (telemetry.snapshot_quad.size() != telemetry.rows.size())
    throw IncompleteReportError("potential check needs one quadratic form per outer step");
  PotentialReport r;
  for (double q : telemetry.snapshot_quad) r.lhs += q;
  r.rhs = 3.0 * (telemetry.log_det_final - telemetry.log_det_initial);
  r.pass = r.lhs <= r.rhs + 1e-12 * std::max(1.0, std::abs(r.rhs));
  return r;
}

}  // namespace copoe
