#include "copoe/solver.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "copoe/errors.hpp"
#include "copoe/rollout.hpp"

namespace copoe {

void SolverConfig::validate() const {
  if (K < 1) throw ParameterError("K must be at least 1");
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ParameterError("eta must be finite and nonnegative");
  if (kappa < 0) throw ParameterError("kappa must be nonnegative");
  if (!(W > 0.0)) throw ParameterError("W must be positive");
  if (mc_count < 1) throw ParameterError("mc_count must be at least 1");
  if (t_max < 1) throw ParameterError("t_max must be at least 1");
}

double eta_rule(int K, int num_actions, double W) {
  return std::sqrt(std::log(static_cast<double>(num_actions))) / (std::sqrt(static_cast<double>(K)) * W);
}

int kappa_rule(double gamma, long N, int K, double delta, double eta, double B, double W) {
  const double n = static_cast<double>(N);
  const double denom = 2.0 * std::log(8.0 * n * n * K / delta) * eta * (B + W);
  const double raw = denom > 0.0 ? (1.0 - gamma) * std::log(2.0) / denom : 1e18;
  return static_cast<int>(std::clamp(std::floor(raw), 1.0, 1e9));
}

Hyperparams default_hyperparams(int K, int num_actions, double gamma, long N, double delta) {
  if (K < 1 || num_actions < 1 || N < 1) throw ParameterError("default_hyperparams: invalid sizes");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ParameterError("gamma must lie in [0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("delta must lie in (0, 1)");
  Hyperparams h{};
  h.B = indicator_bonus_magnitude(gamma);
  h.G_max = return_bound(gamma);
  h.W = 2.0 * h.G_max;
  h.eta = eta_rule(K, num_actions, h.W);
  h.kappa = kappa_rule(gamma, N, K, delta, h.eta, h.B, h.W);
  if (K < 4.0 * std::log(static_cast<double>(num_actions)))
    h.warning = "K < 4 ln|A|: the learning-rate rule's precondition does not hold";
  return h;
}

LogLinearPolicy npg_update(const LogLinearPolicy& policy, const CriticFit& fit, const LinearMdp& mdp) {
  if (fit.snapshot_id != policy.snapshot()->id())
    throw ConsistencyError("critic fit was built on a different geometry snapshot");
  LogLinearPolicy next = policy.appended(fit.w_hat);
  next.materialize(mdp);
  return next;
}

std::vector<int> collection_schedule(int K, int kappa) {
  std::vector<int> out;
  int k_lo = 0;
  for (int k = 0; k < K; ++k)
    if (k == 0 || k - k_lo > kappa) {
      out.push_back(k);
      k_lo = k;
    }
  return out;
}

SolveResult solve(const LinearMdp& mdp, const MixturePolicy& cover, const SnapshotPtr& snapshot,
                  const SolverConfig& config, Rng& rng, const SolverHooks& hooks) {
  config.validate();
  if (!snapshot) throw ParameterError("solve needs a geometry snapshot");
  SolveResult out;
  const std::uint64_t solver_seed = draw_seed(rng);
  auto pi = std::make_shared<const LogLinearPolicy>(init_policy(snapshot, config.eta, mdp));
  std::shared_ptr<const LogLinearPolicy> behavior;
  std::optional<Dataset> data;
  std::optional<CriticDesign> design;
  int k_lo = 0;

  for (int k = 0; k < config.K; ++k) {
    out.iterates.push_back(pi);
    out.mixture.add(pi, 1.0);
    CriticFit fit;
    bool collected = false;
    if (hooks.critic) {
      fit.w_hat = hooks.critic(k, *pi);
      fit.snapshot_id = snapshot->id();
      fit.w_norm_cap = config.W;
    } else {
      if (k == 0 || k - k_lo > config.kappa) {
        k_lo = k;
        behavior = pi;
        Rng collect_rng = make_rng(solver_seed, "solver", static_cast<std::uint64_t>(k));
        MonteCarloOptions mc{config.t_max, "pi_" + std::to_string(k)};
        data = monte_carlo(mdp, cover, *behavior, *snapshot, config.mc_count, collect_rng, mc);
        design.emplace(*data, mdp.feature_dim(), config.critic.ridge);
        collected = true;
        ++out.stats.collections;
        out.stats.env_steps += data->env_steps;
        out.stats.truncations += data->truncations() + data->cover_truncations;
      }
      fit = copoe::fit(*design, *data, mdp, *behavior, *pi, config.W, config.critic);
      out.stats.ratios_total += static_cast<long>(fit.ratios.size());
      out.stats.ratios_above_two += fit.ratios_above_two;
      out.stats.max_ratio = std::max(out.stats.max_ratio, fit.max_ratio);
      out.stats.would_clip += fit.would_clip;
      out.stats.constraint_active += fit.constraint_active;
    }
    if (hooks.observer) {
      InnerStep step;
      step.k = k;
      step.collected = collected;
      step.policy = pi.get();
      step.behavior = behavior ? behavior.get() : pi.get();
      step.fit = &fit;
      step.data = data ? &*data : nullptr;
      hooks.observer(step);
    }
    if (k + 1 < config.K) pi = std::make_shared<const LogLinearPolicy>(npg_update(*pi, fit, mdp));
  }
  return out;
}

}  // namespace copoe
