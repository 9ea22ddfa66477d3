#include "copoe/rollout.hpp"

#include <cmath>

#include "copoe/errors.hpp"
#include "json.hpp"

namespace copoe {

GeometricDraw sample_geometric(double gamma, Rng& rng, int t_max) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ParameterError("gamma must lie in [0, 1)");
  if (t_max < 1) throw ParameterError("t_max must be positive");
  if (gamma == 0.0) return {1, false};
  std::geometric_distribution<long> geo(1.0 - gamma);
  const long tau = 1 + geo(rng);
  if (tau > t_max) return {t_max, true};
  return {static_cast<int>(tau), false};
}

int default_t_max(long N, int K, double delta, double gamma) {
  if (N < 1 || K < 1 || !(delta > 0.0 && delta < 1.0))
    throw ParameterError("default_t_max: invalid arguments");
  const double n = static_cast<double>(N);
  return static_cast<int>(std::ceil(std::log(16.0 * n * n * K / delta) / (1.0 - gamma)));
}

double indicator_bonus_magnitude(double gamma) { return 3.0 / (1.0 - gamma); }

double return_bound(double gamma) { return (2.0 + indicator_bonus_magnitude(gamma)) / (1.0 - gamma); }

long Dataset::truncations() const {
  long n = 0;
  for (const auto& r : records) n += r.truncated;
  return n;
}

namespace {

// Follows the policy for tau - 1 transitions and samples the final action.
StateAction roll_prefix(const LinearMdp& mdp, const StochasticPolicy& policy, int tau, Rng& rng,
                        long& steps) {
  StateId s = mdp.start_state();
  for (int t = 1; t < tau; ++t) {
    const ActionId a = policy.sample_action(mdp, s, rng);
    s = step(mdp, s, a, rng).next_state;
    ++steps;
  }
  return {s, policy.sample_action(mdp, s, rng)};
}

}  // namespace

FeatureSample feature_sampler(const LinearMdp& mdp, const StochasticPolicy& policy, Rng& rng,
                              int t_max) {
  const GeometricDraw tau = sample_geometric(mdp.gamma(), rng, t_max);
  FeatureSample out;
  out.tau = tau.value;
  out.truncated = tau.truncated;
  out.pair = roll_prefix(mdp, policy, tau.value, rng, out.env_steps);
  out.phi = mdp.phi(out.pair.state, out.pair.action);
  return out;
}

FeatureSample feature_sampler(const LinearMdp& mdp, const MixturePolicy& policy, Rng& rng,
                              int t_max) {
  const StochasticPolicy& member = policy.sample_member(rng);
  return feature_sampler(mdp, member, rng, t_max);
}

TrajectoryRecord rollout_from(const LinearMdp& mdp, StateAction start,
                              const StochasticPolicy& eval_policy, const GeometrySnapshot& bonus,
                              Rng& rng, int t_max, long* env_steps) {
  if (!mdp.valid_pair(start.state, start.action)) throw ParameterError("rollout: invalid start pair");
  const GeometricDraw h = sample_geometric(mdp.gamma(), rng, t_max);
  TrajectoryRecord rec;
  rec.phi1 = mdp.phi(start.state, start.action);
  rec.b1 = bonus.bonus(start.state, start.action);
  rec.path.reserve(static_cast<std::size_t>(h.value));
  rec.path.push_back(start);
  StateAction cur = start;
  long steps = 1;  // executing a_1
  for (int t = 2; t <= h.value; ++t) {
    const StateId next = step(mdp, cur.state, cur.action, rng).next_state;
    cur = {next, eval_policy.sample_action(mdp, next, rng)};
    rec.path.push_back(cur);
    ++steps;
  }
  rec.length = h.value;
  rec.truncated = h.truncated;
  const double scale = 1.0 / (1.0 - mdp.gamma());
  if (h.value >= 2)
    rec.g_return = scale * (mdp.reward(cur.state, cur.action) + bonus.bonus(cur.state, cur.action));
  else
    rec.g_return = scale * mdp.reward(start.state, start.action);
  if (env_steps) *env_steps += steps;
  return rec;
}

Dataset monte_carlo(const LinearMdp& mdp, const MixturePolicy& cover,
                    const StochasticPolicy& eval_policy, const GeometrySnapshot& bonus, int q,
                    Rng& rng, const MonteCarloOptions& options) {
  if (q < 1) throw ParameterError("monte_carlo needs q >= 1");
  if (cover.empty()) throw ParameterError("monte_carlo needs a nonempty cover");
  Dataset data;
  data.behavior_tag = options.behavior_tag;
  data.bonus_tag = bonus.id();
  data.records.reserve(static_cast<std::size_t>(q));
  const std::uint64_t collection_seed = draw_seed(rng);
  for (int i = 0; i < q; ++i) {
    Rng rec_rng = make_rng(collection_seed, "rollout", static_cast<std::uint64_t>(i));
    const StochasticPolicy& member = cover.sample_member(rec_rng);
    const GeometricDraw tau = sample_geometric(mdp.gamma(), rec_rng, options.t_max);
    data.cover_truncations += tau.truncated;
    const StateAction start = roll_prefix(mdp, member, tau.value, rec_rng, data.env_steps);
    data.records.push_back(
        rollout_from(mdp, start, eval_policy, bonus, rec_rng, options.t_max, &data.env_steps));
  }
  return data;
}

void write_dataset_jsonl(const Dataset& data, std::ostream& out) {
  for (const auto& r : data.records) {
    nlohmann::json j;
    j["phi1"] = std::vector<double>(r.phi1.data(), r.phi1.data() + r.phi1.size());
    nlohmann::json path = nlohmann::json::array();
    for (const auto& sa : r.path) path.push_back({sa.state, sa.action});
    j["path"] = std::move(path);
    j["g"] = r.g_return;
    j["b1"] = r.b1;
    j["t"] = r.length;
    j["truncated"] = r.truncated;
    out << j.dump() << '\n';
  }
}

}  // namespace copoe
