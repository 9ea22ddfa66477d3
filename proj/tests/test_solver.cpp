#include <cmath>

#include "copoe/checks.hpp"
#include "copoe/errors.hpp"
#include "copoe/oracle_eval.hpp"
#include "copoe/solver.hpp"
#include "doctest.h"

using namespace copoe;

TEST_CASE("collection schedule follows the reuse window") {
  CHECK(collection_schedule(10, 3) == std::vector<int>{0, 4, 8});
  CHECK(collection_schedule(5, 0) == std::vector<int>{0, 1, 2, 3, 4});
  CHECK(collection_schedule(1, 7) == std::vector<int>{0});
  for (int K = 1; K <= 40; ++K)
    for (int kappa = 0; kappa <= 6; ++kappa)
      CHECK(collection_schedule(K, kappa).size() == static_cast<std::size_t>(1 + (K - 1) / (kappa + 1)));
}

TEST_CASE("default hyperparameters") {
  const Hyperparams h = default_hyperparams(100, 2, 0.9, 10, 0.1);
  CHECK(h.B == doctest::Approx(30.0));
  CHECK(h.G_max == doctest::Approx(320.0));
  CHECK(h.W == doctest::Approx(640.0));
  CHECK(h.eta == doctest::Approx(1.3009e-4).epsilon(1e-4));
  CHECK(h.eta == doctest::Approx(std::sqrt(std::log(2.0)) / (10.0 * 640.0)));
  CHECK(h.warning.empty());
  const Hyperparams z = default_hyperparams(16, 2, 0.0, 10, 0.1);
  CHECK(z.B == doctest::Approx(3.0));
  CHECK(z.G_max == doctest::Approx(5.0));
  CHECK(z.W == doctest::Approx(10.0));
  CHECK(!default_hyperparams(1, 8, 0.5, 10, 0.1).warning.empty());
}

TEST_CASE("reuse window rule floors at one") {
  const Hyperparams h = default_hyperparams(100, 2, 0.9, 10, 0.1);
  CHECK(h.kappa == 1);
  const double eta = 1e-9;
  const int k = kappa_rule(0.5, 10, 4, 0.1, eta, 6.0, 20.0);
  const int expected = static_cast<int>(std::floor(0.5 * std::log(2.0) / (2.0 * std::log(8.0 * 100 * 4 / 0.1) * eta * 26.0)));
  CHECK(k == expected);
  CHECK(k > 1);
}

TEST_CASE("solver config validation") {
  SolverConfig c;
  c.eta = 0.1;
  CHECK_NOTHROW(c.validate());
  c.K = 0;
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c.K = 2;
  c.W = 0.0;
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c.W = 1.0;
  c.kappa = -1;
  CHECK_THROWS_AS(c.validate(), ParameterError);
}

TEST_CASE("npg update needs a fit from the same snapshot") {
  const LinearMdp m = make_random_linear_mdp(3, 2, 2, 0.5, 1);
  const LogLinearPolicy pi = init_policy(GeometrySnapshot::all_known(m, 1), 0.5, m);
  CriticFit f;
  f.w_hat = Eigen::VectorXd::Ones(2);
  f.snapshot_id = 2;
  CHECK_THROWS_AS(npg_update(pi, f, m), ConsistencyError);
  f.snapshot_id = 1;
  CHECK(npg_update(pi, f, m).num_updates() == 1);
}

TEST_CASE("solver collects on schedule and returns K iterates") {
  const LinearMdp m = make_random_linear_mdp(5, 2, 3, 0.7, 3);
  const auto snap = GeometrySnapshot::all_known(m, 0);
  MixturePolicy cover;
  cover.add(std::make_shared<TablePolicy>(TablePolicy::uniform(5, 2)));
  SolverConfig cfg;
  cfg.K = 7;
  cfg.kappa = 2;
  cfg.eta = 0.2;
  cfg.W = 20.0;
  cfg.mc_count = 50;
  std::vector<int> collected;
  SolverHooks hooks;
  hooks.observer = [&](const InnerStep& s) {
    if (s.collected) collected.push_back(s.k);
  };
  Rng rng(1);
  const SolveResult r = solve(m, cover, snap, cfg, rng, hooks);
  CHECK(r.iterates.size() == 7);
  CHECK(r.mixture.size() == 7);
  CHECK(collected == collection_schedule(7, 2));
  CHECK(r.stats.collections == 3);
  CHECK(r.stats.env_steps > 0);
}

TEST_CASE("solver is deterministic given the generator state") {
  const LinearMdp m = make_random_linear_mdp(4, 3, 3, 0.6, 5);
  const auto snap = GeometrySnapshot::all_known(m, 0);
  MixturePolicy cover;
  cover.add(std::make_shared<TablePolicy>(TablePolicy::uniform(4, 3)));
  SolverConfig cfg;
  cfg.K = 4;
  cfg.eta = 0.3;
  cfg.W = 10.0;
  cfg.mc_count = 20;
  Rng a(9), b(9);
  const SolveResult r1 = solve(m, cover, snap, cfg, a);
  const SolveResult r2 = solve(m, cover, snap, cfg, b);
  CHECK(r1.iterates.back()->weight_sum() == r2.iterates.back()->weight_sum());
}

TEST_CASE("with exact critics the last iterate approaches the optimum") {
  const LinearMdp m = make_random_linear_mdp(5, 3, 4, 0.6, 8);
  const auto snap = GeometrySnapshot::all_known(m, 0);
  const TablePolicy uniform = TablePolicy::uniform(5, 3);
  MixturePolicy cover;
  cover.add(std::make_shared<TablePolicy>(uniform));
  const Vector dist = occupancy(m, uniform, m.start_state()).dist;
  SolverConfig cfg;
  cfg.K = 200;
  cfg.eta = 1.0;
  cfg.W = 1e3;
  SolverHooks hooks;
  hooks.critic = [&](int, const LogLinearPolicy& pi) { return best_fit_w(m, dist, exact_q(m, pi).q, cfg.W); };
  Rng rng(0);
  const SolveResult r = solve(m, cover, snap, cfg, rng, hooks);
  const double v_star = optimal_policy(m).second.v(m.start_state());
  CHECK(v_star - policy_value(m, *r.iterates.back()) <= 1e-3 * v_star);
  CHECK(policy_value(m, *r.iterates.back()) > policy_value(m, uniform));
}

TEST_CASE("npg regret stays below 2 W sqrt(ln A K)") {
  const CheckResult r = check_npg_regret(4, {64}, 4, 2);
  CHECK(r.pass);
}

TEST_CASE("importance ratios stay near one with the default window") {
  const CheckResult r = check_ratio_stability(20, 8, 1);
  CHECK(r.pass);
  CHECK(r.metric >= 0.99);
}
