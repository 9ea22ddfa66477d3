#include "copoe/checks.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "copoe/critic.hpp"
#include "copoe/driver.hpp"
#include "copoe/explore_geometry.hpp"
#include "copoe/linmdp_env.hpp"
#include "copoe/oracle_eval.hpp"
#include "copoe/policy.hpp"
#include "copoe/rng.hpp"
#include "copoe/rollout.hpp"
#include "copoe/solver.hpp"

namespace copoe {

namespace {

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
double uniform_real(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Eigen::VectorXd random_feature(int d, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v(i) = g(rng);
  const double n = v.norm();
  if (n == 0.0) return v;
  return v * (uniform_real(rng, 0.05, 1.0) / n);
}

// Covariance built from `updates` features of uniformly random pairs.
CovarianceState random_covariance(const LinearMdp& mdp, double lambda, int updates, Rng& rng) {
  CovarianceState st = init_covariance(mdp.feature_dim(), lambda);
  for (int i = 0; i < updates; ++i) {
    const int s = uniform_int(rng, 0, mdp.num_states() - 1);
    const int a = uniform_int(rng, 0, mdp.num_actions() - 1);
    st.rank1_update(mdp.phi(s, a));
  }
  return st;
}

// A snapshot with at least one known state (when reachable within a few tries).
SnapshotPtr random_snapshot(const LinearMdp& mdp, double beta, Rng& rng, std::uint64_t id) {
  const BonusParams params(beta, mdp.gamma());
  SnapshotPtr snap;
  int updates = uniform_int(rng, 5, 40);
  for (int attempt = 0; attempt < 8; ++attempt, updates *= 2) {
    CovarianceState st = random_covariance(mdp, 1.0, updates, rng);
    snap = std::make_shared<const GeometrySnapshot>(st, mdp, params, id);
    if (snap->known_state_fraction() > 0.0) break;
  }
  return snap;
}

LogLinearPolicy random_loglinear(const SnapshotPtr& snap, const LinearMdp& mdp, double eta,
                                 int updates, double scale, Rng& rng) {
  LogLinearPolicy p = init_policy(snap, eta, mdp);
  std::normal_distribution<double> g(0.0, scale);
  for (int i = 0; i < updates; ++i) {
    Eigen::VectorXd w(mdp.feature_dim());
    for (int j = 0; j < w.size(); ++j) w(j) = g(rng);
    p = p.appended(w);
  }
  p.materialize(mdp);
  return p;
}

std::string fmt(double v) {
  std::ostringstream o;
  o.precision(4);
  o << v;
  return o.str();
}

}  // namespace

CheckResult check_determinant_ratio(const std::vector<int>& dims, int updates, std::uint64_t seed) {
  CheckResult r{"determinant_ratio", true, 0.0, 1e-10, ""};
  double max_logdet_drift = 0.0;
  for (int d : dims) {
    Rng rng = make_rng(seed, "check:det", static_cast<std::uint64_t>(d));
    CovarianceState st = init_covariance(d, 1.0);
    for (int i = 0; i < updates; ++i) {
      const Eigen::VectorXd phi = random_feature(d, rng);
      const double before = st.sigma().partialPivLu().determinant();
      const double q = st.quad_form(phi);
      st.rank1_update(phi);
      const double after = st.sigma().partialPivLu().determinant();
      r.metric = std::max(r.metric, std::abs(after - before * (1.0 + q)) / after);
    }
    max_logdet_drift = std::max(max_logdet_drift, std::abs(st.log_det() - st.dense_log_det()));
  }
  r.pass = r.metric <= r.threshold;
  r.detail = "max relative error " + fmt(r.metric) + ", log-det drift " + fmt(max_logdet_drift);
  return r;
}

CheckResult check_inverse_fidelity(int dim, int updates, int refactor_period, std::uint64_t seed) {
  CheckResult r{"inverse_fidelity", true, 0.0, 1e-8, ""};
  Rng rng = make_rng(seed, "check:inverse", static_cast<std::uint64_t>(dim));
  CovarianceState st = init_covariance(dim, 1.0, refactor_period);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(dim, dim);
  for (int i = 0; i < updates; ++i) {
    st.rank1_update(random_feature(dim, rng));
    r.metric = std::max(r.metric, (st.sigma() * st.sigma_inv() - eye).cwiseAbs().maxCoeff());
  }
  r.pass = r.metric <= r.threshold;
  r.detail = "d=" + std::to_string(dim) + ", max |S S^-1 - I| " + fmt(r.metric);
  return r;
}

std::vector<CheckResult> check_run_invariants(const RunSuiteOptions& o) {
  CheckResult sw{"switch_bound", true, 0.0, 1.0, ""};
  CheckResult pot{"potential", true, 0.0, 1.0, ""};
  CheckResult over{"determinant_overshoot", true, 0.0, 4.0, ""};
  int sw_viol = 0, sw_viol_doublings = 0, pot_viol = 0, over_viol = 0;
  for (int c = 0; c < o.configs; ++c) {
    Rng rng = make_rng(o.seed, "check:runs", static_cast<std::uint64_t>(c));
    const int d = uniform_int(rng, 1, o.max_dim);
    const int S = uniform_int(rng, 2, 10);
    const int A = uniform_int(rng, 2, 4);
    const double gamma = uniform_real(rng, 0.5, 0.9);
    const LinearMdp mdp = make_random_linear_mdp(S, A, d, gamma, draw_seed(rng));
    CopoeConfig cfg;
    cfg.N = static_cast<long>(uniform_real(rng, static_cast<double>(o.min_N), static_cast<double>(o.max_N)));
    cfg.lambda = uniform_real(rng, o.min_lambda, o.max_lambda);
    cfg.beta = uniform_real(rng, 0.5, 5.0);
    cfg.solver.K = 2;
    cfg.solver.kappa = 1;
    cfg.solver.eta = 0.1;
    cfg.solver.W = 2.0 * return_bound(gamma);
    cfg.solver.t_max = 200;
    cfg.seed = draw_seed(rng);
    cfg.oracle = false;
    const RunResult res = run(mdp, cfg);
    const RunTelemetry& t = res.telemetry;
    const double bound = switch_bound(d, cfg.N, cfg.lambda);
    sw.metric = std::max(sw.metric, static_cast<double>(t.solver_calls) / bound);
    sw_viol += static_cast<double>(t.solver_calls) > bound;
    // the first call is not a doubling; this count excludes it
    sw_viol_doublings += static_cast<double>(t.solver_calls - 1) > bound;
    const PotentialReport p = potential_check(t);
    if (p.rhs > 0.0) pot.metric = std::max(pot.metric, p.lhs / p.rhs);
    pot_viol += !p.pass;
    for (double gap : t.refresh_log_det_gap) {
      over.metric = std::max(over.metric, std::exp(gap));
      over_viol += gap > std::log(4.0) + 1e-12;
    }
  }
  sw.pass = sw_viol == 0;
  pot.pass = pot_viol == 0;
  over.pass = over_viol == 0;
  sw.detail = std::to_string(sw_viol) + " violations in " + std::to_string(o.configs) +
              " runs, max calls/bound " + fmt(sw.metric) + "; calls-1 > bound in " +
              std::to_string(sw_viol_doublings);
  pot.detail = std::to_string(pot_viol) + " violations, max lhs/rhs " + fmt(pot.metric);
  over.detail = std::to_string(over_viol) + " violations, max det ratio at refresh " + fmt(over.metric);
  return {sw, pot, over};
}

CheckResult check_npg_regret(int instances, const std::vector<int>& Ks, int max_actions,
                             std::uint64_t seed) {
  CheckResult r{"npg_regret", true, 0.0, 1.0, ""};
  int violations = 0, evaluated = 0;
  for (int i = 0; i < instances; ++i) {
    Rng rng = make_rng(seed, "check:npg", static_cast<std::uint64_t>(i));
    const int A = uniform_int(rng, 2, max_actions);
    const int S = uniform_int(rng, 3, 8);
    const int d = uniform_int(rng, 2, 6);
    const double gamma = uniform_real(rng, 0.5, 0.9);
    const LinearMdp mdp = make_random_linear_mdp(S, A, d, gamma, draw_seed(rng));
    const SnapshotPtr snap = random_snapshot(mdp, uniform_real(rng, 0.5, 4.0), rng, 1);
    const Vector b = snap->bonus_table();
    const Vector bphi = snap->bonus_phi_table();
    const TablePolicy uniform = TablePolicy::uniform(S, A);
    MixturePolicy cover;
    cover.add(std::make_shared<TablePolicy>(uniform));
    const Vector fit_dist = occupancy(mdp, uniform, mdp.start_state()).dist;
    for (int K : Ks) {
      const Hyperparams h = default_hyperparams(K, A, gamma, 1, 0.1);
      SolverConfig cfg;
      cfg.K = K;
      cfg.eta = h.eta;
      cfg.W = h.W;
      cfg.kappa = 1;
      Eigen::MatrixXd cum = Eigen::MatrixXd::Zero(S, A);
      SolverHooks hooks;
      hooks.critic = [&](int, const LogLinearPolicy& pi) {
        const Vector target = exact_q(mdp, pi, &b).q - b;
        const Eigen::VectorXd w = best_fit_w(mdp, fit_dist, target, cfg.W);
        const Vector qhat = mdp.features() * w + bphi;
        for (StateId s = 0; s < S; ++s) {
          if (!snap->known_state(s)) continue;
          const Eigen::VectorXd p = pi.action_probs(mdp, s);
          double base = 0.0;
          for (ActionId a = 0; a < A; ++a) base += p(a) * qhat(mdp.pair_index(s, a));
          for (ActionId a = 0; a < A; ++a) cum(s, a) += qhat(mdp.pair_index(s, a)) - base;
        }
        return w;
      };
      Rng solver_rng = make_rng(seed, "check:npg:solve", static_cast<std::uint64_t>(i * 1000 + K));
      solve(mdp, cover, snap, cfg, solver_rng, hooks);
      const double bound = 2.0 * cfg.W * std::sqrt(std::log(static_cast<double>(A)) * K);
      for (StateId s = 0; s < S; ++s) {
        if (!snap->known_state(s)) continue;
        const double regret = cum.row(s).maxCoeff();
        r.metric = std::max(r.metric, regret / bound);
        violations += regret > bound;
        ++evaluated;
      }
    }
  }
  r.pass = violations == 0 && evaluated > 0;
  r.detail = std::to_string(violations) + " violations over " + std::to_string(evaluated) +
             " (instance, K, known state) triples, max regret/bound " + fmt(r.metric);
  return r;
}

CheckResult check_policy_form(int histories, std::uint64_t seed) {
  CheckResult r{"policy_form", true, 0.0, 1e-12, ""};
  for (int hidx = 0; hidx < histories; ++hidx) {
    Rng rng = make_rng(seed, "check:form", static_cast<std::uint64_t>(hidx));
    const int S = uniform_int(rng, 3, 6), A = uniform_int(rng, 2, 6), d = uniform_int(rng, 2, 5);
    const LinearMdp mdp = make_random_linear_mdp(S, A, d, uniform_real(rng, 0.3, 0.95), draw_seed(rng));
    const SnapshotPtr snap = random_snapshot(mdp, uniform_real(rng, 0.5, 4.0), rng, 7);
    const double eta = uniform_real(rng, 0.01, 1.0);
    LogLinearPolicy closed = init_policy(snap, eta, mdp);
    RowMatrix iter = closed.to_table(mdp);
    const int len = uniform_int(rng, 1, 50);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int k = 0; k < len; ++k) {
      Eigen::VectorXd w(d);
      for (int j = 0; j < d; ++j) w(j) = g(rng);
      closed = closed.appended(w);
      for (StateId s = 0; s < S; ++s) {
        if (!snap->known_state(s)) continue;
        double z = 0.0;
        for (ActionId a = 0; a < A; ++a) {
          iter(s, a) *= std::exp(eta * (mdp.phi(s, a).dot(w) + snap->bonus_phi(s, a)));
          z += iter(s, a);
        }
        iter.row(s) /= z;
      }
    }
    for (StateId s = 0; s < S; ++s)
      r.metric = std::max(r.metric, (closed.action_probs(mdp, s) - iter.row(s).transpose()).cwiseAbs().maxCoeff());
  }
  r.pass = r.metric <= r.threshold;
  r.detail = std::to_string(histories) + " histories, max |difference| " + fmt(r.metric);
  return r;
}

CheckResult check_is_unbiased(const IsUnbiasedOptions& o) {
  CheckResult r{"is_unbiased", true, 0.0, 0.95, ""};
  int seeds_passing = 0;
  double worst_z = 0.0;
  for (int j = 0; j < o.seeds; ++j) {
    Rng rng = make_rng(o.seed, "check:is", static_cast<std::uint64_t>(j));
    const LinearMdp mdp = make_random_linear_mdp(5, 2, 3, 0.7, draw_seed(rng));
    const SnapshotPtr snap = random_snapshot(mdp, 1.0, rng, 3);
    int passing = 0;
    for (int p = 0; p < o.pairs; ++p) {
      const LogLinearPolicy behavior = random_loglinear(snap, mdp, 1.0, 3, 0.5, rng);
      // a few small multiplicative steps away from the behavior: ratios stay near 1
      LogLinearPolicy target = behavior;
      std::normal_distribution<double> g(0.0, 0.1);
      for (int k = 0; k < 2; ++k) {
        Eigen::VectorXd w(mdp.feature_dim());
        for (int i = 0; i < w.size(); ++i) w(i) = g(rng);
        target = target.appended(w);
      }
      target.materialize(mdp);
      const StateAction start{uniform_int(rng, 0, 4), uniform_int(rng, 0, 1)};
      Rng roll = make_rng(draw_seed(rng), "rollout", 0);
      double sum = 0.0, sum_sq = 0.0;
      for (int i = 0; i < o.records; ++i) {
        const TrajectoryRecord rec = rollout_from(mdp, start, behavior, *snap, roll, 100000);
        const double y = importance_ratio(mdp, rec.path, target, behavior) * rec.g_return;
        sum += y;
        sum_sq += y * y;
      }
      const double n = o.records;
      const double mean = sum / n;
      const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
      const double se = std::sqrt(var / n);
      const Vector b = snap->bonus_table();
      const int idx = mdp.pair_index(start.state, start.action);
      const double truth = exact_q(mdp, target, &b).q(idx) - b(idx);
      const double z = se > 0.0 ? std::abs(mean - truth) / se : (std::abs(mean - truth) <= 1e-12 ? 0.0 : 1e9);
      worst_z = std::max(worst_z, z);
      passing += z <= 3.0;
    }
    seeds_passing += passing * 5 >= 4 * o.pairs;
  }
  r.metric = static_cast<double>(seeds_passing) / o.seeds;
  r.pass = r.metric >= r.threshold;
  r.detail = std::to_string(seeds_passing) + "/" + std::to_string(o.seeds) +
             " seeds with >= 4/5 pairs inside 3 SE, worst z " + fmt(worst_z);
  return r;
}

CheckResult check_ratio_stability(long N, int K, std::uint64_t seed) {
  CheckResult r{"ratio_stability", true, 0.0, 0.99, ""};
  Rng rng = make_rng(seed, "check:ratio");
  const LinearMdp mdp = make_random_linear_mdp(5, 2, 3, 0.9, draw_seed(rng));
  const Hyperparams h = default_hyperparams(K, 2, mdp.gamma(), N, 0.1);
  CopoeConfig cfg;
  cfg.N = N;
  cfg.solver.K = K;
  cfg.solver.eta = h.eta;
  cfg.solver.kappa = h.kappa;
  cfg.solver.W = h.W;
  cfg.solver.t_max = default_t_max(N, K, 0.1, mdp.gamma());
  cfg.beta = beta_practical(0.01, 3, mdp.gamma());
  cfg.seed = seed;
  cfg.oracle = false;
  const RunResult res = run(mdp, cfg);
  const auto& st = res.telemetry.solver_totals;
  r.metric = st.ratios_total ? 1.0 - static_cast<double>(st.ratios_above_two) / st.ratios_total : 0.0;
  r.pass = st.ratios_total > 0 && r.metric >= r.threshold;
  r.detail = std::to_string(st.ratios_total) + " ratios, fraction <= 2: " + fmt(r.metric) +
             ", max " + fmt(st.max_ratio) + ", kappa " + std::to_string(h.kappa);
  return r;
}

std::vector<CheckResult> check_one_sided(const OneSidedOptions& o) {
  CheckResult within{"one_sided", true, 0.0, 0.9, ""};
  CheckResult above{"one_sided_failures", true, 0.0, 0.1, ""};
  double sum_within = 0.0, sum_above = 0.0;
  long evals = 0;
  for (int j = 0; j < o.seeds; ++j) {
    Rng rng = make_rng(o.seed, "check:onesided", static_cast<std::uint64_t>(j));
    const LinearMdp mdp = make_random_linear_mdp(o.states, o.actions, o.dim, o.gamma, draw_seed(rng));
    const Hyperparams h = default_hyperparams(o.K, o.actions, o.gamma, o.N, 0.1);
    CopoeConfig cfg;
    cfg.N = o.N;
    cfg.solver.K = o.K;
    cfg.solver.eta = h.eta;
    cfg.solver.kappa = h.kappa;
    cfg.solver.W = h.W;
    cfg.solver.t_max = default_t_max(o.N, o.K, 0.1, o.gamma);
    cfg.beta = o.beta;
    cfg.lambda = o.lambda;
    cfg.mc_multiplier = o.mc_multiplier;
    cfg.seed = draw_seed(rng);
    cfg.oracle = false;
    const TablePolicy comparator = optimal_policy(mdp).first;
    const Vector d_star = occupancy(mdp, comparator, mdp.start_state()).dist;
    std::vector<Eigen::VectorXd> fits;
    DriverHooks hooks;
    hooks.solver.observer = [&](const InnerStep& step) { fits.push_back(step.fit->w_hat); };
    hooks.on_solve = [&](long, const SnapshotPtr& snap, const MixturePolicy& cover, const SolveResult& sr) {
      const Vector rho = occupancy(mdp, cover, mdp.start_state()).dist;
      const Vector b = snap->bonus_table();
      for (std::size_t k = 0; k < sr.iterates.size(); ++k) {
        const Vector target = exact_q(mdp, *sr.iterates[k], &b).q - b;
        const Eigen::VectorXd w_star = best_fit_w(mdp, rho, target, cfg.solver.W);
        double mass = 0.0, ok = 0.0, bad = 0.0;
        for (StateId s = 0; s < mdp.num_states(); ++s) {
          if (!snap->known_state(s)) continue;
          for (ActionId a = 0; a < mdp.num_actions(); ++a) {
            const double wgt = d_star(mdp.pair_index(s, a));
            if (wgt <= 0.0) continue;
            const double err = mdp.phi(s, a).dot(w_star - fits[k]);
            const double bp = snap->bonus_phi(s, a);
            mass += wgt;
            ok += wgt * (std::abs(err) <= bp);
            bad += wgt * (err < -bp);
          }
        }
        if (mass > 0.0) {
          sum_within += ok / mass;
          sum_above += bad / mass;
          ++evals;
        }
      }
      fits.clear();
    };
    run(mdp, cfg, hooks);
  }
  if (evals > 0) {
    within.metric = sum_within / evals;
    above.metric = sum_above / evals;
  }
  within.pass = evals > 0 && within.metric >= within.threshold;
  above.pass = evals > 0 && above.metric <= above.threshold;
  within.detail = std::to_string(evals) + " (refresh, k) evaluations, mean fraction inside " + fmt(within.metric);
  above.detail = "mean fraction with Qhat above Q*: " + fmt(above.metric);
  return {within, above};
}

std::vector<CheckResult> check_transfer(int instances, std::uint64_t seed) {
  CheckResult exact{"transfer_zero", true, 0.0, 1e-8, ""};
  for (int i = 0; i < instances; ++i) {
    Rng rng = make_rng(seed, "check:transfer", static_cast<std::uint64_t>(i));
    const int S = uniform_int(rng, 3, 8), A = uniform_int(rng, 2, 4), d = uniform_int(rng, 2, 6);
    const LinearMdp mdp = make_random_linear_mdp(S, A, d, uniform_real(rng, 0.5, 0.95), draw_seed(rng));
    const SnapshotPtr snap = random_snapshot(mdp, uniform_real(rng, 0.5, 4.0), rng, 1);
    const LogLinearPolicy inner = random_loglinear(snap, mdp, 1.0, 3, 1.0, rng);
    const TablePolicy comparator = optimal_policy(mdp).first;
    const Vector rho = occupancy(mdp, TablePolicy::uniform(S, A), mdp.start_state()).dist;
    const double W = 10.0 * std::sqrt(static_cast<double>(d)) * return_bound(mdp.gamma());
    exact.metric = std::max(exact.metric, transfer_error(mdp, comparator, *snap, inner, rho, W));
  }
  exact.pass = exact.metric <= exact.threshold;
  exact.detail = std::to_string(instances) + " exact instances, max transfer error " + fmt(exact.metric);

  CheckResult agg{"transfer_aggregated", false, 0.0, 1e-3, ""};
  double worst_mismatch = 0.0;
  for (int i = 0; i < 5 && !agg.pass; ++i) {
    Rng rng = make_rng(seed, "check:transfer:agg", static_cast<std::uint64_t>(i));
    const LinearMdp base = make_random_linear_mdp(6, 2, 3, 0.8, draw_seed(rng));
    const std::vector<int> clusters{0, 0, 1, 1, 2, 2};
    const LinearMdp mdp = make_aggregated_mdp(base, clusters);
    const SnapshotPtr snap = random_snapshot(mdp, 1.0, rng, 1);
    const LogLinearPolicy inner = random_loglinear(snap, mdp, 1.0, 3, 1.0, rng);
    const TablePolicy comparator = optimal_policy(mdp).first;
    const TablePolicy uniform = TablePolicy::uniform(6, 2);
    const Vector rho = occupancy(mdp, uniform, mdp.start_state()).dist;
    const double W = 1e6;
    const double e = transfer_error(mdp, comparator, *snap, inner, rho, W);

    // brute force: Q by fixed-point iteration, per-(cluster, action) weighted means, double loop
    const Vector b = snap->bonus_table();
    const RowMatrix pi = inner.to_table(mdp);
    Vector q = Vector::Zero(mdp.num_pairs());
    for (int it = 0; it < 5000; ++it) {
      Vector next(mdp.num_pairs());
      for (StateId s = 0; s < 6; ++s)
        for (ActionId a = 0; a < 2; ++a) {
          double cont = 0.0;
          for (StateId s2 = 0; s2 < 6; ++s2)
            for (ActionId a2 = 0; a2 < 2; ++a2)
              cont += mdp.transition(s, a, s2) * pi(s2, a2) * q(mdp.pair_index(s2, a2));
          next(mdp.pair_index(s, a)) = mdp.reward(s, a) + b(mdp.pair_index(s, a)) + mdp.gamma() * cont;
        }
      q = next;
    }
    const Vector f = q - b;
    double w[3][2] = {}, m[3][2] = {};
    for (StateId s = 0; s < 6; ++s)
      for (ActionId a = 0; a < 2; ++a) {
        w[clusters[s]][a] += rho(mdp.pair_index(s, a)) * f(mdp.pair_index(s, a));
        m[clusters[s]][a] += rho(mdp.pair_index(s, a));
      }
    const Vector ds = occupancy(mdp, comparator, mdp.start_state()).state_marginal(mdp);
    double brute = 0.0;
    for (StateId s = 0; s < 6; ++s)
      for (ActionId a = 0; a < 2; ++a) {
        const double fit = m[clusters[s]][a] > 0.0 ? w[clusters[s]][a] / m[clusters[s]][a] : 0.0;
        const double diff = fit - f(mdp.pair_index(s, a));
        brute += 0.5 * ds(s) * 0.5 * diff * diff;
      }
    const double mismatch = std::abs(e - brute);
    worst_mismatch = std::max(worst_mismatch, mismatch);
    agg.metric = std::max(agg.metric, e);
    agg.pass = e > agg.threshold && mismatch <= 1e-10;
  }
  agg.detail = "largest transfer error " + fmt(agg.metric) + ", brute-force mismatch " + fmt(worst_mismatch);
  return {exact, agg};
}

CheckResult check_covariance_sandwich(const SandwichOptions& o) {
  CheckResult r{"covariance_sandwich", true, 0.0, 0.95, ""};
  long inside = 0, total = 0;
  for (int j = 0; j < o.seeds; ++j) {
    Rng rng = make_rng(o.seed, "check:sandwich", static_cast<std::uint64_t>(j));
    const int d = 4;
    const LinearMdp mdp = make_random_linear_mdp(6, 2, d, 0.8, draw_seed(rng));
    CopoeConfig cfg;
    cfg.N = o.N;
    cfg.lambda = std::max(1.0, static_cast<double>(d));
    cfg.beta = 2.0;
    cfg.solver.K = 4;
    cfg.solver.eta = 0.5;
    cfg.solver.kappa = 1;
    cfg.solver.W = 2.0 * return_bound(mdp.gamma());
    cfg.solver.t_max = 500;
    cfg.seed = draw_seed(rng);
    cfg.oracle = false;
    const RunResult res = run(mdp, cfg);
    Eigen::MatrixXd m = cfg.lambda * Eigen::MatrixXd::Identity(d, d);
    for (std::size_t i = 1; i < res.outer.size(); ++i) {
      if (res.outer[i].count == 0) continue;
      const Vector dist = occupancy(mdp, *res.outer[i].policy, mdp.start_state()).dist;
      const Eigen::MatrixXd cov = mdp.features().transpose() * dist.asDiagonal() * mdp.features();
      m += static_cast<double>(res.outer[i].count) * cov;
    }
    const Eigen::MatrixXd& sig = res.final_covariance.sigma();
    for (int p = 0; p < o.probes; ++p) {
      Eigen::VectorXd v = random_feature(d, rng);
      v.normalize();
      const double lhs = v.dot(sig * v), ref = v.dot(m * v);
      inside += lhs >= ref / 3.0 && lhs <= 5.0 * ref / 3.0;
      ++total;
    }
  }
  r.metric = total ? static_cast<double>(inside) / total : 0.0;
  r.pass = r.metric >= r.threshold;
  r.detail = std::to_string(inside) + "/" + std::to_string(total) + " probes inside the sandwich";
  return r;
}

}  // namespace copoe
