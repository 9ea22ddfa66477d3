#include "copoe/oracle_eval.hpp"

#include <algorithm>
#include <cmath>

#include "copoe/critic.hpp"
#include "copoe/errors.hpp"

namespace copoe {

namespace {

// P_pi(s, s') = sum_a pi(a|s) p(s'|s,a) and r_pi(s) = sum_a pi(a|s) r(s,a).
void state_chain(const LinearMdp& mdp, const RowMatrix& pi, const Vector& reward,
                 Eigen::MatrixXd& p_pi, Vector& r_pi) {
  const int S = mdp.num_states(), A = mdp.num_actions();
  p_pi = Eigen::MatrixXd::Zero(S, S);
  r_pi = Vector::Zero(S);
  for (StateId s = 0; s < S; ++s) {
    for (ActionId a = 0; a < A; ++a) {
      const double w = pi(s, a);
      if (w == 0.0) continue;
      const int i = mdp.pair_index(s, a);
      p_pi.row(s) += w * mdp.transitions().row(i);
      r_pi(s) += w * reward(i);
    }
  }
}

ValueTable evaluate_table(const LinearMdp& mdp, const RowMatrix& pi, const Vector& reward) {
  const int S = mdp.num_states();
  Eigen::MatrixXd p_pi;
  Vector r_pi;
  state_chain(mdp, pi, reward, p_pi, r_pi);
  const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(S, S) - mdp.gamma() * p_pi;
  ValueTable out;
  out.v = m.partialPivLu().solve(r_pi);
  out.q = reward + mdp.gamma() * (mdp.transitions() * out.v);
  return out;
}

Vector greedy_values(const LinearMdp& mdp, const Vector& q, std::vector<ActionId>* argmax) {
  const int S = mdp.num_states(), A = mdp.num_actions();
  Vector v(S);
  if (argmax) argmax->assign(static_cast<std::size_t>(S), 0);
  for (StateId s = 0; s < S; ++s) {
    ActionId best = 0;
    for (ActionId a = 1; a < A; ++a)
      if (q(mdp.pair_index(s, a)) > q(mdp.pair_index(s, best)) + 1e-12) best = a;
    v(s) = q(mdp.pair_index(s, best));
    if (argmax) (*argmax)[static_cast<std::size_t>(s)] = best;
  }
  return v;
}

}  // namespace

Vector OccupancyMeasure::state_marginal(const LinearMdp& mdp) const {
  Vector m = Vector::Zero(mdp.num_states());
  for (StateId s = 0; s < mdp.num_states(); ++s)
    for (ActionId a = 0; a < mdp.num_actions(); ++a) m(s) += dist(mdp.pair_index(s, a));
  return m;
}

ValueTable exact_q(const LinearMdp& mdp, const StochasticPolicy& policy, const Vector* extra_reward) {
  Vector reward = mdp.rewards();
  if (extra_reward) {
    if (extra_reward->size() != reward.size()) throw ParameterError("extra reward has wrong size");
    reward += *extra_reward;
  }
  ValueTable out = evaluate_table(mdp, policy.to_table(mdp), reward);
  out.reward_tag = extra_reward ? "bonus_augmented" : "original";
  return out;
}

std::pair<TablePolicy, ValueTable> optimal_policy(const LinearMdp& mdp, double tol) {
  if (!(tol > 0.0)) throw ParameterError("tolerance must be positive");
  const Vector& r = mdp.rewards();
  const double g = mdp.gamma();
  Vector q = Vector::Zero(mdp.num_pairs());
  for (int it = 0; it < 100000; ++it) {
    const Vector next = r + g * (mdp.transitions() * greedy_values(mdp, q, nullptr));
    const double change = (next - q).cwiseAbs().maxCoeff();
    q = next;
    if (change <= tol * (1.0 - g)) break;
  }
  std::vector<ActionId> actions;
  greedy_values(mdp, q, &actions);
  for (int it = 0; it < 1000; ++it) {
    const TablePolicy pi = TablePolicy::deterministic(actions, mdp.num_actions());
    q = evaluate_table(mdp, pi.table(), r).q;
    std::vector<ActionId> improved;
    greedy_values(mdp, q, &improved);
    if (improved == actions) break;
    actions = std::move(improved);
  }
  TablePolicy pi = TablePolicy::deterministic(actions, mdp.num_actions());
  ValueTable vt = evaluate_table(mdp, pi.table(), r);
  return {std::move(pi), std::move(vt)};
}

OccupancyMeasure occupancy(const LinearMdp& mdp, const StochasticPolicy& policy, StateId s0) {
  if (!mdp.valid_state(s0)) throw ParameterError("occupancy: invalid start state");
  const RowMatrix pi = policy.to_table(mdp);
  const int S = mdp.num_states(), A = mdp.num_actions();
  Eigen::MatrixXd p_pi;
  Vector r_pi;
  state_chain(mdp, pi, mdp.rewards(), p_pi, r_pi);
  const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(S, S) - mdp.gamma() * p_pi.transpose();
  Vector e = Vector::Zero(S);
  e(s0) = 1.0 - mdp.gamma();
  const Vector ds = m.partialPivLu().solve(e);
  OccupancyMeasure out;
  out.dist.resize(mdp.num_pairs());
  for (StateId s = 0; s < S; ++s)
    for (ActionId a = 0; a < A; ++a) {
      const double v = ds(s) * pi(s, a);
      out.dist(mdp.pair_index(s, a)) = v >= -1e-12 ? std::max(v, 0.0) : v;
    }
  out.dist /= out.dist.sum();
  return out;
}

OccupancyMeasure occupancy(const LinearMdp& mdp, const MixturePolicy& policy, StateId s0) {
  if (policy.empty()) throw ParameterError("occupancy of an empty mixture");
  OccupancyMeasure out;
  out.dist = Vector::Zero(mdp.num_pairs());
  for (std::size_t i = 0; i < policy.size(); ++i)
    out.dist += policy.weights()[i] * occupancy(mdp, *policy.members()[i], s0).dist;
  out.dist /= out.dist.sum();
  return out;
}

double policy_value(const LinearMdp& mdp, const StochasticPolicy& policy) {
  return exact_q(mdp, policy).v(mdp.start_state());
}

double policy_value(const LinearMdp& mdp, const MixturePolicy& policy) {
  if (policy.empty()) throw ParameterError("value of an empty mixture");
  double v = 0.0;
  for (std::size_t i = 0; i < policy.size(); ++i)
    v += policy.weights()[i] * policy_value(mdp, *policy.members()[i]);
  return v / policy.total_weight();
}

double population_loss(const LinearMdp& mdp, const Vector& dist, const Vector& target,
                       const Eigen::VectorXd& w) {
  const Vector resid = mdp.features() * w - target;
  return 0.5 * dist.dot(resid.cwiseAbs2());
}

Eigen::VectorXd best_fit_w(const LinearMdp& mdp, const Vector& dist, const Vector& target, double W) {
  if (dist.size() != mdp.num_pairs() || target.size() != mdp.num_pairs())
    throw ParameterError("best_fit_w: table sizes must match the number of pairs");
  const auto& phi = mdp.features();
  const Eigen::MatrixXd gram = phi.transpose() * dist.asDiagonal() * phi;
  const Eigen::VectorXd rhs = phi.transpose() * dist.cwiseProduct(target);
  return BallConstrainedLs(gram, 0.0).solve(rhs, W).w;
}

Vector comparator_uniform_dist(const LinearMdp& mdp, const StochasticPolicy& comparator) {
  const Vector ds = occupancy(mdp, comparator, mdp.start_state()).state_marginal(mdp);
  Vector out(mdp.num_pairs());
  const double ua = 1.0 / mdp.num_actions();
  for (StateId s = 0; s < mdp.num_states(); ++s)
    for (ActionId a = 0; a < mdp.num_actions(); ++a) out(mdp.pair_index(s, a)) = ds(s) * ua;
  return out;
}

double transfer_error(const LinearMdp& mdp, const StochasticPolicy& comparator,
                      const GeometrySnapshot& snapshot, const StochasticPolicy& inner_policy,
                      const Vector& fit_dist, double W) {
  const Vector b = snapshot.bonus_table();
  const Vector target = exact_q(mdp, inner_policy, &b).q - b;
  const Eigen::VectorXd w = best_fit_w(mdp, fit_dist, target, W);
  return population_loss(mdp, comparator_uniform_dist(mdp, comparator), target, w);
}

}  // namespace copoe
