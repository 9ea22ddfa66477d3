#include <cmath>

#include "copoe/checks.hpp"
#include "copoe/oracle_eval.hpp"
#include "doctest.h"

using namespace copoe;

namespace {

// independent value iteration on Q
Vector vi_q(const LinearMdp& m, int iters) {
  const int S = m.num_states(), A = m.num_actions();
  Vector q = Vector::Zero(S * A);
  for (int it = 0; it < iters; ++it) {
    Vector v(S);
    for (StateId s = 0; s < S; ++s) v(s) = q.segment(s * A, A).maxCoeff();
    q = m.rewards() + m.gamma() * m.transitions() * v;
  }
  return q;
}

}  // namespace

TEST_CASE("single absorbing state with unit reward has Q = 1 / (1 - gamma)") {
  const LinearMdp m(1, 1, 0.9, RowMatrix::Ones(1, 1), Vector::Ones(1), RowMatrix::Ones(1, 1),
                    RowMatrix::Ones(1, 1), 0, "single", 0);
  const ValueTable t = exact_q(m, TablePolicy::uniform(1, 1));
  CHECK(t.q(0) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(t.v(0) == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("optimal policy matches independent value iteration") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const LinearMdp m = make_random_linear_mdp(6, 3, 4, 0.8, seed);
    const auto [pi, vt] = optimal_policy(m);
    const Vector q = vi_q(m, 400);
    CHECK((vt.q - q).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((exact_q(m, pi).q - q).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("exact evaluation satisfies the Bellman equation") {
  const LinearMdp m = make_random_linear_mdp(5, 2, 3, 0.9, 4);
  const TablePolicy pi = TablePolicy::uniform(5, 2);
  const ValueTable t = exact_q(m, pi);
  for (StateId s = 0; s < 5; ++s) CHECK(t.v(s) == doctest::Approx(0.5 * (t.q_at(m, s, 0) + t.q_at(m, s, 1))));
  const Vector backup = m.rewards() + m.gamma() * m.transitions() * t.v;
  CHECK((backup - t.q).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("a constant bonus shifts every value by c / (1 - gamma)") {
  const LinearMdp m = make_random_linear_mdp(4, 2, 3, 0.75, 2);
  const TablePolicy pi = TablePolicy::uniform(4, 2);
  const Vector c = Vector::Constant(8, 0.3);
  const ValueTable base = exact_q(m, pi), shifted = exact_q(m, pi, &c);
  CHECK(((shifted.q - base.q).array() - 0.3 / 0.25).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("values grow with the bonus") {
  const LinearMdp m = make_random_linear_mdp(4, 2, 3, 0.75, 3);
  const TablePolicy pi = TablePolicy::uniform(4, 2);
  Vector b = Vector::Zero(8);
  b(3) = 1.0;
  const ValueTable base = exact_q(m, pi), more = exact_q(m, pi, &b);
  CHECK(((more.q - base.q).array() >= -1e-15).all());
  CHECK(more.q(3) > base.q(3));
}

TEST_CASE("occupancy at gamma = 0 is the start state times the policy") {
  const LinearMdp m = make_random_linear_mdp(3, 2, 2, 0.0, 6);
  RowMatrix t(3, 2);
  t << 0.2, 0.8, 0.5, 0.5, 0.9, 0.1;
  const Vector d = occupancy(m, TablePolicy(t), 0).dist;
  CHECK(d(0) == doctest::Approx(0.2));
  CHECK(d(1) == doctest::Approx(0.8));
  CHECK(d.tail(4).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("occupancy sums to one and matches the value") {
  const LinearMdp m = make_random_linear_mdp(5, 3, 3, 0.85, 7);
  const TablePolicy pi = TablePolicy::uniform(5, 3);
  const Vector d = occupancy(m, pi, m.start_state()).dist;
  CHECK(d.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d.minCoeff() >= 0.0);
  CHECK(d.dot(m.rewards()) / (1.0 - m.gamma()) == doctest::Approx(policy_value(m, pi)).epsilon(1e-10));
}

TEST_CASE("performance difference identity") {
  const LinearMdp m = make_random_linear_mdp(5, 2, 3, 0.8, 9);
  const TablePolicy pi = TablePolicy::uniform(5, 2);
  const TablePolicy other = optimal_policy(m).first;
  const ValueTable t = exact_q(m, pi);
  const Vector d = occupancy(m, other, m.start_state()).dist;
  double adv = 0.0;
  for (StateId s = 0; s < 5; ++s)
    for (ActionId a = 0; a < 2; ++a) adv += d(m.pair_index(s, a)) * (t.q_at(m, s, a) - t.v(s));
  CHECK(policy_value(m, other) - policy_value(m, pi) == doctest::Approx(adv / (1.0 - m.gamma())).epsilon(1e-10));
}

TEST_CASE("mixture value and occupancy are weighted averages") {
  const LinearMdp m = make_random_linear_mdp(4, 2, 3, 0.7, 10);
  const auto a = std::make_shared<TablePolicy>(TablePolicy::uniform(4, 2));
  const auto b = std::make_shared<TablePolicy>(optimal_policy(m).first);
  MixturePolicy mix;
  mix.add(a, 1.0);
  mix.add(b, 3.0);
  CHECK(policy_value(m, mix) == doctest::Approx(0.25 * policy_value(m, *a) + 0.75 * policy_value(m, *b)));
  const Vector d = occupancy(m, mix, 0).dist;
  const Vector e = 0.25 * occupancy(m, *a, 0).dist + 0.75 * occupancy(m, *b, 0).dist;
  CHECK((d - e).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("best fit recovers an exactly linear target") {
  const LinearMdp m = make_random_linear_mdp(5, 2, 3, 0.7, 11);
  Eigen::VectorXd w(3);
  w << 0.5, -1.0, 2.0;
  const Vector target = m.features() * w;
  const Vector dist = Vector::Constant(10, 0.1);
  const Eigen::VectorXd fit = best_fit_w(m, dist, target, 100.0);
  CHECK(population_loss(m, dist, target, fit) <= 1e-20);
  CHECK(population_loss(m, dist, target, Eigen::VectorXd::Zero(3)) == doctest::Approx(0.5 * dist.dot(target.cwiseAbs2())));
}

TEST_CASE("comparator distribution spreads each state uniformly over actions") {
  const LinearMdp m = make_random_linear_mdp(4, 2, 3, 0.7, 12);
  const TablePolicy pi = optimal_policy(m).first;
  const Vector d = comparator_uniform_dist(m, pi);
  const Vector marg = occupancy(m, pi, m.start_state()).state_marginal(m);
  for (StateId s = 0; s < 4; ++s) {
    CHECK(d(m.pair_index(s, 0)) == doctest::Approx(0.5 * marg(s)));
    CHECK(d(m.pair_index(s, 1)) == doctest::Approx(0.5 * marg(s)));
  }
}

TEST_CASE("transfer error vanishes on exact instances and not on aggregated ones") {
  const auto results = check_transfer(4, 3);
  REQUIRE(results.size() == 2);
  CHECK(results[0].pass);
  CHECK(results[0].metric <= 1e-8);
  CHECK(results[1].pass);
}

TEST_CASE("one-hot features: each weight is the dist-weighted mean target of its coordinate") {
  const LinearMdp base = make_random_linear_mdp(4, 2, 3, 0.7, 13);
  const LinearMdp m = make_aggregated_mdp(base, {0, 0, 1, 1});
  Vector dist(8), target(8);
  dist << 0.1, 0.2, 0.3, 0.05, 0.1, 0.05, 0.15, 0.05;
  target << 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0;
  const Eigen::VectorXd w = best_fit_w(m, dist, target, 1e6);
  for (int c = 0; c < 2; ++c)
    for (ActionId a = 0; a < 2; ++a) {
      double num = 0.0, den = 0.0;
      for (StateId s = 2 * c; s < 2 * c + 2; ++s) {
        num += dist(m.pair_index(s, a)) * target(m.pair_index(s, a));
        den += dist(m.pair_index(s, a));
      }
      CHECK(w(c * 2 + a) == doctest::Approx(num / den).epsilon(1e-12));
    }
}

TEST_CASE("tabular one-hot features have zero transfer error") {
  const LinearMdp base = make_random_linear_mdp(4, 3, 3, 0.8, 14);
  const LinearMdp m = make_aggregated_mdp(base, {0, 1, 2, 3});
  CovarianceState st = init_covariance(m.feature_dim(), 1.0);
  for (StateId s = 0; s < 2; ++s)
    for (int i = 0; i < 30; ++i)
      for (ActionId a = 0; a < 3; ++a) st.rank1_update(m.phi(s, a));
  const GeometrySnapshot snap(st, m, BonusParams(1.0, 0.8), 1);
  const TablePolicy uniform = TablePolicy::uniform(4, 3);
  const Vector rho = Vector::Constant(12, 1.0 / 12.0);
  CHECK(transfer_error(m, optimal_policy(m).first, snap, uniform, rho, 1e6) <= 1e-12);
}
