#include <cmath>

#include "copoe/checks.hpp"
#include "copoe/errors.hpp"
#include "copoe/linmdp_env.hpp"
#include "copoe/policy.hpp"
#include "doctest.h"

using namespace copoe;

namespace {

// one state, two actions, two-dim one-hot features
LinearMdp two_arm() {
  RowMatrix f = RowMatrix::Identity(2, 2);
  RowMatrix p = RowMatrix::Ones(2, 1);
  Vector r(2);
  r << 1.0, 0.0;
  return LinearMdp(1, 2, 0.5, f, r, p, std::nullopt, 0, "two_arm", 0);
}

}  // namespace

TEST_CASE("initial policy is uniform on known states") {
  const LinearMdp m = two_arm();
  const LogLinearPolicy pi = init_policy(GeometrySnapshot::all_known(m), 0.3, m);
  const Eigen::VectorXd p = pi.action_probs(m, 0);
  CHECK(p(0) == doctest::Approx(0.5));
  CHECK(p(1) == doctest::Approx(0.5));
}

TEST_CASE("one exponentiated step with logits (ln 2, 0) gives (2/3, 1/3)") {
  const LinearMdp m = two_arm();
  const LogLinearPolicy pi = init_policy(GeometrySnapshot::all_known(m), 1.0, m);
  Eigen::VectorXd w(2);
  w << std::log(2.0), 0.0;
  const LogLinearPolicy next = pi.appended(w);
  const Eigen::VectorXd p = next.action_probs(m, 0);
  CHECK(p(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(p(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(next.num_updates() == 1);
}

TEST_CASE("large logits do not overflow") {
  const LinearMdp m = two_arm();
  LogLinearPolicy pi = init_policy(GeometrySnapshot::all_known(m), 1.0, m);
  Eigen::VectorXd w(2);
  w << 1e6, 0.0;
  pi = pi.appended(w);
  const Eigen::VectorXd p = pi.action_probs(m, 0);
  CHECK(std::isfinite(p(0)));
  CHECK(p(0) == doctest::Approx(1.0));
}

TEST_CASE("unknown states draw uniformly among unknown actions") {
  const LinearMdp m = make_random_linear_mdp(3, 3, 2, 0.9, 2);
  CovarianceState st = init_covariance(2, 1.0);
  const GeometrySnapshot raw(st, m, BonusParams(100.0, 0.9), 1);
  const auto snap = std::make_shared<const GeometrySnapshot>(raw);
  const LogLinearPolicy pi = init_policy(snap, 0.5, m);
  for (StateId s = 0; s < 3; ++s) {
    REQUIRE(!snap->known_state(s));
    const auto unknown = snap->unknown_actions(s);
    const Eigen::VectorXd p = pi.action_probs(m, s);
    for (ActionId a = 0; a < 3; ++a) {
      const bool u = std::find(unknown.begin(), unknown.end(), a) != unknown.end();
      CHECK(p(a) == doctest::Approx(u ? 1.0 / static_cast<double>(unknown.size()) : 0.0));
    }
  }
}

TEST_CASE("closed form agrees with sequential updates") {
  const CheckResult r = check_policy_form(20, 5);
  CHECK(r.pass);
  CHECK(r.metric <= 1e-12);
}

TEST_CASE("mixture samples members in proportion to their weights") {
  MixturePolicy mix;
  mix.add(std::make_shared<TablePolicy>(TablePolicy::uniform(1, 2)), 1.0);
  mix.add(std::make_shared<TablePolicy>(TablePolicy::uniform(1, 2)), 3.0);
  Rng rng(7);
  const int n = 20000;
  int second = 0;
  for (int i = 0; i < n; ++i) second += mix.sample_index(rng) == 1;
  const double se = std::sqrt(0.75 * 0.25 / n);
  CHECK(std::abs(second / static_cast<double>(n) - 0.75) <= 3.0 * se);
  CHECK(mix.total_weight() == doctest::Approx(4.0));
}

TEST_CASE("table policies validate their rows") {
  RowMatrix bad(1, 2);
  bad << 0.7, 0.7;
  CHECK_THROWS_AS(TablePolicy{bad}, ParameterError);
  const TablePolicy det = TablePolicy::deterministic({1, 0}, 2);
  CHECK(det.table()(0, 1) == 1.0);
  CHECK(det.table()(1, 0) == 1.0);
}
