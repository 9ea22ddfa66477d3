#include <cmath>

#include "copoe/critic.hpp"
#include "copoe/errors.hpp"
#include "copoe/linmdp_env.hpp"
#include "doctest.h"

using namespace copoe;

namespace {

// one state, two actions, phi(0,a) = e_a
LinearMdp one_hot() {
  RowMatrix f = RowMatrix::Identity(2, 2);
  RowMatrix p = RowMatrix::Ones(2, 1);
  return LinearMdp(1, 2, 0.5, f, Vector::Zero(2), p, std::nullopt, 0, "one_hot", 0);
}

Dataset constant_targets(const LinearMdp& m, ActionId a, double g, int n) {
  Dataset data;
  data.bonus_tag = 3;
  for (int i = 0; i < n; ++i) {
    TrajectoryRecord r;
    r.phi1 = m.phi(0, a);
    r.path = {{0, a}};
    r.g_return = g;
    r.length = 1;
    data.records.push_back(r);
  }
  return data;
}

}  // namespace

TEST_CASE("feasible least squares is returned unchanged") {
  const LinearMdp m = one_hot();
  const TablePolicy u = TablePolicy::uniform(1, 2);
  const CriticFit f = fit(constant_targets(m, 0, 3.0, 10), m, u, u, 5.0);
  CHECK(f.w_hat(0) == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(std::abs(f.w_hat(1)) <= 1e-12);
  CHECK(!f.constraint_active);
  CHECK(f.snapshot_id == 3);
}

TEST_CASE("the norm constraint projects onto the ball") {
  const LinearMdp m = one_hot();
  const TablePolicy u = TablePolicy::uniform(1, 2);
  const CriticFit f = fit(constant_targets(m, 0, 3.0, 10), m, u, u, 2.0);
  CHECK(f.constraint_active);
  CHECK(f.w_hat(0) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(f.w_hat.norm() <= 2.0 + 1e-12);
}

TEST_CASE("zero targets give the zero weight") {
  const LinearMdp m = one_hot();
  const TablePolicy u = TablePolicy::uniform(1, 2);
  const CriticFit f = fit(constant_targets(m, 1, 0.0, 4), m, u, u, 1.0);
  CHECK(f.w_hat.norm() == 0.0);
}

TEST_CASE("ball solver matches a polar grid search") {
  Rng rng(11);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::MatrixXd x(30, 2);
    Eigen::VectorXd y(30);
    for (int i = 0; i < 30; ++i) {
      x(i, 0) = g(rng);
      x(i, 1) = 0.3 * g(rng);
      y(i) = 4.0 * x(i, 0) - 7.0 * x(i, 1) + 0.1 * g(rng);
    }
    const double W = 1.5;
    const BallConstrainedLs solver(x.transpose() * x, 0.0);
    const BallLsResult res = solver.solve(x.transpose() * y, W);
    auto loss = [&](const Eigen::VectorXd& w) { return (x * w - y).squaredNorm(); };
    double best = loss(res.w);
    for (int ri = 0; ri <= 300; ++ri)
      for (int ti = 0; ti < 720; ++ti) {
        const double rad = W * ri / 300.0, th = 2.0 * M_PI * ti / 720.0;
        Eigen::VectorXd w(2);
        w << rad * std::cos(th), rad * std::sin(th);
        best = std::min(best, loss(w));
      }
    CHECK(res.w.norm() <= W * (1.0 + 1e-9));
    CHECK(loss(res.w) <= best + 1e-6 * std::max(1.0, best));
  }
}

TEST_CASE("ratio 0.6 / 0.3 on the second step is 2") {
  const LinearMdp m = one_hot();
  RowMatrix t(1, 2), b(1, 2);
  t << 0.6, 0.4;
  b << 0.3, 0.7;
  const TablePolicy target(t), behavior(b);
  // the first pair is fixed, so only the second contributes
  CHECK(importance_ratio(m, {{0, 1}, {0, 0}}, target, behavior) == doctest::Approx(2.0));
  CHECK(importance_ratio(m, {{0, 1}}, target, behavior) == 1.0);
}

TEST_CASE("zero behavior probability on a stored action throws") {
  const LinearMdp m = one_hot();
  const TablePolicy target = TablePolicy::uniform(1, 2);
  const TablePolicy behavior = TablePolicy::deterministic({0}, 2);
  CHECK_THROWS_AS(importance_ratio(m, {{0, 0}, {0, 1}}, target, behavior), DegenerateSupportError);
}

TEST_CASE("ratio diagnostics and clipping count") {
  const LinearMdp m = one_hot();
  RowMatrix t(1, 2), b(1, 2);
  t << 0.9, 0.1;
  b << 0.3, 0.7;
  Dataset data = constant_targets(m, 0, 1.0, 3);
  for (auto& r : data.records) r.path.push_back({0, 0});
  CriticOptions opt;
  opt.ratio_cap = 2.0;
  const CriticFit f = fit(data, m, TablePolicy(b), TablePolicy(t), 10.0, opt);
  CHECK(f.max_ratio == doctest::Approx(3.0));
  CHECK(f.ratios_above_two == 3);
  CHECK(f.would_clip == 3);
  CHECK(f.w_hat(0) == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("q_hat adds half the bonus on known pairs and checks snapshot ids") {
  const LinearMdp m = one_hot();
  const TablePolicy u = TablePolicy::uniform(1, 2);
  const CriticFit f = fit(constant_targets(m, 0, 3.0, 10), m, u, u, 5.0);
  const auto same = GeometrySnapshot::all_known(m, 3);
  CHECK(q_hat(f, *same, m, 0, 0) == doctest::Approx(3.0).epsilon(1e-8));
  const auto other = GeometrySnapshot::all_known(m, 4);
  CHECK_THROWS_AS(q_hat(f, *other, m, 0, 0), ConsistencyError);

  CovarianceState st = init_covariance(2, 1.0);
  for (int i = 0; i < 100; ++i) st.rank1_update(m.phi(0, 0));
  for (int i = 0; i < 100; ++i) st.rank1_update(m.phi(0, 1));
  const GeometrySnapshot snap(st, m, BonusParams(1.0, 0.5), 3);
  REQUIRE(snap.known_state(0));
  CHECK(q_hat(f, snap, m, 0, 0) == doctest::Approx(3.0 + snap.bonus_phi(0, 0)).epsilon(1e-8));
  CHECK(snap.bonus(0, 0) == doctest::Approx(2.0 * snap.bonus_phi(0, 0)));
}

TEST_CASE("fit rejects empty data and bad caps") {
  const LinearMdp m = one_hot();
  const TablePolicy u = TablePolicy::uniform(1, 2);
  CHECK_THROWS_AS(fit(Dataset{}, m, u, u, 1.0), ParameterError);
  CHECK_THROWS_AS(fit(constant_targets(m, 0, 1.0, 2), m, u, u, 0.0), ParameterError);
  const Dataset d = constant_targets(m, 0, 1.0, 2);
  const CriticDesign design(d, 2);
  CHECK_THROWS_AS(fit(design, constant_targets(m, 0, 1.0, 3), m, u, u, 1.0), ConsistencyError);
}
