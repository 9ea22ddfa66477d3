#include <cmath>
#include <sstream>

#include "copoe/errors.hpp"
#include "copoe/linmdp_env.hpp"
#include "copoe/oracle_eval.hpp"
#include "copoe/rollout.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace copoe;

TEST_CASE("geometric draws have mean 1 / (1 - gamma)") {
  Rng rng(3);
  const double gamma = 0.8;
  const int n = 40000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = sample_geometric(gamma, rng, 100000).value;
    sum += v;
    sq += v * v;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sq / n - mean * mean);
  CHECK(std::abs(mean - 5.0) <= 3.0 * sd / std::sqrt(n));
  CHECK(sample_geometric(0.0, rng, 10).value == 1);
}

TEST_CASE("geometric draws clamp at t_max and flag it") {
  Rng rng(4);
  bool seen = false;
  for (int i = 0; i < 1000; ++i) {
    const GeometricDraw g = sample_geometric(0.99, rng, 3);
    CHECK(g.value <= 3);
    seen |= g.truncated;
  }
  CHECK(seen);
  CHECK_THROWS_AS(sample_geometric(1.0, rng, 3), ParameterError);
}

TEST_CASE("default t_max formula") {
  CHECK(default_t_max(10, 4, 0.1, 0.9) ==
        static_cast<int>(std::ceil(std::log(16.0 * 100 * 4 / 0.1) / 0.1)));
}

TEST_CASE("returns: one-step and longer records") {
  const LinearMdp m = make_comb_lock(3, 0.5, 0);
  const auto snap = GeometrySnapshot::all_known(m);
  const TablePolicy uniform = TablePolicy::uniform(m.num_states(), m.num_actions());
  Rng rng(5);
  int ones = 0, longer = 0;
  for (int i = 0; i < 200; ++i) {
    const TrajectoryRecord rec = rollout_from(m, {0, 0}, uniform, *snap, rng, 50);
    CHECK(rec.path.size() == static_cast<std::size_t>(rec.length));
    CHECK(rec.path.front() == StateAction{0, 0});
    const StateAction last = rec.path.back();
    const double expected = (rec.length == 1 ? m.reward(0, 0) : m.reward(last.state, last.action)) / 0.5;
    CHECK(rec.g_return == doctest::Approx(expected));
    (rec.length == 1 ? ones : longer)++;
  }
  CHECK(ones > 0);
  CHECK(longer > 0);
}

TEST_CASE("continuation returns estimate Q of the evaluation policy") {
  const LinearMdp m = make_random_linear_mdp(4, 2, 3, 0.7, 13);
  const auto snap = GeometrySnapshot::all_known(m);
  const TablePolicy uniform = TablePolicy::uniform(4, 2);
  const ValueTable q = exact_q(m, uniform);
  Rng rng(6);
  const int n = 20000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = rollout_from(m, {2, 1}, uniform, *snap, rng, 1000).g_return;
    sum += g;
    sq += g * g;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sq / n - mean * mean) / n);
  CHECK(std::abs(mean - q.q_at(m, 2, 1)) <= 3.0 * se);
}

TEST_CASE("feature sampler draws from the discounted occupancy") {
  const LinearMdp m = make_random_linear_mdp(3, 2, 2, 0.6, 17);
  const TablePolicy uniform = TablePolicy::uniform(3, 2);
  const Vector occ = occupancy(m, uniform, m.start_state()).dist;
  Rng rng(8);
  const int n = 30000;
  Vector counts = Vector::Zero(6);
  for (int i = 0; i < n; ++i) {
    const FeatureSample f = feature_sampler(m, uniform, rng, 1000);
    counts(m.pair_index(f.pair.state, f.pair.action)) += 1.0;
    CHECK(f.env_steps == f.tau - 1);
  }
  for (int i = 0; i < 6; ++i) {
    const double se = std::sqrt(occ(i) * (1.0 - occ(i)) / n);
    CHECK(std::abs(counts(i) / n - occ(i)) <= 3.5 * se + 1e-12);
  }
}

TEST_CASE("monte carlo datasets are reproducible and dump as json lines") {
  const LinearMdp m = make_random_linear_mdp(4, 2, 3, 0.7, 1);
  const auto snap = GeometrySnapshot::all_known(m, 9);
  const TablePolicy uniform = TablePolicy::uniform(4, 2);
  MixturePolicy cover;
  cover.add(std::make_shared<TablePolicy>(uniform));
  Rng a(10), b(10);
  MonteCarloOptions opt;
  opt.behavior_tag = "test";
  const Dataset d1 = monte_carlo(m, cover, uniform, *snap, 30, a, opt);
  const Dataset d2 = monte_carlo(m, cover, uniform, *snap, 30, b, opt);
  REQUIRE(d1.records.size() == 30);
  CHECK(d1.bonus_tag == 9);
  CHECK(d1.env_steps == d2.env_steps);
  for (std::size_t i = 0; i < 30; ++i) CHECK(d1.records[i].g_return == d2.records[i].g_return);
  std::ostringstream out;
  write_dataset_jsonl(d1, out);
  std::istringstream in(out.str());
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.at("g").get<double>() == d1.records[static_cast<std::size_t>(lines)].g_return);
    ++lines;
  }
  CHECK(lines == 30);
}
