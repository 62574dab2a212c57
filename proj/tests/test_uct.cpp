#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "pistam/env.hpp"
#include "pistam/uct.hpp"
#include "pistam/util.hpp"
#include "toy_sim.hpp"

using namespace pistam;
using pistam::testing::FlakySim;
using pistam::testing::ToySim;

namespace {

// Chain world with a single action: 0 -> 1 -> 2 -> ... (absorbing tail).
ToySim chain_world(int length) {
  std::vector<std::vector<int>> next;
  std::vector<double> reward;
  for (int i = 0; i < length; ++i) {
    next.push_back({std::min(i + 1, length - 1)});
    reward.push_back(static_cast<double>(i) / length);
  }
  return ToySim(std::move(next), std::move(reward));
}

}  // namespace

TEST_CASE("ucb_score") {
  CHECK(ucb_score(0.3, 0, 0, 1.0) == std::numeric_limits<double>::infinity());
  CHECK(ucb_score(0.5, 1, 1, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
  const double oracle = 0.2 + 2.0 * std::sqrt(std::log(10.0) / 2.0);
  CHECK(ucb_score(0.2, 2, 10, 2.0) == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(oracle == doctest::Approx(2.3459).epsilon(1e-4));
}

TEST_CASE("single legal action: labels carry it, evaluations are K*H") {
  ToySim env = chain_world(8);
  SearchConfig cfg;
  cfg.horizon = 4;
  cfg.simulations = 16;
  cfg.epsilon = 0.0;
  const SearchResult r = uct_search(env, nullptr, cfg);
  REQUIRE(r.labels.size() == 4);
  for (const auto& [s, a] : r.labels) CHECK(index(a) == 0);
  CHECK(r.stats.evals_total ==
        static_cast<std::uint64_t>(cfg.simulations) * static_cast<std::uint64_t>(cfg.horizon));
  CHECK(r.stats.visits == r.stats.evals_total);  // one candidate per visit
  CHECK(r.stats.root_visits == static_cast<std::uint64_t>(cfg.simulations));
}

TEST_CASE("depth-1 bandit picks the rewarding arm") {
  // States: 0 start, 1 reward 1.0, 2 reward 0.0; two actions.
  ToySim env({{1, 2}, {1, 1}, {2, 2}}, {0.0, 1.0, 0.0});
  SearchConfig cfg;
  cfg.horizon = 1;
  cfg.simulations = 16;
  cfg.exploration = 1.41;
  cfg.epsilon = 0.0;
  const SearchResult r = uct_search(env, nullptr, cfg);
  REQUIRE(r.labels.size() == 1);
  // Exhaustive depth-1 oracle: argmax over actions of the leaf reward.
  CHECK(r.labels[0].second == action_at(0));
}

TEST_CASE("baseline mode on the 27-action environment evaluates all actions at every node") {
  HandoverEnv env;
  env.reset(3);
  SearchConfig cfg;
  cfg.horizon = 3;
  cfg.simulations = 8;
  const SearchResult r = uct_search(env, nullptr, cfg);
  CHECK(r.stats.evals_total == r.stats.visits * 27);
  CHECK(r.stats.mean_evals_per_visit() == doctest::Approx(27.0));
  CHECK(r.stats.evals_random == 0);
}

TEST_CASE("search restores the environment to its entry state") {
  HandoverEnv env;
  env.reset(9);
  const StateVector before = env.state();
  SearchConfig cfg;
  cfg.simulations = 4;
  cfg.horizon = 2;
  (void)uct_search(env, nullptr, cfg);
  CHECK(env.state() == before);
}

TEST_CASE("determinism: fixed seed and environment give identical results") {
  HandoverEnv env;
  env.reset(11);
  LabeledDataset d(0.05);
  Rng rng(2);
  for (int i = 0; i < 40; ++i) {
    StateVector s;
    s[kBodyX] = rng.uniform(-0.6, 0.0);
    s[kBodyY] = rng.uniform(-0.3, 0.3);
    s[kTargetDistance] = std::hypot(s[kBodyX], s[kBodyY]);
    s[kLeftHandOpen] = s[kRightHandOpen] = 1.0;
    s[kAttentionBit] = rng.bernoulli(0.5);
    d.insert(s, action_at(rng.uniform_int(kActionCount)));
  }
  const AffordanceSignature sig = fit_signatures(d, 2, 5);
  SearchConfig cfg;
  cfg.simulations = 24;
  cfg.seed = 77;

  env.reset(11);
  const SearchResult r1 = uct_search(env, &sig, cfg);
  env.reset(11);
  const SearchResult r2 = uct_search(env, &sig, cfg);
  REQUIRE(r1.labels.size() == r2.labels.size());
  for (std::size_t i = 0; i < r1.labels.size(); ++i) {
    CHECK(r1.labels[i].first == r2.labels[i].first);
    CHECK(r1.labels[i].second == r2.labels[i].second);
  }
  CHECK(r1.stats.evals_total == r2.stats.evals_total);
  CHECK(r1.stats.evals_random == r2.stats.evals_random);
  CHECK(r1.stats.nodes_created == r2.stats.nodes_created);

  SUBCASE("affordance gating narrows the branching") {
    CHECK(r1.stats.mean_evals_per_visit() < 27.0);
    CHECK(r1.stats.evals_total >= r1.stats.visits);  // at least one candidate each
  }
}

TEST_CASE("aborted episodes are tolerated, counted, and bounded") {
  SUBCASE("occasional failures") {
    FlakySim env(std::make_unique<ToySim>(chain_world(8)), 23);
    SearchConfig cfg;
    cfg.horizon = 3;
    cfg.simulations = 12;
    const SearchResult r = uct_search(env, nullptr, cfg);
    CHECK(r.stats.aborted_episodes > 0);
    CHECK(r.stats.aborted_episodes < 12);
    CHECK(r.stats.root_visits + r.stats.aborted_episodes ==
          static_cast<std::uint64_t>(cfg.simulations));
  }
  SUBCASE("total failure propagates") {
    FlakySim env(std::make_unique<ToySim>(chain_world(8)), 1);
    SearchConfig cfg;
    cfg.simulations = 4;
    CHECK_THROWS_AS((void)uct_search(env, nullptr, cfg), std::runtime_error);
  }
}

TEST_CASE("worker mode conserves visit counts") {
  HandoverEnv env;
  env.reset(21);
  SearchConfig cfg;
  cfg.simulations = 32;
  cfg.horizon = 3;
  cfg.workers = 2;
  const SearchResult r = uct_search(env, nullptr, cfg);
  CHECK(r.stats.root_visits == static_cast<std::uint64_t>(cfg.simulations));
  CHECK(r.labels.size() >= 1);
}

TEST_CASE("rho-merge flag keeps conservation") {
  HandoverEnv env;
  env.reset(2);
  SearchConfig cfg;
  cfg.simulations = 16;
  cfg.horizon = 3;
  cfg.rho_merge_paths = true;
  const SearchResult r = uct_search(env, nullptr, cfg);
  CHECK(r.stats.root_visits == static_cast<std::uint64_t>(cfg.simulations));
}
