#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "pistam/env.hpp"
#include "pistam/util.hpp"

using namespace pistam;

TEST_CASE("reset draws from Delta deterministically") {
  HandoverEnv env;
  SUBCASE("fixed seed reproduces the initial state") {
    env.reset(123);
    const StateVector a = env.state();
    env.reset(123);
    CHECK(env.state() == a);
  }
  SUBCASE("spawn distance stays inside [0.45, 0.60]") {
    for (int i = 0; i < 1000; ++i) {
      env.reset(static_cast<std::uint64_t>(i));
      const double d = env.state()[kTargetDistance];
      CHECK(d >= 0.45);
      CHECK(d <= 0.60);
    }
  }
  SUBCASE("degenerate interval pins the distance") {
    env.reset_range(0.5, 0.5, 99);
    CHECK(env.state()[kTargetDistance] == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("invalid ranges are rejected") {
    CHECK_THROWS_WITH_AS(env.reset_range(0.6, 0.5, 0), "invalid range",
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(env.reset_range(0.0, 0.5, 0), "invalid range",
                         std::invalid_argument);
  }
}

TEST_CASE("kinematic steps") {
  EnvConfig cfg;
  HandoverEnv env(cfg);
  env.reset_range(0.5, 0.5, 7);

  SUBCASE("body forward moves along the heading") {
    const StateVector before = env.state();
    REQUIRE(before[kBodyHeading] == 0.0);
    env.step(Action::BodyForward);
    const StateVector after = env.state();
    CHECK(after[kBodyX] == doctest::Approx(before[kBodyX] + 0.05).epsilon(1e-12));
    CHECK(after[kBodyY] == doctest::Approx(before[kBodyY]).epsilon(1e-12));
  }
  SUBCASE("hand close then open restores the bit and the pose") {
    const StateVector before = env.state();
    env.step(Action::LeftHandClose);
    CHECK(env.state()[kLeftHandOpen] == 0.0);
    env.step(Action::LeftHandOpen);
    const StateVector after = env.state();
    CHECK(after[kLeftHandOpen] == 1.0);
    for (int i = 0; i < kStateDim; ++i) {
      if (i == kAttentionBit) continue;  // attention may flip stochastically
      CHECK(after[i] == before[i]);
    }
  }
  SUBCASE("a fixed action script is bit-identical across runs") {
    const std::vector<Action> script = {
        Action::BodyForward, Action::HeadUp,       Action::LeftArmForward,
        Action::BodyRotateLeft, Action::RightArmUp, Action::Null,
        Action::HeadLeft,    Action::BodyForward,  Action::RightHandClose,
        Action::BodyBackward};
    HandoverEnv env1(cfg), env2(cfg);
    env1.reset(42);
    env2.reset(42);
    for (Action a : script) {
      env1.step(a);
      env2.step(a);
      CHECK(env1.state() == env2.state());
    }
  }
  SUBCASE("arm offsets are clamped to the reach sphere") {
    for (int i = 0; i < 30; ++i) env.step(Action::LeftArmForward);
    const StateVector s = env.state();
    const double norm = std::sqrt(s[kLeftArmDx] * s[kLeftArmDx] +
                                  s[kLeftArmDy] * s[kLeftArmDy] +
                                  s[kLeftArmDz] * s[kLeftArmDz]);
    CHECK(norm <= cfg.arm_reach_max + 1e-12);
  }
}

TEST_CASE("reward formula") {
  EnvConfig cfg;
  SUBCASE("far, blind, hands open: everything vanishes") {
    StateVector s;
    s[kTargetDistance] = 50.0;
    s[kLeftHandOpen] = 1.0;
    s[kRightHandOpen] = 1.0;
    CHECK(reward_value(s, cfg) < 1e-9);
  }
  SUBCASE("closing a hand early costs exactly the penalty weight") {
    StateVector open;
    open[kTargetVisible] = 1.0;
    open[kImageU] = 0.0;
    open[kImageV] = 0.0;
    open[kLeftHandOpen] = 1.0;
    open[kRightHandOpen] = 1.0;
    open[kTargetDistance] = 0.26;  // just outside grasp range, neither side clamps
    StateVector closed = open;
    closed[kLeftHandOpen] = 0.0;
    const double diff = reward_value(open, cfg) - reward_value(closed, cfg);
    CHECK(std::abs(diff - cfg.w_hand_penalty) < 1e-12);

    // Inside grasp range the penalty does not apply.
    open[kTargetDistance] = 0.2;
    closed[kTargetDistance] = 0.2;
    CHECK(reward_value(open, cfg) == reward_value(closed, cfg));
  }
  SUBCASE("worked value at d = 0.2, centered, hands open") {
    StateVector s;
    s[kTargetDistance] = 0.2;
    s[kTargetVisible] = 1.0;
    s[kImageU] = 0.0;
    s[kImageV] = 0.0;
    s[kLeftHandOpen] = 1.0;
    s[kRightHandOpen] = 1.0;
    CHECK(std::abs(reward_value(s, cfg) - 0.55671) < 1e-4);
    const double oracle = 0.5 * std::exp(-0.2 / 0.3) + 0.3;
    CHECK(reward_value(s, cfg) == doctest::Approx(oracle).epsilon(1e-12));
  }
}

TEST_CASE("snapshot and restore") {
  HandoverEnv env;
  env.reset(5);
  SUBCASE("restore replays the identical trajectory") {
    const Snapshot snap = env.snapshot();
    std::vector<StateVector> first;
    for (int i = 0; i < 5; ++i) {
      env.step(Action::BodyForward);
      first.push_back(env.state());
    }
    env.restore(snap);
    for (int i = 0; i < 5; ++i) {
      env.step(Action::BodyForward);
      CHECK(env.state() == first[static_cast<std::size_t>(i)]);
    }
  }
  SUBCASE("nested snapshots restore independently") {
    const Snapshot outer = env.snapshot();
    env.step(Action::HeadUp);
    const Snapshot inner = env.snapshot();
    env.step(Action::HeadUp);
    env.restore(inner);
    const StateVector at_inner = env.state();
    env.restore(outer);
    env.step(Action::HeadUp);
    CHECK(env.state() == at_inner);
  }
  SUBCASE("random snapshot interleavings against straight-line execution") {
    Rng rng(77);
    for (int rep = 0; rep < 100; ++rep) {
      HandoverEnv a, b;
      const std::uint64_t seed = rng.bits();
      a.reset(seed);
      b.reset(seed);
      // Straight-line on a; on b interleave snapshot/restore detours.
      std::vector<int> script;
      for (int i = 0; i < 10; ++i) script.push_back(rng.uniform_int(kActionCount));
      for (int action : script) a.step(action);
      for (int action : script) {
        if (rng.bernoulli(0.4)) {
          const Snapshot snap = b.snapshot();
          for (int j = 0; j < rng.uniform_int(4); ++j) b.step(rng.uniform_int(kActionCount));
          b.restore(snap);
        }
        b.step(action);
      }
      CHECK(a.state() == b.state());
    }
  }
  SUBCASE("empty token is rejected") {
    CHECK_THROWS_AS(env.restore(Snapshot{}), std::invalid_argument);
  }
}

TEST_CASE("fuzzed invariants: reward bounds and geometric consistency") {
  HandoverEnv env;
  Rng rng(31337);
  env.reset(1);
  const EnvConfig& cfg = env.config();
  for (int step = 0; step < 10000; ++step) {
    if (step % 500 == 0) env.reset(rng.bits());
    env.step(rng.uniform_int(kActionCount));
    const StateVector s = env.state();
    const double r = env.reward();
    CHECK(r >= 0.0);
    CHECK(r <= 1.0);
    const double recomputed =
        std::hypot(s[kBodyX] - cfg.target_x, s[kBodyY] - cfg.target_y);
    CHECK(std::abs(s[kTargetDistance] - recomputed) < 1e-9);
    if (s[kTargetVisible] != 0.0) {
      CHECK(std::abs(s[kImageU]) <= 1.0);
      CHECK(std::abs(s[kImageV]) <= 1.0);
    } else {
      CHECK(s[kImageU] == 0.0);
      CHECK(s[kImageV] == 0.0);
    }
  }
}

TEST_CASE("gaze at the target locks attention") {
  HandoverEnv env;
  env.reset_range(0.5, 0.5, 11);
  // Tilting the head up a few times points the camera at the object, which
  // sits above the camera plane; attention must then latch to 1.
  for (int i = 0; i < 4; ++i) env.step(Action::HeadUp);
  CHECK(env.state()[kAttentionBit] == 1.0);
  env.step(Action::Null);
  CHECK(env.state()[kAttentionBit] == 1.0);
}

TEST_CASE("trajectory CSV rows") {
  std::ostringstream out;
  write_trajectory_header(out);
  HandoverEnv env;
  env.reset(3);
  env.step(Action::BodyForward);
  write_trajectory_row(out, 0, env.state(), Action::BodyForward, env.reward());
  const std::string text = out.str();
  CHECK(text.rfind("t,s0,", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
}
