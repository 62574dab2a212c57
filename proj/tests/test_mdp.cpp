#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "pistam/mdp.hpp"
#include "pistam/util.hpp"

using namespace pistam;

namespace {

StateVector state_with(int dim, double value) {
  StateVector s;
  s[dim] = value;
  return s;
}

StateVector random_state(Rng& rng) {
  const StateBounds& b = StateBounds::defaults();
  StateVector s;
  for (int i = 0; i < kStateDim; ++i) {
    if (kBitField[static_cast<std::size_t>(i)]) {
      s[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
    } else {
      s[i] = rng.uniform(b.lo[static_cast<std::size_t>(i)], b.hi[static_cast<std::size_t>(i)]);
    }
  }
  return s;
}

}  // namespace

TEST_CASE("action enumeration is fixed") {
  CHECK(index(Action::HeadLeft) == 0);
  CHECK(index(Action::BodyForward) == 4);
  CHECK(index(Action::LeftArmForward) == 10);
  CHECK(index(Action::RightArmForward) == 16);
  CHECK(index(Action::LeftHandClose) == 22);
  CHECK(index(Action::Null) == 26);
  CHECK(action_name(Action::Null) == "null");
  CHECK(action_from_name("body_forward") == Action::BodyForward);
  CHECK(action_from_name("16") == Action::RightArmForward);
  CHECK(!action_from_name("no_such_action").has_value());
  CHECK_THROWS_AS(action_at(27), std::out_of_range);
}

TEST_CASE("normalize_state maps affinely onto [0, 1]") {
  StateBounds b = StateBounds::defaults();
  b.lo[kBodyX] = 0.0;
  b.hi[kBodyX] = 2.0;

  SUBCASE("midpoint") {
    const StateVector n = normalize_state(state_with(kBodyX, 1.0), b);
    CHECK(n[kBodyX] == doctest::Approx(0.5).epsilon(1e-15));
  }
  SUBCASE("lower bound") {
    const StateVector n = normalize_state(state_with(kBodyX, 0.0), b);
    CHECK(n[kBodyX] == 0.0);
  }
  SUBCASE("full vector against the per-dimension affine formula") {
    Rng rng(7);
    for (int rep = 0; rep < 20; ++rep) {
      const StateVector s = random_state(rng);
      const StateVector n = normalize_state(s, StateBounds::defaults());
      const StateBounds& db = StateBounds::defaults();
      for (int i = 0; i < kStateDim; ++i) {
        const auto k = static_cast<std::size_t>(i);
        const double expected =
            kBitField[k] ? s[i] : (s[i] - db.lo[k]) / (db.hi[k] - db.lo[k]);
        CHECK(std::abs(n[i] - expected) < 1e-12);
      }
    }
  }
  SUBCASE("bit fields pass through") {
    StateVector s = state_with(kAttentionBit, 1.0);
    const StateVector n = normalize_state(s, StateBounds::defaults());
    CHECK(n[kAttentionBit] == 1.0);
  }
  SUBCASE("non-finite input is rejected") {
    StateVector s;
    s[kBodyY] = std::nan("");
    CHECK_THROWS_WITH_AS(normalize_state(s, b), "invalid state", std::invalid_argument);
  }
}

TEST_CASE("states_equal is a strict L-inf comparison") {
  const StateVector a = state_with(kBodyX, 0.5);
  SUBCASE("identical states are equal for any rho > 0") {
    CHECK(states_equal(a, a, 1e-9));
  }
  SUBCASE("a 0.10 gap in one dimension defeats rho = 0.05") {
    StateVector b2 = a;
    b2[kBodyX] += 0.10;
    CHECK(!states_equal(a, b2, 0.05));
  }
  SUBCASE("rho = 0 makes even identical states unequal") {
    CHECK(!states_equal(a, a, 0.0));
  }
  SUBCASE("symmetric and reflexive for random pairs") {
    Rng rng(11);
    for (int rep = 0; rep < 200; ++rep) {
      const StateVector x = random_state(rng);
      const StateVector y = random_state(rng);
      const double rho = rng.uniform(0.001, 0.5);
      CHECK(states_equal(x, y, rho) == states_equal(y, x, rho));
      CHECK(states_equal(x, x, rho));
    }
  }
}

TEST_CASE("dataset insert keeps newest label for rho-equal states") {
  LabeledDataset d(0.05);
  StateVector s = state_with(kBodyX, 0.3);
  d.insert(s, Action::HeadLeft);
  StateVector s2 = s;
  s2[kBodyX] += 0.001;  // rho-equal after normalization
  d.insert(s2, Action::BodyForward);
  REQUIRE(d.size() == 1);
  CHECK(d[0].second == Action::BodyForward);
  CHECK(d[0].first == s2);
}

TEST_CASE("dataset_aggregate follows the new-label-wins rule") {
  SUBCASE("rho-equal replacement") {
    LabeledDataset d(0.05);
    d.insert(state_with(kBodyX, 0.3), Action::HeadLeft);
    LabeledDataset d_new(0.05);
    StateVector s2 = state_with(kBodyX, 0.3);
    s2[kBodyY] = 0.01;
    d_new.insert(s2, Action::BodyForward);
    const LabeledDataset out = dataset_aggregate(d, d_new);
    REQUIRE(out.size() == 1);
    CHECK(out[0].second == Action::BodyForward);
    CHECK(out[0].first == s2);
  }
  SUBCASE("empty d_new is the identity") {
    LabeledDataset d(0.05);
    d.insert(state_with(kBodyX, 0.1), Action::Null);
    d.insert(state_with(kBodyX, 0.9), Action::HeadUp);
    const LabeledDataset out = dataset_aggregate(d, LabeledDataset(0.05));
    REQUIRE(out.size() == d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
      CHECK(out[i].first == d[i].first);
      CHECK(out[i].second == d[i].second);
    }
  }
  SUBCASE("d_new deduplicates internally, last occurrence wins") {
    LabeledDataset d_new(0.05);
    const StateVector s = state_with(kBodyX, 0.42);
    StateVector s_close = s;
    s_close[kBodyX] += 0.002;
    d_new.insert(s, Action::HeadLeft);       // a1
    d_new.insert(s_close, Action::HeadUp);   // a2, rho-equal to s
    const LabeledDataset out = dataset_aggregate(LabeledDataset(0.05), d_new);

    // Brute-force oracle over the raw insertion list: scan from the end and
    // keep each pair whose state is not rho-equal to an already-kept state.
    const std::vector<std::pair<StateVector, Action>> raw = {
        {s, Action::HeadLeft}, {s_close, Action::HeadUp}};
    std::vector<std::pair<StateVector, Action>> kept;
    for (auto it = raw.rbegin(); it != raw.rend(); ++it) {
      const StateVector n = normalize_state(it->first, StateBounds::defaults());
      bool dup = false;
      for (const auto& k : kept) {
        dup |= states_equal(normalize_state(k.first, StateBounds::defaults()), n, 0.05);
      }
      if (!dup) kept.push_back(*it);
    }
    REQUIRE(out.size() == kept.size());
    CHECK(out[0].second == kept[0].second);
    CHECK(out[0].second == Action::HeadUp);
  }
  SUBCASE("threshold mismatch is an error") {
    CHECK_THROWS_WITH_AS(dataset_aggregate(LabeledDataset(0.05), LabeledDataset(0.1)),
                         "threshold mismatch", std::runtime_error);
  }
}

TEST_CASE("aggregation properties: no rho-equal survivors, size bound, idempotence") {
  Rng rng(23);
  for (int rep = 0; rep < 30; ++rep) {
    LabeledDataset d(0.05);
    LabeledDataset d_new(0.05);
    const int nd = 1 + rng.uniform_int(12);
    const int nn = 1 + rng.uniform_int(12);
    for (int i = 0; i < nd; ++i) {
      d.insert(random_state(rng), action_at(rng.uniform_int(kActionCount)));
    }
    for (int i = 0; i < nn; ++i) {
      d_new.insert(random_state(rng), action_at(rng.uniform_int(kActionCount)));
    }
    const LabeledDataset once = dataset_aggregate(d, d_new);
    CHECK(once.size() <= d.size() + d_new.size());
    for (std::size_t i = 0; i < once.size(); ++i) {
      const StateVector ni = normalize_state(once[i].first, once.bounds());
      for (std::size_t j = i + 1; j < once.size(); ++j) {
        const StateVector nj = normalize_state(once[j].first, once.bounds());
        CHECK(!states_equal(ni, nj, once.rho()));
      }
    }
    const LabeledDataset twice = dataset_aggregate(once, d_new);
    REQUIRE(twice.size() == once.size());
    for (std::size_t i = 0; i < once.size(); ++i) {
      CHECK(twice[i].first == once[i].first);
      CHECK(twice[i].second == once[i].second);
    }
  }
}

TEST_CASE("dataset CSV round-trip") {
  const std::string path =
      (std::filesystem::temp_directory_path() / "pistam_test_dataset.csv").string();
  LabeledDataset d(0.05);
  Rng rng(5);
  for (int i = 0; i < 25; ++i) {
    d.insert(random_state(rng), action_at(rng.uniform_int(kActionCount)));
  }
  save_dataset_csv(d, path);
  const LabeledDataset back = load_dataset_csv(path);
  REQUIRE(back.size() == d.size());
  CHECK(back.rho() == d.rho());
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(back[i].first == d[i].first);  // %.17g is exact for doubles
    CHECK(back[i].second == d[i].second);
  }
  std::filesystem::remove(path);
}
