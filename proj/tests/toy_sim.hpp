#pragma once

#include <memory>
#include <stdexcept>
#include <vector>

#include "pistam/sim.hpp"

namespace pistam::testing {

// Table-driven deterministic MDP for search tests: states are integers,
// rewards attach to states, transitions are explicit. State id is exposed in
// dimension 0 of the StateVector (well separated under the default bounds).
class ToySim final : public Simulator {
 public:
  ToySim(std::vector<std::vector<int>> next, std::vector<double> reward, int start = 0)
      : next_(std::move(next)), reward_(std::move(reward)), start_(start), cur_(start) {}

  int action_count() const override { return static_cast<int>(next_.front().size()); }
  void reset(std::uint64_t) override { cur_ = start_; }

  StateVector state() const override {
    StateVector s;
    s[0] = static_cast<double>(cur_);
    return s;
  }

  double reward() const override { return reward_[static_cast<std::size_t>(cur_)]; }

  void step(int action) override {
    cur_ = next_[static_cast<std::size_t>(cur_)][static_cast<std::size_t>(action)];
  }

  Snapshot snapshot() const override { return Snapshot::of(cur_); }

  void restore(const Snapshot& token) override {
    const int* v = token.get<int>();
    if (!v) throw std::invalid_argument("invalid snapshot token");
    cur_ = *v;
  }

  std::unique_ptr<Simulator> clone() const override {
    auto copy = std::make_unique<ToySim>(next_, reward_, start_);
    copy->cur_ = cur_;
    return copy;
  }

  int current() const { return cur_; }

 private:
  std::vector<std::vector<int>> next_;
  std::vector<double> reward_;
  int start_;
  int cur_;
};

// Wraps a simulator and throws on selected step() invocations.
class FlakySim final : public Simulator {
 public:
  FlakySim(std::unique_ptr<Simulator> inner, int fail_every)
      : inner_(std::move(inner)), fail_every_(fail_every) {}

  int action_count() const override { return inner_->action_count(); }
  void reset(std::uint64_t seed) override { inner_->reset(seed); }
  StateVector state() const override { return inner_->state(); }
  double reward() const override { return inner_->reward(); }

  void step(int action) override {
    ++calls_;
    if (fail_every_ > 0 && calls_ % fail_every_ == 0) {
      throw std::runtime_error("injected simulator failure");
    }
    inner_->step(action);
  }

  Snapshot snapshot() const override { return inner_->snapshot(); }
  void restore(const Snapshot& token) override { inner_->restore(token); }

  std::unique_ptr<Simulator> clone() const override {
    return std::make_unique<FlakySim>(inner_->clone(), fail_every_);
  }

 private:
  std::unique_ptr<Simulator> inner_;
  int fail_every_;
  int calls_ = 0;
};

}  // namespace pistam::testing
