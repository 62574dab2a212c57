#pragma once

#include <any>
#include <cstdint>
#include <memory>

#include "pistam/mdp.hpp"

namespace pistam {

// Opaque restore token. Only the simulator type that produced it can
// interpret the payload; restoring a foreign or empty token is an error.
class Snapshot {
 public:
  Snapshot() = default;

  template <typename T>
  static Snapshot of(T payload) {
    Snapshot s;
    s.payload_ = std::move(payload);
    return s;
  }

  template <typename T>
  const T* get() const {
    return std::any_cast<T>(&payload_);
  }

  bool empty() const { return !payload_.has_value(); }

 private:
  std::any payload_;
};

// Deterministic, seedable, snapshot/restorable world model. Instances are
// independently owned; an instance must never be stepped concurrently.
class Simulator {
 public:
  virtual ~Simulator() = default;

  virtual int action_count() const = 0;
  virtual void reset(std::uint64_t seed) = 0;
  virtual StateVector state() const = 0;

  // R(current state), bounded in [0, 1].
  virtual double reward() const = 0;

  virtual void step(int action) = 0;

  virtual Snapshot snapshot() const = 0;
  // Throws std::invalid_argument on an empty or foreign token.
  virtual void restore(const Snapshot& token) = 0;

  virtual std::unique_ptr<Simulator> clone() const = 0;
};

}  // namespace pistam
