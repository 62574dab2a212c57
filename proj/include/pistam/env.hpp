#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>

#include "pistam/sim.hpp"
#include "pistam/util.hpp"

namespace pistam {

// Planar desk-scale handover world. Every numeric default below is an
// experiment knob; the acceptance runs use these values unchanged.
struct EnvConfig {
  double step_translate = 0.05;   // meters per body translation action
  double step_rotate = 0.1745;    // radians per body rotation action
  double step_arm = 0.04;         // meters per arm action
  double step_head = 0.1745;      // radians per head action
  double arm_reach_max = 0.30;    // end-effector offset clamp (sphere)
  double target_x = 0.0;          // object held by the human, world frame
  double target_y = 0.0;
  double target_z = 0.45;
  double grasp_distance = 0.25;   // d_grasp
  double camera_fov = 1.047;      // full opening angle, radians
  double attention_flip_prob = 0.05;
  double w_dist = 0.5;
  double w_center = 0.3;
  double w_hand_penalty = 0.4;
  double dist_scale = 0.3;        // sigma_d in the distance term
  bool social_rule_enabled = false;
  double delta_min = 0.45;        // initial-distance distribution Delta
  double delta_max = 0.60;

  void validate() const;  // throws std::invalid_argument
};

// Fixed kinematic constants (not experiment knobs).
inline constexpr double kCameraHeight = 0.08;    // keeps the target out of view
                                                 // at spawn until the head tilts up
inline constexpr double kShoulderHeight = 0.30;
inline constexpr double kShoulderLateral = 0.07;
inline constexpr double kHeadPanLimit = 2.09;
inline constexpr double kHeadTiltMin = -0.5;
inline constexpr double kHeadTiltMax = 1.0;
inline constexpr double kWorkspaceLimit = 1.2;   // |body_x|, |body_y| clamp
inline constexpr double kGazeLockAngle = 0.2;    // eye contact by gaze rule

// r = clamp_[0,1]( w_dist * exp(-d / sigma_d) + w_center * c - w_hand * p )
// with c the centering score when the target is visible and p the
// closed-hand-too-early penalty flag.
double reward_value(const StateVector& s, const EnvConfig& cfg);

class HandoverEnv final : public Simulator {
 public:
  explicit HandoverEnv(EnvConfig cfg = {});

  int action_count() const override { return kActionCount; }

  // Draws from Delta: agent placed directly in front of the target at a
  // uniform distance in [delta_min, delta_max], heading toward it, arms at
  // rest, hands open, head centered, attention bit fair-coin.
  void reset(std::uint64_t seed) override;
  void reset_range(double delta_min, double delta_max, std::uint64_t seed);

  StateVector state() const override;
  double reward() const override;
  void step(int action) override;
  void step(Action a) { step(index(a)); }

  Snapshot snapshot() const override;
  void restore(const Snapshot& token) override;
  std::unique_ptr<Simulator> clone() const override;

  // Evaluation-side success flag: a hand is closed within grasp range, the
  // matching end effector is within 0.10 m of the object and, when the
  // social rule is on, the partner is paying attention.
  bool success() const;

  const EnvConfig& config() const { return cfg_; }

  struct SimState {
    double body_x = 0.0, body_y = 0.0, heading = 0.0;
    double pan = 0.0, tilt = 0.0;
    double larm[3] = {0.0, 0.0, 0.0};
    double rarm[3] = {0.0, 0.0, 0.0};
    bool left_hand_open = true, right_hand_open = true;
    bool attention = false;
    Rng rng;  // attention-dynamics stream; part of the snapshot
  };

 private:
  EnvConfig cfg_;
  SimState st_;
};

void write_trajectory_header(std::ostream& out);
void write_trajectory_row(std::ostream& out, int t, const StateVector& s, Action a,
                          double reward);

}  // namespace pistam
