#include "pistam/env.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace pistam {

namespace {

constexpr double kPi = 3.14159265358979323846;

constexpr std::uint64_t kTagReset = tag_hash("env-reset");
constexpr std::uint64_t kTagDynamics = tag_hash("env-dynamics");

double wrap_angle(double a) {
  while (a > kPi) a -= 2.0 * kPi;
  while (a <= -kPi) a += 2.0 * kPi;
  return a;
}

struct Camera {
  double yaw_err;    // target bearing minus camera yaw
  double pitch_err;  // target elevation minus camera tilt
  bool defined;      // false when the body sits on the target
};

Camera camera_errors(const HandoverEnv::SimState& st, const EnvConfig& cfg) {
  const double dx = cfg.target_x - st.body_x;
  const double dy = cfg.target_y - st.body_y;
  const double planar = std::hypot(dx, dy);
  if (planar < 1e-9) return {0.0, 0.0, false};
  const double bearing = std::atan2(dy, dx);
  const double elevation = std::atan2(cfg.target_z - kCameraHeight, planar);
  return {wrap_angle(bearing - (st.heading + st.pan)), elevation - st.tilt, true};
}

// Angle between the camera optical axis and the ray to the partner's face
// (taken to be at the object). Used by the eye-contact-by-gaze rule.
double gaze_angle(const HandoverEnv::SimState& st, const EnvConfig& cfg) {
  const Camera cam = camera_errors(st, cfg);
  if (!cam.defined) return kPi;
  // Small-angle composition is not enough near the fov edge; use the exact
  // spherical angle between the two directions.
  const double cosang = std::cos(cam.yaw_err) * std::cos(cam.pitch_err);
  return std::acos(std::clamp(cosang, -1.0, 1.0));
}

void clamp_arm(double arm[3], double reach) {
  const double norm = std::sqrt(arm[0] * arm[0] + arm[1] * arm[1] + arm[2] * arm[2]);
  if (norm > reach) {
    const double s = reach / norm;
    arm[0] *= s;
    arm[1] *= s;
    arm[2] *= s;
  }
}

}  // namespace

void EnvConfig::validate() const {
  if (step_translate <= 0 || step_rotate <= 0 || step_arm <= 0 || step_head <= 0) {
    throw std::invalid_argument("step sizes must be > 0");
  }
  if (arm_reach_max <= 0) throw std::invalid_argument("arm_reach_max must be > 0");
  if (grasp_distance <= 0) throw std::invalid_argument("grasp_distance must be > 0");
  if (camera_fov <= 0 || camera_fov >= kPi) {
    throw std::invalid_argument("camera_fov must be in (0, pi)");
  }
  if (attention_flip_prob < 0 || attention_flip_prob > 1) {
    throw std::invalid_argument("attention_flip_prob must be in [0, 1]");
  }
  if (w_dist < 0 || w_center < 0 || w_hand_penalty < 0) {
    throw std::invalid_argument("reward weights must be >= 0");
  }
  if (dist_scale <= 0) throw std::invalid_argument("dist_scale must be > 0");
  if (!(delta_min > 0) || delta_min > delta_max) {
    throw std::invalid_argument("invalid range");
  }
}

double reward_value(const StateVector& s, const EnvConfig& cfg) {
  const double d = s[kTargetDistance];
  const double centering =
      s[kTargetVisible] != 0.0
          ? 1.0 - (std::abs(s[kImageU]) + std::abs(s[kImageV])) / 2.0
          : 0.0;
  const bool hand_closed = s[kLeftHandOpen] == 0.0 || s[kRightHandOpen] == 0.0;
  const double penalty = (hand_closed && d > cfg.grasp_distance) ? 1.0 : 0.0;
  const double r = cfg.w_dist * std::exp(-d / cfg.dist_scale) + cfg.w_center * centering -
                   cfg.w_hand_penalty * penalty;
  return std::clamp(r, 0.0, 1.0);
}

HandoverEnv::HandoverEnv(EnvConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  reset(0);
}

void HandoverEnv::reset(std::uint64_t seed) {
  reset_range(cfg_.delta_min, cfg_.delta_max, seed);
}

void HandoverEnv::reset_range(double delta_min, double delta_max, std::uint64_t seed) {
  if (!(delta_min > 0) || delta_min > delta_max) {
    throw std::invalid_argument("invalid range");
  }
  Rng draw(derive_seed(seed, kTagReset));
  const double d = delta_min + (delta_max - delta_min) * draw.uniform();
  st_ = SimState{};
  st_.body_x = cfg_.target_x - d;
  st_.body_y = cfg_.target_y;
  st_.heading = 0.0;  // facing the target
  st_.larm[0] = 0.05;
  st_.larm[1] = 0.05;
  st_.larm[2] = -0.20;
  st_.rarm[0] = 0.05;
  st_.rarm[1] = -0.05;
  st_.rarm[2] = -0.20;
  st_.attention = draw.bernoulli(0.5);
  st_.rng = Rng(derive_seed(seed, kTagDynamics));
}

StateVector HandoverEnv::state() const {
  StateVector s;
  s[kBodyX] = st_.body_x;
  s[kBodyY] = st_.body_y;
  s[kBodyHeading] = st_.heading;
  s[kHeadPan] = st_.pan;
  s[kHeadTilt] = st_.tilt;
  s[kLeftArmDx] = st_.larm[0];
  s[kLeftArmDy] = st_.larm[1];
  s[kLeftArmDz] = st_.larm[2];
  s[kRightArmDx] = st_.rarm[0];
  s[kRightArmDy] = st_.rarm[1];
  s[kRightArmDz] = st_.rarm[2];
  s[kLeftHandOpen] = st_.left_hand_open ? 1.0 : 0.0;
  s[kRightHandOpen] = st_.right_hand_open ? 1.0 : 0.0;
  s[kTargetDistance] = std::hypot(st_.body_x - cfg_.target_x, st_.body_y - cfg_.target_y);

  const Camera cam = camera_errors(st_, cfg_);
  const double half_fov = cfg_.camera_fov / 2.0;
  const bool visible = cam.defined && std::abs(cam.yaw_err) < half_fov &&
                       std::abs(cam.pitch_err) < half_fov;
  s[kImageU] = visible ? cam.yaw_err / half_fov : 0.0;
  s[kImageV] = visible ? cam.pitch_err / half_fov : 0.0;
  s[kTargetVisible] = visible ? 1.0 : 0.0;
  s[kAttentionBit] = st_.attention ? 1.0 : 0.0;
  return s;
}

double HandoverEnv::reward() const { return reward_value(state(), cfg_); }

void HandoverEnv::step(int action) {
  switch (action_at(action)) {
    case Action::HeadLeft:
      st_.pan += cfg_.step_head;
      break;
    case Action::HeadRight:
      st_.pan -= cfg_.step_head;
      break;
    case Action::HeadUp:
      st_.tilt += cfg_.step_head;
      break;
    case Action::HeadDown:
      st_.tilt -= cfg_.step_head;
      break;
    case Action::BodyForward:
      st_.body_x += cfg_.step_translate * std::cos(st_.heading);
      st_.body_y += cfg_.step_translate * std::sin(st_.heading);
      break;
    case Action::BodyBackward:
      st_.body_x -= cfg_.step_translate * std::cos(st_.heading);
      st_.body_y -= cfg_.step_translate * std::sin(st_.heading);
      break;
    case Action::BodyLeft:
      st_.body_x -= cfg_.step_translate * std::sin(st_.heading);
      st_.body_y += cfg_.step_translate * std::cos(st_.heading);
      break;
    case Action::BodyRight:
      st_.body_x += cfg_.step_translate * std::sin(st_.heading);
      st_.body_y -= cfg_.step_translate * std::cos(st_.heading);
      break;
    case Action::BodyRotateLeft:
      st_.heading = wrap_angle(st_.heading + cfg_.step_rotate);
      break;
    case Action::BodyRotateRight:
      st_.heading = wrap_angle(st_.heading - cfg_.step_rotate);
      break;
    case Action::LeftArmForward:
      st_.larm[0] += cfg_.step_arm;
      break;
    case Action::LeftArmBackward:
      st_.larm[0] -= cfg_.step_arm;
      break;
    case Action::LeftArmLeft:
      st_.larm[1] += cfg_.step_arm;
      break;
    case Action::LeftArmRight:
      st_.larm[1] -= cfg_.step_arm;
      break;
    case Action::LeftArmUp:
      st_.larm[2] += cfg_.step_arm;
      break;
    case Action::LeftArmDown:
      st_.larm[2] -= cfg_.step_arm;
      break;
    case Action::RightArmForward:
      st_.rarm[0] += cfg_.step_arm;
      break;
    case Action::RightArmBackward:
      st_.rarm[0] -= cfg_.step_arm;
      break;
    case Action::RightArmLeft:
      st_.rarm[1] += cfg_.step_arm;
      break;
    case Action::RightArmRight:
      st_.rarm[1] -= cfg_.step_arm;
      break;
    case Action::RightArmUp:
      st_.rarm[2] += cfg_.step_arm;
      break;
    case Action::RightArmDown:
      st_.rarm[2] -= cfg_.step_arm;
      break;
    case Action::LeftHandClose:
      st_.left_hand_open = false;
      break;
    case Action::LeftHandOpen:
      st_.left_hand_open = true;
      break;
    case Action::RightHandClose:
      st_.right_hand_open = false;
      break;
    case Action::RightHandOpen:
      st_.right_hand_open = true;
      break;
    case Action::Null:
      break;
  }
  st_.pan = std::clamp(st_.pan, -kHeadPanLimit, kHeadPanLimit);
  st_.tilt = std::clamp(st_.tilt, kHeadTiltMin, kHeadTiltMax);
  st_.body_x = std::clamp(st_.body_x, -kWorkspaceLimit, kWorkspaceLimit);
  st_.body_y = std::clamp(st_.body_y, -kWorkspaceLimit, kWorkspaceLimit);
  clamp_arm(st_.larm, cfg_.arm_reach_max);
  clamp_arm(st_.rarm, cfg_.arm_reach_max);

  // Attention dynamics. The draw is consumed every step so the stream
  // position depends only on the step count.
  const double draw = st_.rng.uniform();
  if (gaze_angle(st_, cfg_) < kGazeLockAngle) {
    st_.attention = true;  // eye contact established by gaze
  } else if (draw < cfg_.attention_flip_prob) {
    st_.attention = !st_.attention;
  }
}

Snapshot HandoverEnv::snapshot() const { return Snapshot::of(st_); }

void HandoverEnv::restore(const Snapshot& token) {
  const SimState* st = token.get<SimState>();
  if (!st) throw std::invalid_argument("invalid snapshot token");
  st_ = *st;
}

std::unique_ptr<Simulator> HandoverEnv::clone() const {
  auto copy = std::make_unique<HandoverEnv>(cfg_);
  copy->st_ = st_;
  return copy;
}

bool HandoverEnv::success() const {
  const double d = std::hypot(st_.body_x - cfg_.target_x, st_.body_y - cfg_.target_y);
  if (d > cfg_.grasp_distance) return false;
  if (cfg_.social_rule_enabled && !st_.attention) return false;
  const double ch = std::cos(st_.heading);
  const double sh = std::sin(st_.heading);
  auto arm_near_target = [&](const double arm[3], double lateral) {
    const double bx = arm[0];
    const double by = lateral + arm[1];
    const double ex = st_.body_x + ch * bx - sh * by;
    const double ey = st_.body_y + sh * bx + ch * by;
    const double ez = kShoulderHeight + arm[2];
    const double dx = ex - cfg_.target_x;
    const double dy = ey - cfg_.target_y;
    const double dz = ez - cfg_.target_z;
    return std::sqrt(dx * dx + dy * dy + dz * dz) <= 0.10;
  };
  if (!st_.left_hand_open && arm_near_target(st_.larm, kShoulderLateral)) return true;
  if (!st_.right_hand_open && arm_near_target(st_.rarm, -kShoulderLateral)) return true;
  return false;
}

void write_trajectory_header(std::ostream& out) {
  out << "t,";
  for (int i = 0; i < kStateDim; ++i) out << 's' << i << ',';
  out << "action,reward\n";
}

void write_trajectory_row(std::ostream& out, int t, const StateVector& s, Action a,
                          double reward) {
  out << t << ',';
  for (int i = 0; i < kStateDim; ++i) out << fmt_g17(s[i]) << ',';
  out << index(a) << ',' << fmt_g17(reward) << '\n';
}

}  // namespace pistam
