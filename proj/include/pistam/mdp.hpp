#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pistam {

inline constexpr int kStateDim = 18;

enum StateField : int {
  kBodyX = 0,
  kBodyY,
  kBodyHeading,
  kHeadPan,
  kHeadTilt,
  kLeftArmDx,
  kLeftArmDy,
  kLeftArmDz,
  kRightArmDx,
  kRightArmDy,
  kRightArmDz,
  kLeftHandOpen,
  kRightHandOpen,
  kTargetDistance,
  kImageU,
  kImageV,
  kTargetVisible,
  kAttentionBit,
};

// Dimensions that carry 0/1 flags rather than continuous quantities.
// Flag dimensions pass through normalization unchanged and participate in the
// L-inf comparison as 0/1, so any flag flip makes states unequal for rho < 1.
inline constexpr std::array<bool, kStateDim> kBitField = {
    false, false, false, false, false, false, false, false, false,
    false, false, true,  true,  false, false, false, true,  true,
};

struct StateVector {
  std::array<double, kStateDim> v{};

  double& operator[](int i) { return v[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return v[static_cast<std::size_t>(i)]; }

  bool finite() const;

  friend bool operator==(const StateVector&, const StateVector&) = default;
};

// Canonical 27-action enumeration; the order is fixed and serialized by index.
enum class Action : int {
  HeadLeft = 0,
  HeadRight,
  HeadUp,
  HeadDown,
  BodyForward,
  BodyBackward,
  BodyLeft,
  BodyRight,
  BodyRotateLeft,
  BodyRotateRight,
  LeftArmForward,
  LeftArmBackward,
  LeftArmLeft,
  LeftArmRight,
  LeftArmUp,
  LeftArmDown,
  RightArmForward,
  RightArmBackward,
  RightArmLeft,
  RightArmRight,
  RightArmUp,
  RightArmDown,
  LeftHandClose,
  LeftHandOpen,
  RightHandClose,
  RightHandOpen,
  Null,
};

inline constexpr int kActionCount = 27;

constexpr int index(Action a) { return static_cast<int>(a); }

// Range-checked conversion; throws std::out_of_range.
Action action_at(int i);

std::string_view action_name(Action a);

// Accepts a snake_case name or a decimal index.
std::optional<Action> action_from_name(std::string_view text);

// Per-dimension normalization ranges. Finite, lo < hi on continuous dims.
struct StateBounds {
  std::array<double, kStateDim> lo{};
  std::array<double, kStateDim> hi{};

  // Desk-scale defaults covering every state the simulator can reach.
  static const StateBounds& defaults();
};

// Affine map of each continuous dimension onto [0, 1]; flag dimensions pass
// through unchanged. Throws std::invalid_argument("invalid state") on
// non-finite input.
StateVector normalize_state(const StateVector& s, const StateBounds& bounds);

// True iff the L-inf distance between two *normalized* states is < rho.
// Symmetric and reflexive for rho > 0; not transitive in general.
bool states_equal(const StateVector& n1, const StateVector& n2, double rho);

// Ordered (state, action) pairs with approximate-duplicate semantics: no two
// stored states are rho-equal, iteration order is insertion order (newest
// last). Comparison happens on states normalized with the attached bounds.
class LabeledDataset {
 public:
  LabeledDataset() : LabeledDataset(0.05) {}
  explicit LabeledDataset(double rho, StateBounds bounds = StateBounds::defaults());

  double rho() const { return rho_; }
  const StateBounds& bounds() const { return bounds_; }

  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }

  const std::pair<StateVector, Action>& operator[](std::size_t i) const {
    return pairs_[i];
  }

  auto begin() const { return pairs_.begin(); }
  auto end() const { return pairs_.end(); }

  // Removes every stored pair whose state is rho-equal to s, then appends
  // (s, a): the newest label wins.
  void insert(const StateVector& s, Action a);

  // Index of a stored state rho-equal to s, or -1.
  int find_equal(const StateVector& s) const;

 private:
  double rho_;
  StateBounds bounds_;
  std::vector<std::pair<StateVector, Action>> pairs_;
  std::vector<StateVector> normalized_;  // cache aligned with pairs_
};

// D union D_new with "new label wins" semantics; both inputs keep their
// insertion order in the result (survivors of d first, then d_new). Throws
// std::runtime_error("threshold mismatch") when the thresholds differ.
LabeledDataset dataset_aggregate(const LabeledDataset& d, const LabeledDataset& d_new);

// CSV with a `# rho=<value> version=1` sidecar line before the header row
// `s0,...,s17,action`. Floats are written with %.17g (exact round-trip).
void save_dataset_csv(const LabeledDataset& d, const std::string& path);
LabeledDataset load_dataset_csv(const std::string& path);

}  // namespace pistam
