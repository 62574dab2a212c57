#include "pistam/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "pistam/util.hpp"

namespace pistam {

namespace {

constexpr std::array<std::string_view, kActionCount> kActionNames = {
    "head_left",         "head_right",         "head_up",
    "head_down",         "body_forward",       "body_backward",
    "body_left",         "body_right",         "body_rotate_left",
    "body_rotate_right", "left_arm_forward",   "left_arm_backward",
    "left_arm_left",     "left_arm_right",     "left_arm_up",
    "left_arm_down",     "right_arm_forward",  "right_arm_backward",
    "right_arm_left",    "right_arm_right",    "right_arm_up",
    "right_arm_down",    "left_hand_close",    "left_hand_open",
    "right_hand_close",  "right_hand_open",    "null",
};

}  // namespace

bool StateVector::finite() const {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

Action action_at(int i) {
  if (i < 0 || i >= kActionCount) {
    throw std::out_of_range("action index out of range: " + std::to_string(i));
  }
  return static_cast<Action>(i);
}

std::string_view action_name(Action a) {
  return kActionNames[static_cast<std::size_t>(index(a))];
}

std::optional<Action> action_from_name(std::string_view text) {
  for (int i = 0; i < kActionCount; ++i) {
    if (kActionNames[static_cast<std::size_t>(i)] == text) {
      return static_cast<Action>(i);
    }
  }
  if (!text.empty() &&
      std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    int i = 0;
    for (char c : text) i = i * 10 + (c - '0');
    if (i < kActionCount) return static_cast<Action>(i);
  }
  return std::nullopt;
}

const StateBounds& StateBounds::defaults() {
  static const StateBounds b = [] {
    StateBounds bounds;
    auto set = [&bounds](int i, double lo, double hi) {
      bounds.lo[static_cast<std::size_t>(i)] = lo;
      bounds.hi[static_cast<std::size_t>(i)] = hi;
    };
    const double pi = std::acos(-1.0);
    set(kBodyX, -1.5, 1.5);
    set(kBodyY, -1.5, 1.5);
    set(kBodyHeading, -pi, pi);
    set(kHeadPan, -2.2, 2.2);
    set(kHeadTilt, -0.6, 1.1);
    for (int i = kLeftArmDx; i <= kRightArmDz; ++i) set(i, -0.35, 0.35);
    set(kLeftHandOpen, 0.0, 1.0);
    set(kRightHandOpen, 0.0, 1.0);
    set(kTargetDistance, 0.0, 3.0);
    set(kImageU, -1.0, 1.0);
    set(kImageV, -1.0, 1.0);
    set(kTargetVisible, 0.0, 1.0);
    set(kAttentionBit, 0.0, 1.0);
    return bounds;
  }();
  return b;
}

StateVector normalize_state(const StateVector& s, const StateBounds& bounds) {
  if (!s.finite()) throw std::invalid_argument("invalid state");
  StateVector out;
  for (int i = 0; i < kStateDim; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (kBitField[k]) {
      out[i] = s[i];
      continue;
    }
    const double lo = bounds.lo[k];
    const double hi = bounds.hi[k];
    if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi)) {
      throw std::invalid_argument("invalid normalization bounds");
    }
    out[i] = (s[i] - lo) / (hi - lo);
  }
  return out;
}

bool states_equal(const StateVector& n1, const StateVector& n2, double rho) {
  if (!n1.finite() || !n2.finite()) throw std::invalid_argument("invalid state");
  if (rho < 0) throw std::invalid_argument("rho must be >= 0");
  double linf = 0.0;
  for (int i = 0; i < kStateDim; ++i) {
    linf = std::max(linf, std::abs(n1[i] - n2[i]));
  }
  return linf < rho;
}

LabeledDataset::LabeledDataset(double rho, StateBounds bounds)
    : rho_(rho), bounds_(bounds) {
  if (rho < 0) throw std::invalid_argument("rho must be >= 0");
}

int LabeledDataset::find_equal(const StateVector& s) const {
  const StateVector n = normalize_state(s, bounds_);
  for (std::size_t i = 0; i < normalized_.size(); ++i) {
    if (states_equal(normalized_[i], n, rho_)) return static_cast<int>(i);
  }
  return -1;
}

void LabeledDataset::insert(const StateVector& s, Action a) {
  const StateVector n = normalize_state(s, bounds_);
  // rho-equality is not transitive, so several stored states can match.
  for (std::size_t i = normalized_.size(); i-- > 0;) {
    if (states_equal(normalized_[i], n, rho_)) {
      pairs_.erase(pairs_.begin() + static_cast<std::ptrdiff_t>(i));
      normalized_.erase(normalized_.begin() + static_cast<std::ptrdiff_t>(i));
    }
  }
  pairs_.emplace_back(s, a);
  normalized_.push_back(n);
}

LabeledDataset dataset_aggregate(const LabeledDataset& d, const LabeledDataset& d_new) {
  if (d.rho() != d_new.rho()) throw std::runtime_error("threshold mismatch");
  LabeledDataset out = d;
  for (const auto& [s, a] : d_new) {
    out.insert(s, a);
  }
  return out;
}

void save_dataset_csv(const LabeledDataset& d, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << "# rho=" << fmt_g17(d.rho()) << " version=1\n";
  for (int i = 0; i < kStateDim; ++i) f << 's' << i << ',';
  f << "action\n";
  for (const auto& [s, a] : d) {
    for (int i = 0; i < kStateDim; ++i) f << fmt_g17(s[i]) << ',';
    f << index(a) << '\n';
  }
  if (!f) throw std::runtime_error("write failed: " + path);
}

LabeledDataset load_dataset_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open dataset: " + path);
  std::string line;
  if (!std::getline(f, line) || line.rfind("# rho=", 0) != 0) {
    throw std::runtime_error("missing dataset metadata line: " + path);
  }
  std::istringstream meta(line.substr(6));
  double rho = 0.0;
  meta >> rho;
  if (!meta) throw std::runtime_error("bad rho in dataset metadata: " + path);
  if (!std::getline(f, line) || line.rfind("s0,", 0) != 0) {
    throw std::runtime_error("missing dataset header: " + path);
  }
  LabeledDataset d(rho);
  std::size_t lineno = 2;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    StateVector s;
    for (int i = 0; i < kStateDim; ++i) {
      if (!std::getline(row, cell, ',')) {
        throw std::runtime_error("short dataset row at line " + std::to_string(lineno));
      }
      s[i] = std::stod(cell);
    }
    if (!std::getline(row, cell, ',')) {
      throw std::runtime_error("missing action at line " + std::to_string(lineno));
    }
    d.insert(s, action_at(std::stoi(cell)));
  }
  return d;
}

}  // namespace pistam
