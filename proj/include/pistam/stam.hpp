#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pistam/gmm.hpp"
#include "pistam/mdp.hpp"
#include "pistam/util.hpp"

namespace pistam {

// Feature projection the affordance mixtures see by default: the spatial
// pose plus the target/attention context, in raw units. Full-state densities
// would need far more data than a few training iterations produce.
inline constexpr std::array<int, 7> kDefaultAffordanceProjection = {
    kBodyX, kBodyY, kBodyHeading, kTargetDistance, kImageU, kImageV, kAttentionBit,
};

Eigen::VectorXd project_state(const StateVector& s, std::span<const int> projection);

// Per-action affordance signature: theta(j) for each of the 27 actions, all
// sharing one feature projection. Immutable after fitting.
struct AffordanceSignature {
  std::vector<int> projection;
  std::vector<MixtureModel> per_action;  // exactly kActionCount entries
};

// f(s, theta(a)): mixture density of the projected state. >= 0.
double affordance_value(const StateVector& s, Action a, const AffordanceSignature& sig);

// All 27 values at once (shares the projection work).
std::array<double, kActionCount> affordance_values(const StateVector& s,
                                                   const AffordanceSignature& sig);

struct LegalitySample {
  std::vector<Action> legal;           // sorted union of the two subsets
  std::vector<Action> via_affordance;  // value strictly above lambda
  std::vector<Action> via_random;      // admitted by the epsilon draw
  double lambda = 0.0;
  int below_threshold = 0;  // actions that received an epsilon draw
};

// The adaptive threshold rule as a pure function of the value vector:
// lambda = max(values) / 2, legal iff value > lambda; every below-threshold
// action is then admitted independently with probability epsilon (draws
// consumed in ascending action order). If nothing ends up legal (all values
// zero and no draw fired) every action is returned via_affordance.
LegalitySample threshold_legal(const std::vector<double>& values, double epsilon,
                               Rng& rng);

LegalitySample legal_actions(const StateVector& s, const AffordanceSignature& sig,
                             double epsilon, Rng& rng);

// Fits one mixture per action on the projected states labeled with it.
// Actions with no examples get a single broad component (dataset mean and
// covariance) so they stay reachable through the epsilon mechanism. Each
// action's fit depends only on its own samples and derive_seed(seed, action).
AffordanceSignature fit_signatures(const LabeledDataset& d, int n_components,
                                   std::uint64_t seed,
                                   std::span<const int> projection = kDefaultAffordanceProjection,
                                   const FitOptions& options = {});

struct AffordanceGrid {
  Action action = Action::Null;
  double origin_x = 0.0;  // lower-left cell corner, meters
  double origin_y = 0.0;
  double cell_size = 0.05;
  int width = 0;
  int height = 0;
  std::vector<double> values;  // row-major, values[y * width + x]

  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

enum class ComposeMode {
  Max,            // pointwise maximum (default phi)
  NormalizedSum,  // pointwise sum rescaled so the peak is 1
};

// Combines per-action maps into one; grids must share geometry.
AffordanceGrid compose_map(std::span<const AffordanceGrid> grids,
                           ComposeMode mode = ComposeMode::Max);

// Evaluates the affordance over a plane of body positions: each cell center
// replaces body_x/body_y in the template state and target_distance is
// recomputed against (target_x, target_y); all other features are kept.
AffordanceGrid rasterize(const AffordanceSignature& sig, Action a,
                         const StateVector& template_state, double origin_x,
                         double origin_y, double cell_size, int width, int height,
                         double target_x = 0.0, double target_y = 0.0);

// CSV matrix (one row per y cell) preceded by a metadata comment line.
void save_grid_csv(const AffordanceGrid& grid, const std::string& path);

// {version, projection, actions:{"<id>": mixture doc}}
nlohmann::json signature_to_json(const AffordanceSignature& sig);
AffordanceSignature signature_from_json(const nlohmann::json& doc);
void save_signature(const AffordanceSignature& sig, const std::string& path);
AffordanceSignature load_signature(const std::string& path);

}  // namespace pistam
