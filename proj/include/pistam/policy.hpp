#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pistam/gmm.hpp"
#include "pistam/mdp.hpp"
#include "pistam/sim.hpp"

namespace pistam {

// Generative classifier policy: one class-conditional mixture per action
// present in the training set, weighted by the empirical class frequency.
// Unlike the affordance signature, the policy sees the full normalized state
// so it can distinguish arm and hand configurations.
struct PolicyModel {
  struct ClassModel {
    Action action;
    double prior = 0.0;  // empirical class frequency
    MixtureModel model;
  };

  std::vector<int> projection;  // state dims used as features (default: all)
  StateBounds bounds;           // normalization applied before projecting
  std::vector<ClassModel> classes;  // ascending action order, present classes only

  bool trained() const { return !classes.empty(); }
};

std::vector<int> full_state_projection();

// Fits one mixture per present class; absent actions get no model and an
// implicit prior of zero. Per-class fits are independent and seeded from
// derive_seed(seed, class index). Throws on an empty dataset.
PolicyModel train_policy(const LabeledDataset& d, int n_components, std::uint64_t seed,
                         const FitOptions& options = {});

// argmax over nonzero-prior classes of prior * density; ties go to the lowest
// action index. Throws std::runtime_error("untrained policy") when empty.
Action policy_act(const PolicyModel& p, const StateVector& s);

// Rolls uniformly random actions from Delta resets (a fresh reset every 10
// steps), recording the pre-action state. At most n_pairs pairs survive the
// dataset's rho deduplication.
LabeledDataset random_policy_dataset(Simulator& env, int n_pairs, std::uint64_t seed,
                                     double rho = 0.05);

// Same mixture-document format as the gmm module, wrapped with per-class
// priors and the feature projection.
nlohmann::json policy_to_json(const PolicyModel& p);
PolicyModel policy_from_json(const nlohmann::json& doc);
void save_policy(const PolicyModel& p, const std::string& path);
PolicyModel load_policy(const std::string& path);

}  // namespace pistam
