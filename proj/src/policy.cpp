#include "pistam/policy.hpp"

#include <omp.h>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "pistam/stam.hpp"
#include "pistam/util.hpp"

namespace pistam {

namespace {

constexpr std::uint64_t kTagPolicyClass = tag_hash("policy-class");
constexpr std::uint64_t kTagRandomRoll = tag_hash("random-roll");

Eigen::VectorXd policy_features(const PolicyModel& p, const StateVector& s) {
  return project_state(normalize_state(s, p.bounds), p.projection);
}

}  // namespace

std::vector<int> full_state_projection() {
  std::vector<int> proj(kStateDim);
  std::iota(proj.begin(), proj.end(), 0);
  return proj;
}

PolicyModel train_policy(const LabeledDataset& d, int n_components, std::uint64_t seed,
                         const FitOptions& options) {
  if (d.empty()) throw std::invalid_argument("empty dataset");
  PolicyModel p;
  p.projection = full_state_projection();
  p.bounds = d.bounds();

  std::vector<std::vector<Eigen::VectorXd>> by_action(static_cast<std::size_t>(kActionCount));
  for (const auto& [s, a] : d) {
    by_action[static_cast<std::size_t>(index(a))].push_back(
        project_state(normalize_state(s, p.bounds), p.projection));
  }
  std::vector<int> present;
  for (int a = 0; a < kActionCount; ++a) {
    if (!by_action[static_cast<std::size_t>(a)].empty()) present.push_back(a);
  }
  p.classes.resize(present.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t c = 0; c < present.size(); ++c) {
    const int a = present[c];
    const auto& samples = by_action[static_cast<std::size_t>(a)];
    p.classes[c] = {action_at(a),
                    static_cast<double>(samples.size()) / static_cast<double>(d.size()),
                    gmm_fit_em(samples, n_components,
                               derive_seed(seed, kTagPolicyClass,
                                           static_cast<std::uint64_t>(a)),
                               options)};
  }
  return p;
}

Action policy_act(const PolicyModel& p, const StateVector& s) {
  if (!p.trained()) throw std::runtime_error("untrained policy");
  std::vector<const MixtureModel*> models;
  std::vector<double> priors;
  models.reserve(p.classes.size());
  priors.reserve(p.classes.size());
  for (const auto& c : p.classes) {
    models.push_back(&c.model);
    priors.push_back(c.prior);
  }
  const int best = classify_generative(policy_features(p, s), models, priors);
  return p.classes[static_cast<std::size_t>(best)].action;
}

LabeledDataset random_policy_dataset(Simulator& env, int n_pairs, std::uint64_t seed,
                                     double rho) {
  if (n_pairs < 1) throw std::invalid_argument("n_pairs must be >= 1");
  LabeledDataset d(rho);
  Rng rng(derive_seed(seed, kTagRandomRoll));
  // A stride of unrecorded steps keeps consecutive records farther apart than
  // the dedup threshold; small-step actions would otherwise see their pair
  // deleted by the next insert, skewing the label histogram.
  constexpr int kRecordStride = 3;
  constexpr int kEpisodeRecords = 8;
  std::uint64_t episode = 0;
  for (int i = 0; i < n_pairs; ++i) {
    if (i % kEpisodeRecords == 0) {
      env.reset(derive_seed(seed, kTagRandomRoll, ++episode));
    }
    const int a = rng.uniform_int(env.action_count());
    d.insert(env.state(), action_at(a));
    env.step(a);
    for (int k = 1; k < kRecordStride; ++k) env.step(rng.uniform_int(env.action_count()));
  }
  return d;
}

nlohmann::json policy_to_json(const PolicyModel& p) {
  nlohmann::json classes = nlohmann::json::object();
  for (const auto& c : p.classes) {
    classes[std::to_string(index(c.action))] = {{"prior", c.prior},
                                                {"model", mixture_to_json(c.model)}};
  }
  nlohmann::json lo = nlohmann::json::array();
  nlohmann::json hi = nlohmann::json::array();
  for (int i = 0; i < kStateDim; ++i) {
    lo.push_back(p.bounds.lo[static_cast<std::size_t>(i)]);
    hi.push_back(p.bounds.hi[static_cast<std::size_t>(i)]);
  }
  return {{"version", 1},
          {"projection", p.projection},
          {"bounds_lo", std::move(lo)},
          {"bounds_hi", std::move(hi)},
          {"classes", std::move(classes)}};
}

PolicyModel policy_from_json(const nlohmann::json& doc) {
  if (doc.at("version").get<int>() != 1) {
    throw std::runtime_error("unsupported policy document version");
  }
  PolicyModel p;
  p.projection = doc.at("projection").get<std::vector<int>>();
  const auto& lo = doc.at("bounds_lo");
  const auto& hi = doc.at("bounds_hi");
  if (lo.size() != kStateDim || hi.size() != kStateDim) {
    throw std::runtime_error("bad bounds length");
  }
  for (int i = 0; i < kStateDim; ++i) {
    p.bounds.lo[static_cast<std::size_t>(i)] = lo[static_cast<std::size_t>(i)].get<double>();
    p.bounds.hi[static_cast<std::size_t>(i)] = hi[static_cast<std::size_t>(i)].get<double>();
  }
  for (const auto& [key, value] : doc.at("classes").items()) {
    PolicyModel::ClassModel c;
    c.action = action_at(std::stoi(key));
    c.prior = value.at("prior").get<double>();
    c.model = mixture_from_json(value.at("model"));
    p.classes.push_back(std::move(c));
  }
  std::sort(p.classes.begin(), p.classes.end(),
            [](const auto& a, const auto& b) { return a.action < b.action; });
  double prior_sum = 0.0;
  for (const auto& c : p.classes) prior_sum += c.prior;
  if (!p.classes.empty() && std::abs(prior_sum - 1.0) > 1e-9) {
    throw std::runtime_error("class priors must sum to 1");
  }
  return p;
}

void save_policy(const PolicyModel& p, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << policy_to_json(p).dump(2) << '\n';
  if (!f) throw std::runtime_error("write failed: " + path);
}

PolicyModel load_policy(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open policy: " + path);
  nlohmann::json doc;
  f >> doc;
  return policy_from_json(doc);
}

}  // namespace pistam
