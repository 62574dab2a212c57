#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pistam/env.hpp"
#include "pistam/policy.hpp"
#include "pistam/stam.hpp"
#include "pistam/uct.hpp"

namespace pistam {

struct RunConfig {
  int iterations = 3;         // N
  int rollin_timesteps = 20;  // T
  SearchConfig search;        // H = 4, K = 64, epsilon = 0.3
  // Mixture size for both the policy classes and the affordance models. One
  // component generalizes best at the few-hundred-sample scale this loop
  // produces; the gmm-level default of 3 applies to direct module use.
  int n_components = 1;
  double rho = 0.05;  // shared by search labels and dataset aggregation
  std::uint64_t master_seed = 0;
  bool baseline_mode = false;       // no affordance gating, all actions legal
  std::string prior_dataset_path;   // optional D_0 override (knowledge injection)
  int d0_size = 120;                // random pairs when no prior dataset is given
  int eval_trials = 10;
  int eval_episode_len = 30;
  bool epsilon_decay = false;       // epsilon_i = epsilon * (1 - i/N)
  bool uniform_random_pi0 = false;  // roll iteration 1 with uniform actions
  EnvConfig env;

  void validate() const;
};

struct EvalStats {
  double mean = 0.0;
  double stddev = 0.0;  // population std over trials
  double min = 0.0;
  double max = 0.0;
  double success_rate = 0.0;
  int trials = 0;
};

struct IterationMetrics {
  int iteration = 0;
  double mean_reward = 0.0;
  double std_reward = 0.0;
  // Per-node means over the iteration's searches (the Fig.-4 style metric;
  // 27 exactly in baseline mode).
  double evals_affordance = 0.0;
  double evals_random = 0.0;
  double evals_total = 0.0;
  double wall_ms = 0.0;
  ExpansionStats raw;         // summed over the iteration's roots
  StateVector rollin_start;   // the Delta draw that opened the iteration
};

struct RunArtifacts {
  std::vector<PolicyModel> policies;            // pi_0 .. pi_N
  std::vector<AffordanceSignature> signatures;  // theta_0 .. theta_N (theta_0 only in baseline)
  LabeledDataset dataset;                       // aggregated D
  std::vector<IterationMetrics> metrics;        // one row per iteration
  std::vector<std::pair<int, ExpansionStats>> per_root;  // (iteration, root stats)
  EvalStats eval_pi0;                           // iteration-0 policy evaluation
  // Sanity metrics, reported but not asserted: classification accuracy of
  // pi_0 / pi_N on the most recent T*H labels of D.
  double label_accuracy_pi0 = 0.0;
  double label_accuracy_piN = 0.0;

  const PolicyModel& policy() const { return policies.back(); }
  const AffordanceSignature& signature() const { return signatures.back(); }
};

// Trains pi_0 and fits theta_0 on D_0.
std::pair<PolicyModel, AffordanceSignature> initialize(const LabeledDataset& d0,
                                                       const RunConfig& cfg);

// D_0 per the config: the prior dataset when a path is set (its rho must
// match cfg.rho), otherwise random rolls in the environment.
LabeledDataset initial_dataset(const RunConfig& cfg, HandoverEnv& env);

struct IterationResult {
  PolicyModel policy;
  AffordanceSignature signature;
  LabeledDataset dataset;
  IterationMetrics metrics;
  std::vector<ExpansionStats> roots;
};

// One Algorithm-1 iteration: reset from Delta, execute the previous policy
// for T steps running UCT at every visited state, aggregate the labels,
// retrain the policy and (in affordance mode) refit the signature. Throws
// without touching the caller's dataset on failure.
IterationResult run_iteration(int iteration, const PolicyModel& prev_policy,
                              const AffordanceSignature& sig,
                              const LabeledDataset& dataset, HandoverEnv& env,
                              const RunConfig& cfg);

RunArtifacts run(const RunConfig& cfg);

// n_trials greedy episodes of episode_len steps each; trials run on
// independent environments and merge by index, so the statistics do not
// depend on the number of OpenMP threads.
EvalStats evaluate_policy(const PolicyModel& p, const EnvConfig& env_cfg, int n_trials,
                          int episode_len, std::uint64_t seed);

// metrics.csv: iteration,mean_reward,std_reward,evals_affordance,
// evals_random,evals_total,wall_ms (evals columns are per-node means).
void write_metrics_csv(const std::vector<IterationMetrics>& metrics,
                       const std::string& path);

// policy_i.json, signature_i.json, dataset.csv, metrics.csv,
// expansion_stats.csv under dir (which must exist).
void write_artifacts(const RunArtifacts& artifacts, const std::string& dir);

}  // namespace pistam
