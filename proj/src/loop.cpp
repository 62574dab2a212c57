#include "pistam/loop.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "pistam/util.hpp"

namespace pistam {

namespace {

constexpr std::uint64_t kTagD0 = tag_hash("loop-d0");
constexpr std::uint64_t kTagRollin = tag_hash("loop-rollin");
constexpr std::uint64_t kTagRollinUniform = tag_hash("loop-rollin-uniform");
constexpr std::uint64_t kTagUct = tag_hash("loop-uct");
constexpr std::uint64_t kTagPolicy = tag_hash("loop-policy");
constexpr std::uint64_t kTagSignature = tag_hash("loop-signature");
constexpr std::uint64_t kTagEval = tag_hash("loop-eval");
constexpr std::uint64_t kTagEvalTrial = tag_hash("loop-eval-trial");

double label_accuracy(const PolicyModel& p, const LabeledDataset& d, std::size_t last_n) {
  if (d.empty()) return 0.0;
  const std::size_t n = std::min(last_n, d.size());
  std::size_t hits = 0;
  for (std::size_t i = d.size() - n; i < d.size(); ++i) {
    if (policy_act(p, d[i].first) == d[i].second) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

}  // namespace

void RunConfig::validate() const {
  if (iterations < 0) throw std::invalid_argument("iterations must be >= 0");
  if (rollin_timesteps < 1) throw std::invalid_argument("rollin_timesteps must be >= 1");
  if (n_components < 1) throw std::invalid_argument("n_components must be >= 1");
  if (rho < 0) throw std::invalid_argument("rho must be >= 0");
  if (d0_size < 1) throw std::invalid_argument("d0_size must be >= 1");
  if (eval_trials < 1) throw std::invalid_argument("eval_trials must be >= 1");
  if (eval_episode_len < 1) throw std::invalid_argument("eval_episode_len must be >= 1");
  if (search.horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (search.simulations < 1) throw std::invalid_argument("simulations must be >= 1");
  if (search.epsilon < 0 || search.epsilon > 1) {
    throw std::invalid_argument("epsilon must be in [0, 1]");
  }
  env.validate();
}

LabeledDataset initial_dataset(const RunConfig& cfg, HandoverEnv& env) {
  if (!cfg.prior_dataset_path.empty()) {
    LabeledDataset d0 = load_dataset_csv(cfg.prior_dataset_path);
    if (d0.rho() != cfg.rho) {
      throw std::runtime_error("prior dataset rho does not match run rho");
    }
    if (d0.empty()) throw std::runtime_error("prior dataset is empty");
    return d0;
  }
  return random_policy_dataset(env, cfg.d0_size, derive_seed(cfg.master_seed, kTagD0),
                               cfg.rho);
}

std::pair<PolicyModel, AffordanceSignature> initialize(const LabeledDataset& d0,
                                                       const RunConfig& cfg) {
  if (d0.empty()) throw std::invalid_argument("empty dataset");
  PolicyModel pi0 = train_policy(d0, cfg.n_components,
                                 derive_seed(cfg.master_seed, kTagPolicy, 0));
  AffordanceSignature theta0 = fit_signatures(
      d0, cfg.n_components, derive_seed(cfg.master_seed, kTagSignature, 0));
  return {std::move(pi0), std::move(theta0)};
}

IterationResult run_iteration(int iteration, const PolicyModel& prev_policy,
                              const AffordanceSignature& sig,
                              const LabeledDataset& dataset, HandoverEnv& env,
                              const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto i = static_cast<std::uint64_t>(iteration);

  IterationResult out;
  out.dataset = dataset;
  out.metrics.iteration = iteration;

  env.reset(derive_seed(cfg.master_seed, kTagRollin, i));
  out.metrics.rollin_start = env.state();

  const bool uniform_rollin = cfg.uniform_random_pi0 && iteration == 1;
  Rng uniform_rng(derive_seed(cfg.master_seed, kTagRollinUniform, i));

  SearchConfig scfg = cfg.search;
  scfg.rho = cfg.rho;
  if (cfg.epsilon_decay && cfg.iterations > 0) {
    scfg.epsilon = cfg.search.epsilon *
                   (1.0 - static_cast<double>(iteration) / cfg.iterations);
  }

  for (int t = 1; t <= cfg.rollin_timesteps; ++t) {
    const Action a = uniform_rollin ? action_at(uniform_rng.uniform_int(kActionCount))
                                    : policy_act(prev_policy, env.state());
    env.step(a);
    scfg.seed = derive_seed(cfg.master_seed, kTagUct, i, static_cast<std::uint64_t>(t));
    SearchResult r =
        uct_search(env, cfg.baseline_mode ? nullptr : &sig, scfg);
    out.dataset = dataset_aggregate(out.dataset, r.labels);
    out.metrics.raw.merge(r.stats);
    out.roots.push_back(std::move(r.stats));
  }

  out.policy = train_policy(out.dataset, cfg.n_components,
                            derive_seed(cfg.master_seed, kTagPolicy, i));
  out.signature = cfg.baseline_mode
                      ? sig
                      : fit_signatures(out.dataset, cfg.n_components,
                                       derive_seed(cfg.master_seed, kTagSignature, i));

  const EvalStats eval =
      evaluate_policy(out.policy, cfg.env, cfg.eval_trials, cfg.eval_episode_len,
                      derive_seed(cfg.master_seed, kTagEval, i));
  out.metrics.mean_reward = eval.mean;
  out.metrics.std_reward = eval.stddev;
  out.metrics.evals_total = out.metrics.raw.mean_evals_per_visit();
  out.metrics.evals_affordance =
      out.metrics.raw.visits
          ? static_cast<double>(out.metrics.raw.evals_affordance) /
                static_cast<double>(out.metrics.raw.visits)
          : 0.0;
  out.metrics.evals_random =
      out.metrics.raw.visits ? static_cast<double>(out.metrics.raw.evals_random) /
                                   static_cast<double>(out.metrics.raw.visits)
                             : 0.0;
  out.metrics.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
          .count();
  return out;
}

RunArtifacts run(const RunConfig& cfg) {
  cfg.validate();
  HandoverEnv env(cfg.env);

  RunArtifacts artifacts;
  artifacts.dataset = initial_dataset(cfg, env);
  auto [pi0, theta0] = initialize(artifacts.dataset, cfg);
  artifacts.policies.push_back(std::move(pi0));
  artifacts.signatures.push_back(std::move(theta0));
  artifacts.eval_pi0 =
      evaluate_policy(artifacts.policies.front(), cfg.env, cfg.eval_trials,
                      cfg.eval_episode_len, derive_seed(cfg.master_seed, kTagEval, 0));

  for (int i = 1; i <= cfg.iterations; ++i) {
    log_info("iteration " + std::to_string(i) + "/" + std::to_string(cfg.iterations));
    IterationResult it = run_iteration(i, artifacts.policies.back(),
                                       artifacts.signatures.back(), artifacts.dataset,
                                       env, cfg);
    artifacts.dataset = std::move(it.dataset);
    artifacts.policies.push_back(std::move(it.policy));
    if (!cfg.baseline_mode) artifacts.signatures.push_back(std::move(it.signature));
    artifacts.metrics.push_back(std::move(it.metrics));
    for (auto& stats : it.roots) artifacts.per_root.emplace_back(i, std::move(stats));
  }

  const auto recent = static_cast<std::size_t>(cfg.rollin_timesteps) *
                      static_cast<std::size_t>(cfg.search.horizon);
  artifacts.label_accuracy_pi0 =
      label_accuracy(artifacts.policies.front(), artifacts.dataset, recent);
  artifacts.label_accuracy_piN =
      label_accuracy(artifacts.policies.back(), artifacts.dataset, recent);
  log_info("label accuracy pi_0=" + fmt_g17(artifacts.label_accuracy_pi0) +
           " pi_N=" + fmt_g17(artifacts.label_accuracy_piN));
  return artifacts;
}

EvalStats evaluate_policy(const PolicyModel& p, const EnvConfig& env_cfg, int n_trials,
                          int episode_len, std::uint64_t seed) {
  if (n_trials < 1) throw std::invalid_argument("n_trials must be >= 1");
  if (episode_len < 1) throw std::invalid_argument("episode_len must be >= 1");
  std::vector<double> episode_mean(static_cast<std::size_t>(n_trials), 0.0);
  std::vector<std::uint8_t> succeeded(static_cast<std::size_t>(n_trials), 0);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_trials));
#pragma omp parallel for schedule(dynamic)
  for (int trial = 0; trial < n_trials; ++trial) {
    const auto ti = static_cast<std::size_t>(trial);
    try {
      HandoverEnv env(env_cfg);
      env.reset(derive_seed(seed, kTagEvalTrial, static_cast<std::uint64_t>(trial)));
      double sum = 0.0;
      for (int step = 0; step < episode_len; ++step) {
        env.step(policy_act(p, env.state()));
        sum += env.reward();
        if (env.success()) succeeded[ti] = 1;
      }
      episode_mean[ti] = sum / episode_len;
    } catch (...) {
      errors[ti] = std::current_exception();
    }
  }
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  EvalStats stats;
  stats.trials = n_trials;
  stats.min = episode_mean.front();
  stats.max = episode_mean.front();
  for (double m : episode_mean) {
    stats.mean += m;
    stats.min = std::min(stats.min, m);
    stats.max = std::max(stats.max, m);
  }
  stats.mean /= n_trials;
  double var = 0.0;
  for (double m : episode_mean) var += (m - stats.mean) * (m - stats.mean);
  stats.stddev = std::sqrt(var / n_trials);
  for (auto s : succeeded) stats.success_rate += s;
  stats.success_rate /= n_trials;
  return stats;
}

void write_metrics_csv(const std::vector<IterationMetrics>& metrics,
                       const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << "iteration,mean_reward,std_reward,evals_affordance,evals_random,evals_total,"
       "wall_ms\n";
  for (const auto& m : metrics) {
    f << m.iteration << ',' << fmt_g17(m.mean_reward) << ',' << fmt_g17(m.std_reward)
      << ',' << fmt_g17(m.evals_affordance) << ',' << fmt_g17(m.evals_random) << ','
      << fmt_g17(m.evals_total) << ',' << fmt_g17(m.wall_ms) << '\n';
  }
  if (!f) throw std::runtime_error("write failed: " + path);
}

void write_artifacts(const RunArtifacts& artifacts, const std::string& dir) {
  for (std::size_t i = 0; i < artifacts.policies.size(); ++i) {
    save_policy(artifacts.policies[i], dir + "/policy_" + std::to_string(i) + ".json");
  }
  for (std::size_t i = 0; i < artifacts.signatures.size(); ++i) {
    save_signature(artifacts.signatures[i],
                   dir + "/signature_" + std::to_string(i) + ".json");
  }
  save_dataset_csv(artifacts.dataset, dir + "/dataset.csv");
  write_metrics_csv(artifacts.metrics, dir + "/metrics.csv");
  std::ofstream f(dir + "/expansion_stats.csv", std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + dir + "/expansion_stats.csv");
  write_expansion_stats_header(f);
  int prev_iteration = -1;
  int root_index = 0;
  for (const auto& [iteration, stats] : artifacts.per_root) {
    if (iteration != prev_iteration) {
      prev_iteration = iteration;
      root_index = 0;
    }
    write_expansion_stats_row(f, iteration, root_index++, stats);
  }
  if (!f) throw std::runtime_error("write failed: " + dir + "/expansion_stats.csv");
}

}  // namespace pistam
