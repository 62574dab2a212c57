#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "pistam/config.hpp"
#include "pistam/loop.hpp"
#include "pistam/util.hpp"

namespace fs = std::filesystem;
using namespace pistam;

namespace {

struct ConfigPhaseError {
  std::string message;
};

RunConfig resolve_config(const std::string& config_path, std::optional<std::uint64_t> seed) {
  RunConfig cfg;
  if (!config_path.empty()) {
    try {
      cfg = load_run_config(config_path);
    } catch (const ConfigError& e) {
      throw ConfigPhaseError{e.what()};
    }
  }
  if (seed) cfg.master_seed = *seed;
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    throw ConfigPhaseError{std::string("invalid configuration: ") + e.what()};
  }
  return cfg;
}

// Canonical rasterization template: the spawn pose at mid-Delta distance with
// an attentive partner. Only body position and target distance vary per cell.
StateVector heatmap_template(const EnvConfig& env_cfg) {
  HandoverEnv env(env_cfg);
  const double mid = (env_cfg.delta_min + env_cfg.delta_max) / 2.0;
  env.reset_range(mid, mid, 0);
  StateVector s = env.state();
  s[kAttentionBit] = 1.0;
  return s;
}

void write_eval_csv(const EvalStats& stats, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << "mean_reward,std_reward,min_reward,max_reward,success_rate,trials\n";
  f << fmt_g17(stats.mean) << ',' << fmt_g17(stats.stddev) << ',' << fmt_g17(stats.min)
    << ',' << fmt_g17(stats.max) << ',' << fmt_g17(stats.success_rate) << ','
    << stats.trials << '\n';
  if (!f) throw std::runtime_error("write failed: " + path);
}

void write_affordance_bars(const std::array<double, kActionCount>& values,
                           const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << "action,name,affordance\n";
  for (int a = 0; a < kActionCount; ++a) {
    f << a << ',' << action_name(action_at(a)) << ','
      << fmt_g17(values[static_cast<std::size_t>(a)]) << '\n';
  }
  if (!f) throw std::runtime_error("write failed: " + path);
}

int cmd_train(const std::string& config_path, const std::string& out_dir,
              std::optional<std::uint64_t> seed) {
  RunConfig cfg;
  try {
    cfg = resolve_config(config_path, seed);
  } catch (const ConfigPhaseError& e) {
    std::cerr << "error: " << e.message << '\n';
    return 2;
  }
  try {
    const RunArtifacts artifacts = run(cfg);
    fs::create_directories(out_dir);
    save_run_config(cfg, out_dir + "/run_config", {{"command", "train"}});
    write_artifacts(artifacts, out_dir);
    std::cout << "final mean reward " << fmt_g17(artifacts.metrics.empty()
                                                     ? artifacts.eval_pi0.mean
                                                     : artifacts.metrics.back().mean_reward)
              << " over " << cfg.eval_trials << " trials; dataset size "
              << artifacts.dataset.size() << '\n';
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

int cmd_compare(const std::string& config_path, const std::string& out_dir,
                std::optional<std::uint64_t> seed) {
  RunConfig cfg;
  try {
    cfg = resolve_config(config_path, seed);
  } catch (const ConfigPhaseError& e) {
    std::cerr << "error: " << e.message << '\n';
    return 2;
  }
  try {
    RunConfig affordance_cfg = cfg;
    affordance_cfg.baseline_mode = false;
    RunConfig baseline_cfg = cfg;
    baseline_cfg.baseline_mode = true;

    log_info("compare: affordance run");
    const RunArtifacts affordance = run(affordance_cfg);
    log_info("compare: baseline run");
    const RunArtifacts baseline = run(baseline_cfg);

    fs::create_directories(out_dir + "/affordance");
    fs::create_directories(out_dir + "/baseline");
    save_run_config(cfg, out_dir + "/run_config", {{"command", "compare"}});
    write_artifacts(affordance, out_dir + "/affordance");
    write_artifacts(baseline, out_dir + "/baseline");

    double aff_evals = 0, base_evals = 0, aff_ms = 0, base_ms = 0;
    std::uint64_t aff_visits = 0, base_visits = 0;
    for (const auto& m : affordance.metrics) {
      aff_evals += static_cast<double>(m.raw.evals_total);
      aff_visits += m.raw.visits;
      aff_ms += m.wall_ms;
    }
    for (const auto& m : baseline.metrics) {
      base_evals += static_cast<double>(m.raw.evals_total);
      base_visits += m.raw.visits;
      base_ms += m.wall_ms;
    }
    const double aff_mean = aff_visits ? aff_evals / aff_visits : 0.0;
    const double base_mean = base_visits ? base_evals / base_visits : 0.0;
    const double reward_ratio =
        baseline.metrics.empty() || baseline.metrics.back().mean_reward == 0.0
            ? 0.0
            : affordance.metrics.back().mean_reward /
                  baseline.metrics.back().mean_reward;
    const double expansion_reduction =
        base_mean > 0 ? 100.0 * (1.0 - aff_mean / base_mean) : 0.0;
    const double time_reduction = base_ms > 0 ? 100.0 * (1.0 - aff_ms / base_ms) : 0.0;

    std::ofstream f(out_dir + "/summary.csv", std::ios::binary);
    if (!f) throw std::runtime_error("cannot open summary.csv");
    f << "reward_ratio,expansion_reduction_pct,time_reduction_pct,"
         "affordance_mean_evals_per_node,baseline_mean_evals_per_node,"
         "affordance_wall_ms,baseline_wall_ms\n";
    f << fmt_g17(reward_ratio) << ',' << fmt_g17(expansion_reduction) << ','
      << fmt_g17(time_reduction) << ',' << fmt_g17(aff_mean) << ',' << fmt_g17(base_mean)
      << ',' << fmt_g17(aff_ms) << ',' << fmt_g17(base_ms) << '\n';
    std::cout << "reward ratio " << fmt_g17(reward_ratio) << ", expansion reduction "
              << fmt_g17(expansion_reduction) << "%, time reduction "
              << fmt_g17(time_reduction) << "%\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

int cmd_eval(const std::string& policy_path, const std::string& config_path,
             int trials, int episode_len, std::optional<std::uint64_t> seed,
             const std::string& out_path, const std::string& trajectory_path) {
  RunConfig cfg;
  try {
    cfg = resolve_config(config_path, seed);
    if (trials < 1 || episode_len < 1) {
      throw ConfigPhaseError{"trials and episode length must be >= 1"};
    }
  } catch (const ConfigPhaseError& e) {
    std::cerr << "error: " << e.message << '\n';
    return 2;
  }
  try {
    const PolicyModel policy = load_policy(policy_path);
    const EvalStats stats =
        evaluate_policy(policy, cfg.env, trials, episode_len, cfg.master_seed);
    write_eval_csv(stats, out_path);
    save_run_config(cfg, out_path + ".cfg",
                    {{"command", "eval"},
                     {"policy", policy_path},
                     {"trials", std::to_string(trials)},
                     {"episode_len", std::to_string(episode_len)}});
    if (!trajectory_path.empty()) {
      std::ofstream tf(trajectory_path, std::ios::binary);
      if (!tf) throw std::runtime_error("cannot open " + trajectory_path);
      write_trajectory_header(tf);
      HandoverEnv env(cfg.env);
      env.reset(derive_seed(cfg.master_seed, tag_hash("loop-eval-trial"), 0));
      for (int t = 0; t < episode_len; ++t) {
        const Action a = policy_act(policy, env.state());
        env.step(a);
        write_trajectory_row(tf, t, env.state(), a, env.reward());
      }
    }
    std::cout << "mean reward " << fmt_g17(stats.mean) << " success rate "
              << fmt_g17(stats.success_rate) << '\n';
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

int cmd_heatmap(const std::string& signature_path, const std::string& action_text,
                double origin_x, double origin_y, double cell_size, int width,
                int height, const std::string& config_path, const std::string& out_path) {
  RunConfig cfg;
  std::optional<Action> action;
  try {
    cfg = resolve_config(config_path, std::nullopt);
    action = action_from_name(action_text);
    if (!action) {
      std::string names;
      for (int a = 0; a < kActionCount; ++a) {
        names += std::string(action_name(action_at(a))) + (a + 1 < kActionCount ? " " : "");
      }
      throw ConfigPhaseError{"unknown action '" + action_text + "'; valid: " + names};
    }
    if (cell_size <= 0 || width < 1 || height < 1) {
      throw ConfigPhaseError{"grid geometry must be positive"};
    }
  } catch (const ConfigPhaseError& e) {
    std::cerr << "error: " << e.message << '\n';
    return 2;
  }
  try {
    const AffordanceSignature sig = load_signature(signature_path);
    const StateVector tmpl = heatmap_template(cfg.env);
    const AffordanceGrid grid =
        rasterize(sig, *action, tmpl, origin_x, origin_y, cell_size, width, height,
                  cfg.env.target_x, cfg.env.target_y);
    save_grid_csv(grid, out_path);
    save_run_config(cfg, out_path + ".cfg",
                    {{"command", "heatmap"},
                     {"signature", signature_path},
                     {"action", std::string(action_name(*action))},
                     {"origin_x", fmt_g17(origin_x)},
                     {"origin_y", fmt_g17(origin_y)},
                     {"cell_size", fmt_g17(cell_size)},
                     {"width", std::to_string(width)},
                     {"height", std::to_string(height)}});
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

// The eye-contact prior of the social-rule demonstration: every action is
// exemplified when the attention bit is on; only head rotations and null when
// it is off. Arm actions cluster at close range where a handover can happen,
// right-arm-forward tightest (the handover motion itself).
LabeledDataset social_prior_dataset(std::uint64_t seed, double rho) {
  LabeledDataset d(rho);
  Rng rng(derive_seed(seed, tag_hash("social-prior")));
  auto insert_samples = [&](Action action, double attention, double spread, int count) {
    for (int i = 0; i < count; ++i) {
      StateVector s;
      s[kBodyX] = -0.30 + spread * (rng.uniform() - 0.5);
      s[kBodyY] = spread * (rng.uniform() - 0.5);
      s[kBodyHeading] = 0.3 * spread * (rng.uniform() - 0.5);
      // Diversity outside the affordance projection keeps the demonstrations
      // from rho-deduplicating each other.
      s[kHeadPan] = rng.uniform(-0.5, 0.5);
      s[kHeadTilt] = rng.uniform(-0.3, 0.8);
      for (int dim = kLeftArmDx; dim <= kRightArmDz; ++dim) {
        s[dim] = rng.uniform(-0.15, 0.15);
      }
      s[kTargetDistance] = std::hypot(s[kBodyX], s[kBodyY]);
      s[kLeftHandOpen] = 1.0;
      s[kRightHandOpen] = 1.0;
      s[kAttentionBit] = attention;
      d.insert(s, action);
    }
  };
  for (int a = 0; a < kActionCount; ++a) {
    const Action action = action_at(a);
    const bool head = a <= index(Action::HeadDown);
    const bool is_null = action == Action::Null;
    const bool arm = a >= index(Action::LeftArmForward) && a <= index(Action::RightArmDown);
    double spread = 0.6;
    if (arm) spread = action == Action::RightArmForward ? 0.18 : 0.35;
    insert_samples(action, 1.0, spread, 10);
    if (head || is_null) insert_samples(action, 0.0, 0.6, 10);
  }
  return d;
}

int cmd_social_demo(const std::string& out_dir, std::optional<std::uint64_t> seed_opt) {
  try {
    const std::uint64_t seed = seed_opt.value_or(0);
    RunConfig cfg;
    cfg.master_seed = seed;
    const LabeledDataset prior = social_prior_dataset(seed, cfg.rho);
    const AffordanceSignature theta0 =
        fit_signatures(prior, 2, derive_seed(seed, tag_hash("social-fit")));

    StateVector probe;
    probe[kBodyX] = -0.30;
    probe[kBodyY] = 0.0;
    probe[kTargetDistance] = 0.30;
    probe[kLeftHandOpen] = 1.0;
    probe[kRightHandOpen] = 1.0;
    probe[kAttentionBit] = 0.0;
    const auto values_off = affordance_values(probe, theta0);
    probe[kAttentionBit] = 1.0;
    const auto values_on = affordance_values(probe, theta0);

    fs::create_directories(out_dir);
    save_run_config(cfg, out_dir + "/run_config", {{"command", "social-demo"}});
    save_dataset_csv(prior, out_dir + "/prior_dataset.csv");
    save_signature(theta0, out_dir + "/signature_0.json");
    write_affordance_bars(values_off, out_dir + "/affordance_attention0.csv");
    write_affordance_bars(values_on, out_dir + "/affordance_attention1.csv");
    std::cout << "attention off: max affordance "
              << action_name(action_at(static_cast<int>(
                     std::max_element(values_off.begin(), values_off.end()) -
                     values_off.begin())))
              << "; attention on: max affordance "
              << action_name(action_at(static_cast<int>(
                     std::max_element(values_on.begin(), values_on.end()) -
                     values_on.begin())))
              << '\n';
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

int cmd_list_actions() {
  for (int a = 0; a < kActionCount; ++a) {
    std::cout << a << ' ' << action_name(action_at(a)) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pi-STAM: affordance-gated policy improvement for planar handovers"};
  app.require_subcommand(1);

  std::string config_path, out_path, policy_path, signature_path, action_text;
  std::string trajectory_path;
  std::optional<std::uint64_t> seed;
  int trials = 10, episode_len = 30;
  double origin_x = -0.6, origin_y = -0.6, cell_size = 0.05;
  int width = 24, height = 24;

  auto* train = app.add_subcommand("train", "run the full training loop");
  train->add_option("--config", config_path, "run config file");
  train->add_option("--out", out_path, "output directory")->required();
  train->add_option("--seed", seed, "master seed override");

  auto* compare = app.add_subcommand(
      "compare", "run the seeded experiment in affordance and baseline mode");
  compare->add_option("--config", config_path, "run config file");
  compare->add_option("--out", out_path, "output directory")->required();
  compare->add_option("--seed", seed, "master seed override");

  auto* eval = app.add_subcommand("eval", "evaluate a stored policy");
  eval->add_option("--policy", policy_path, "policy JSON file")->required();
  eval->add_option("--config", config_path, "run config file (env section)");
  eval->add_option("--trials", trials, "number of evaluation trials");
  eval->add_option("--episode-len", episode_len, "steps per trial");
  eval->add_option("--seed", seed, "evaluation seed");
  eval->add_option("--out", out_path, "stats CSV path")->required();
  eval->add_option("--dump-trajectory", trajectory_path,
                   "also write the first trial's trajectory CSV here");

  auto* heatmap = app.add_subcommand("heatmap", "rasterize a stored affordance");
  heatmap->add_option("--signature", signature_path, "signature JSON file")->required();
  heatmap->add_option("--action", action_text, "action name or index")->required();
  heatmap->add_option("--config", config_path, "run config file (env section)");
  heatmap->add_option("--origin-x", origin_x, "grid origin x (m)");
  heatmap->add_option("--origin-y", origin_y, "grid origin y (m)");
  heatmap->add_option("--cell-size", cell_size, "cell size (m)");
  heatmap->add_option("--width", width, "cells in x");
  heatmap->add_option("--height", height, "cells in y");
  heatmap->add_option("--out", out_path, "grid CSV path")->required();

  auto* social = app.add_subcommand("social-demo",
                                    "fit and export the eye-contact prior affordances");
  social->add_option("--out", out_path, "output directory")->required();
  social->add_option("--seed", seed, "seed");

  auto* list = app.add_subcommand("list-actions", "print the action index/name table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // usage errors are exit 2, --help is 0
  }

  if (app.got_subcommand(train)) return cmd_train(config_path, out_path, seed);
  if (app.got_subcommand(compare)) return cmd_compare(config_path, out_path, seed);
  if (app.got_subcommand(eval)) {
    return cmd_eval(policy_path, config_path, trials, episode_len, seed, out_path,
                    trajectory_path);
  }
  if (app.got_subcommand(heatmap)) {
    return cmd_heatmap(signature_path, action_text, origin_x, origin_y, cell_size, width,
                       height, config_path, out_path);
  }
  if (app.got_subcommand(social)) return cmd_social_demo(out_path, seed);
  if (app.got_subcommand(list)) return cmd_list_actions();
  return 2;
}
