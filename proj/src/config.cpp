#include "pistam/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "pistam/util.hpp"

namespace pistam {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad numeric value for '" + key + "': " + value);
  }
}

int parse_int(const std::string& key, const std::string& value) {
  int v = 0;
  const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || p != value.data() + value.size()) {
    throw ConfigError("bad integer value for '" + key + "': " + value);
  }
  return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || p != value.data() + value.size()) {
    throw ConfigError("bad unsigned value for '" + key + "': " + value);
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("bad boolean value for '" + key + "': " + value);
}

void apply_run_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "iterations") cfg.iterations = parse_int(key, value);
  else if (key == "rollin_timesteps") cfg.rollin_timesteps = parse_int(key, value);
  else if (key == "n_components") cfg.n_components = parse_int(key, value);
  else if (key == "rho") cfg.rho = parse_double(key, value);
  else if (key == "master_seed") cfg.master_seed = parse_u64(key, value);
  else if (key == "baseline_mode") cfg.baseline_mode = parse_bool(key, value);
  else if (key == "prior_dataset") cfg.prior_dataset_path = value;
  else if (key == "d0_size") cfg.d0_size = parse_int(key, value);
  else if (key == "eval_trials") cfg.eval_trials = parse_int(key, value);
  else if (key == "eval_episode_len") cfg.eval_episode_len = parse_int(key, value);
  else if (key == "epsilon_decay") cfg.epsilon_decay = parse_bool(key, value);
  else if (key == "uniform_random_pi0") cfg.uniform_random_pi0 = parse_bool(key, value);
  else throw ConfigError("unknown key in [run]: " + key);
}

void apply_search_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "horizon") cfg.search.horizon = parse_int(key, value);
  else if (key == "simulations") cfg.search.simulations = parse_int(key, value);
  else if (key == "exploration") cfg.search.exploration = parse_double(key, value);
  else if (key == "epsilon") cfg.search.epsilon = parse_double(key, value);
  else if (key == "discount") cfg.search.discount = parse_double(key, value);
  else if (key == "workers") cfg.search.workers = parse_int(key, value);
  else if (key == "rho_merge_paths") cfg.search.rho_merge_paths = parse_bool(key, value);
  else throw ConfigError("unknown key in [search]: " + key);
}

void apply_env_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  EnvConfig& e = cfg.env;
  if (key == "step_translate") e.step_translate = parse_double(key, value);
  else if (key == "step_rotate") e.step_rotate = parse_double(key, value);
  else if (key == "step_arm") e.step_arm = parse_double(key, value);
  else if (key == "step_head") e.step_head = parse_double(key, value);
  else if (key == "arm_reach_max") e.arm_reach_max = parse_double(key, value);
  else if (key == "target_x") e.target_x = parse_double(key, value);
  else if (key == "target_y") e.target_y = parse_double(key, value);
  else if (key == "target_z") e.target_z = parse_double(key, value);
  else if (key == "grasp_distance") e.grasp_distance = parse_double(key, value);
  else if (key == "camera_fov") e.camera_fov = parse_double(key, value);
  else if (key == "attention_flip_prob") e.attention_flip_prob = parse_double(key, value);
  else if (key == "w_dist") e.w_dist = parse_double(key, value);
  else if (key == "w_center") e.w_center = parse_double(key, value);
  else if (key == "w_hand_penalty") e.w_hand_penalty = parse_double(key, value);
  else if (key == "dist_scale") e.dist_scale = parse_double(key, value);
  else if (key == "social_rule") e.social_rule_enabled = parse_bool(key, value);
  else if (key == "delta_min") e.delta_min = parse_double(key, value);
  else if (key == "delta_max") e.delta_max = parse_double(key, value);
  else throw ConfigError("unknown key in [env]: " + key);
}

}  // namespace

RunConfig parse_run_config(const std::string& text,
                           std::map<std::string, std::string>* cli_section) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError("malformed section at line " + std::to_string(lineno));
      section = t.substr(1, t.size() - 2);
      if (section != "run" && section != "search" && section != "env" && section != "cli") {
        throw ConfigError("unknown section: [" + section + "]");
      }
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("expected key = value at line " + std::to_string(lineno));
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key at line " + std::to_string(lineno));
    if (section == "run") apply_run_key(cfg, key, value);
    else if (section == "search") apply_search_key(cfg, key, value);
    else if (section == "env") apply_env_key(cfg, key, value);
    else if (section == "cli") {
      if (cli_section) (*cli_section)[key] = value;
    } else {
      throw ConfigError("key outside of any section at line " + std::to_string(lineno));
    }
  }
  return cfg;
}

std::string serialize_run_config(const RunConfig& cfg,
                                 const std::map<std::string, std::string>& cli_section) {
  std::ostringstream out;
  out << "[run]\n";
  out << "iterations = " << cfg.iterations << '\n';
  out << "rollin_timesteps = " << cfg.rollin_timesteps << '\n';
  out << "n_components = " << cfg.n_components << '\n';
  out << "rho = " << fmt_g17(cfg.rho) << '\n';
  out << "master_seed = " << cfg.master_seed << '\n';
  out << "baseline_mode = " << (cfg.baseline_mode ? "true" : "false") << '\n';
  out << "prior_dataset = " << cfg.prior_dataset_path << '\n';
  out << "d0_size = " << cfg.d0_size << '\n';
  out << "eval_trials = " << cfg.eval_trials << '\n';
  out << "eval_episode_len = " << cfg.eval_episode_len << '\n';
  out << "epsilon_decay = " << (cfg.epsilon_decay ? "true" : "false") << '\n';
  out << "uniform_random_pi0 = " << (cfg.uniform_random_pi0 ? "true" : "false") << '\n';
  out << "\n[search]\n";
  out << "horizon = " << cfg.search.horizon << '\n';
  out << "simulations = " << cfg.search.simulations << '\n';
  out << "exploration = " << fmt_g17(cfg.search.exploration) << '\n';
  out << "epsilon = " << fmt_g17(cfg.search.epsilon) << '\n';
  out << "discount = " << fmt_g17(cfg.search.discount) << '\n';
  out << "workers = " << cfg.search.workers << '\n';
  out << "rho_merge_paths = " << (cfg.search.rho_merge_paths ? "true" : "false") << '\n';
  out << "\n[env]\n";
  out << "step_translate = " << fmt_g17(cfg.env.step_translate) << '\n';
  out << "step_rotate = " << fmt_g17(cfg.env.step_rotate) << '\n';
  out << "step_arm = " << fmt_g17(cfg.env.step_arm) << '\n';
  out << "step_head = " << fmt_g17(cfg.env.step_head) << '\n';
  out << "arm_reach_max = " << fmt_g17(cfg.env.arm_reach_max) << '\n';
  out << "target_x = " << fmt_g17(cfg.env.target_x) << '\n';
  out << "target_y = " << fmt_g17(cfg.env.target_y) << '\n';
  out << "target_z = " << fmt_g17(cfg.env.target_z) << '\n';
  out << "grasp_distance = " << fmt_g17(cfg.env.grasp_distance) << '\n';
  out << "camera_fov = " << fmt_g17(cfg.env.camera_fov) << '\n';
  out << "attention_flip_prob = " << fmt_g17(cfg.env.attention_flip_prob) << '\n';
  out << "w_dist = " << fmt_g17(cfg.env.w_dist) << '\n';
  out << "w_center = " << fmt_g17(cfg.env.w_center) << '\n';
  out << "w_hand_penalty = " << fmt_g17(cfg.env.w_hand_penalty) << '\n';
  out << "dist_scale = " << fmt_g17(cfg.env.dist_scale) << '\n';
  out << "social_rule = " << (cfg.env.social_rule_enabled ? "true" : "false") << '\n';
  out << "delta_min = " << fmt_g17(cfg.env.delta_min) << '\n';
  out << "delta_max = " << fmt_g17(cfg.env.delta_max) << '\n';
  if (!cli_section.empty()) {
    out << "\n[cli]\n";
    for (const auto& [k, v] : cli_section) out << k << " = " << v << '\n';
  }
  return out.str();
}

RunConfig load_run_config(const std::string& path,
                          std::map<std::string, std::string>* cli_section) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_run_config(buf.str(), cli_section);
}

void save_run_config(const RunConfig& cfg, const std::string& path,
                     const std::map<std::string, std::string>& cli_section) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << serialize_run_config(cfg, cli_section);
  if (!f) throw std::runtime_error("write failed: " + path);
}

}  // namespace pistam
