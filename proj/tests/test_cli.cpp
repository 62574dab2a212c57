#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

const std::string kCli = PISTAM_CLI_PATH;

int run_cli(const std::string& args) {
  const int status = std::system((kCli + " " + args + " >/dev/null 2>&1").c_str());
  return WEXITSTATUS(status);
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("pistam_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_small_config(const fs::path& p, int iterations) {
  std::ofstream f(p);
  f << "[run]\n"
    << "iterations = " << iterations << "\n"
    << "rollin_timesteps = 3\n"
    << "d0_size = 30\n"
    << "eval_trials = 2\n"
    << "eval_episode_len = 5\n"
    << "[search]\n"
    << "horizon = 2\n"
    << "simulations = 6\n";
}

}  // namespace

TEST_CASE("list-actions prints the 27-row table") {
  TempDir tmp;
  const fs::path out = tmp.path / "actions.txt";
  const int status =
      std::system((kCli + " list-actions > " + out.string() + " 2>/dev/null").c_str());
  CHECK(WEXITSTATUS(status) == 0);
  const std::string text = read_file(out);
  CHECK(count_lines(text) == 27);
  CHECK(text.find("4 body_forward") != std::string::npos);
  CHECK(text.find("26 null") != std::string::npos);
}

TEST_CASE("missing config exits 2 without partial outputs") {
  TempDir tmp;
  const fs::path out = tmp.path / "run";
  CHECK(run_cli("train --config /nonexistent.ini --out " + out.string()) == 2);
  CHECK(!fs::exists(out));
}

TEST_CASE("usage errors exit 2") {
  CHECK(run_cli("train") == 2);             // missing --out
  CHECK(run_cli("no-such-subcommand") == 2);
}

TEST_CASE("train with N = 0 writes iteration-0 artifacts only") {
  TempDir tmp;
  const fs::path cfg = tmp.path / "cfg.ini";
  write_small_config(cfg, 0);
  const fs::path out = tmp.path / "run";
  REQUIRE(run_cli("train --config " + cfg.string() + " --out " + out.string() +
                  " --seed 7") == 0);
  CHECK(fs::exists(out / "policy_0.json"));
  CHECK(fs::exists(out / "signature_0.json"));
  CHECK(!fs::exists(out / "policy_1.json"));
  CHECK(fs::exists(out / "dataset.csv"));
  CHECK(fs::exists(out / "run_config"));
  const std::string metrics = read_file(out / "metrics.csv");
  CHECK(count_lines(metrics) == 1);  // header only
}

TEST_CASE("social demo emits the two 27-row affordance tables") {
  TempDir tmp;
  const fs::path out = tmp.path / "social";
  REQUIRE(run_cli("social-demo --out " + out.string() + " --seed 3") == 0);
  const std::string off = read_file(out / "affordance_attention0.csv");
  const std::string on = read_file(out / "affordance_attention1.csv");
  CHECK(count_lines(off) == 28);  // header + 27 actions
  CHECK(count_lines(on) == 28);
  CHECK(fs::exists(out / "signature_0.json"));
  CHECK(fs::exists(out / "prior_dataset.csv"));
}

TEST_CASE("heatmap geometry, determinism, and action validation") {
  TempDir tmp;
  const fs::path social = tmp.path / "social";
  REQUIRE(run_cli("social-demo --out " + social.string() + " --seed 3") == 0);
  const std::string sig = (social / "signature_0.json").string();

  const fs::path g1 = tmp.path / "grid1.csv";
  const fs::path g2 = tmp.path / "grid2.csv";
  REQUIRE(run_cli("heatmap --signature " + sig + " --action body_forward --out " +
                  g1.string()) == 0);
  REQUIRE(run_cli("heatmap --signature " + sig + " --action 4 --out " + g2.string()) == 0);

  const std::string text = read_file(g1);
  CHECK(count_lines(text) == 25);  // metadata line + 24 rows
  CHECK(text.rfind("# action=body_forward", 0) == 0);
  std::size_t commas = 0;
  for (char c : text) commas += c == ',';
  CHECK(commas == 24 * 23);  // 23 separators per 24-cell row
  CHECK(read_file(g1) == read_file(g2));  // identical bytes across invocations

  CHECK(run_cli("heatmap --signature " + sig + " --action flying --out " +
                (tmp.path / "bad.csv").string()) == 2);
}

TEST_CASE("eval writes stats deterministically") {
  TempDir tmp;
  const fs::path cfg = tmp.path / "cfg.ini";
  write_small_config(cfg, 0);
  const fs::path out = tmp.path / "run";
  REQUIRE(run_cli("train --config " + cfg.string() + " --out " + out.string() +
                  " --seed 5") == 0);
  const std::string policy = (out / "policy_0.json").string();
  const fs::path s1 = tmp.path / "stats1.csv";
  const fs::path s2 = tmp.path / "stats2.csv";
  REQUIRE(run_cli("eval --policy " + policy + " --trials 3 --episode-len 6 --seed 11 --out " +
                  s1.string()) == 0);
  REQUIRE(run_cli("eval --policy " + policy + " --trials 3 --episode-len 6 --seed 11 --out " +
                  s2.string()) == 0);
  const std::string stats = read_file(s1);
  CHECK(stats.rfind("mean_reward,", 0) == 0);
  CHECK(count_lines(stats) == 2);
  CHECK(stats == read_file(s2));
  CHECK(fs::exists(tmp.path / "stats1.csv.cfg"));
}
