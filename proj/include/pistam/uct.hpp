#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "pistam/mdp.hpp"
#include "pistam/sim.hpp"
#include "pistam/stam.hpp"

namespace pistam {

struct SearchConfig {
  int horizon = 4;       // H, depth of each simulation episode
  int simulations = 64;  // K, episodes per root; K=1 gives the single-pass variant
  // C in the UCB bonus. Rewards live in [0, 1] with leaf gaps around 0.1-0.3,
  // so sqrt(2) drowns the signal at K = 64; 0.25 concentrates visits on the
  // depth-H optimum while unvisited-first still guarantees full coverage.
  double exploration = 0.25;
  double epsilon = 0.3;  // below-threshold random-legalization probability
  double rho = 0.05;     // label-dataset dedup threshold
  std::uint64_t seed = 0;
  double discount = 1.0;  // per-level attenuation of the leaf reward
  int workers = 1;        // >1 splits episodes across OpenMP workers
  bool rho_merge_paths = false;  // share nodes falling in the same rho grid cell
};

struct ExpansionStats {
  // Per-visit counters: each time the search sits at a node it simulates
  // every legal action once, so evals_total is the simulator-call count that
  // the branching and timing comparisons are about.
  std::uint64_t visits = 0;
  std::uint64_t evals_total = 0;
  std::uint64_t evals_affordance = 0;
  std::uint64_t evals_random = 0;

  // Per-node counters: the legal set (and its epsilon draws) is computed
  // once when a node is first created.
  std::uint64_t nodes_created = 0;
  std::uint64_t epsilon_attempts = 0;  // below-threshold actions that drew
  std::uint64_t epsilon_admitted = 0;  // ... and were admitted

  std::uint64_t aborted_episodes = 0;
  std::uint64_t root_visits = 0;  // sum of n(s0, a); K minus aborted episodes
  double wallclock_ms = 0.0;

  void merge(const ExpansionStats& other);
  double mean_evals_per_visit() const {
    return visits ? static_cast<double>(evals_total) / static_cast<double>(visits) : 0.0;
  }
};

// CSV row shape shared by the per-root stats file.
void write_expansion_stats_header(std::ostream& out);
void write_expansion_stats_row(std::ostream& out, int iteration, int root_index,
                               const ExpansionStats& stats);

struct SearchResult {
  LabeledDataset labels;  // greedy path, at most H pairs, rho-deduplicated
  ExpansionStats stats;
};

// Eq.-style UCB score: value mean plus C * sqrt(log(n_total) / n_sa);
// unvisited actions score +infinity so they are always tried first.
double ucb_score(double value_mean, std::uint64_t n_sa, std::uint64_t n_s_total, double c);

// Depth-limited UCT from the environment's current state. With sig null every
// action is legal (baseline mode); otherwise branching is restricted to the
// affordance-legal set. The environment is returned to its entry state.
// Episodes that throw are aborted and retried with the remaining budget; if
// every episode fails a std::runtime_error propagates.
SearchResult uct_search(Simulator& env, const AffordanceSignature* sig,
                        const SearchConfig& cfg);

}  // namespace pistam
