#include "pistam/uct.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <utility>

#include "pistam/util.hpp"

namespace pistam {

namespace {

constexpr std::uint64_t kTagWorker = tag_hash("uct-worker");

struct Node;

struct Edge {
  int action = 0;
  bool via_random = false;
  std::uint64_t n = 0;
  double value_sum = 0.0;
  Node* child = nullptr;
};

struct Node {
  Snapshot snap;
  StateVector state;
  int depth = 0;
  std::uint64_t total_visits = 0;
  std::vector<Edge> edges;  // sorted by action
};

// Grid key for the optional cross-path merge: nodes whose normalized states
// fall in the same rho-sized cell (at equal depth) share statistics.
std::vector<std::int64_t> rho_cell_key(const StateVector& s, double rho, int depth) {
  const StateVector n = normalize_state(s, StateBounds::defaults());
  std::vector<std::int64_t> key(kStateDim + 1);
  key[0] = depth;
  for (int i = 0; i < kStateDim; ++i) {
    key[static_cast<std::size_t>(i) + 1] =
        rho > 0 ? static_cast<std::int64_t>(std::floor(n[i] / rho)) : 0;
  }
  return key;
}

class Tree {
 public:
  Tree(Simulator& env, const AffordanceSignature* sig, const SearchConfig& cfg,
       std::uint64_t rng_seed)
      : env_(env), sig_(sig), cfg_(cfg), rng_(rng_seed) {
    if (sig_ && env_.action_count() != kActionCount) {
      throw std::invalid_argument("affordance gating requires the 27-action space");
    }
    root_ = make_node(0);
  }

  Node* root() { return root_; }
  ExpansionStats& stats() { return stats_; }

  void run_episode() {
    Node* node = root_;
    path_.clear();
    double leaf_reward = 0.0;
    for (int h = 0; h < cfg_.horizon; ++h) {
      const std::size_t branch = node->edges.size();
      stats_.visits += 1;
      stats_.evals_total += branch;
      child_rewards_.resize(branch);
      for (std::size_t i = 0; i < branch; ++i) {
        const Edge& e = node->edges[i];
        if (e.via_random) {
          stats_.evals_random += 1;
        } else {
          stats_.evals_affordance += 1;
        }
        env_.restore(node->snap);
        env_.step(e.action);
        child_rewards_[i] = env_.reward();
      }
      const std::size_t pick = select_edge(*node);
      path_.push_back({node, pick});
      if (h == cfg_.horizon - 1) {
        leaf_reward = child_rewards_[pick];
        break;
      }
      Edge& e = node->edges[pick];
      if (!e.child) {
        env_.restore(node->snap);
        env_.step(e.action);
        e.child = make_node(node->depth + 1);
      }
      node = e.child;
    }
    // Back-propagate the final reward of the episode to every traversed edge.
    double v = leaf_reward;
    for (auto it = path_.rbegin(); it != path_.rend(); ++it) {
      Edge& e = it->first->edges[it->second];
      e.n += 1;
      e.value_sum += v;
      it->first->total_visits += 1;
      v *= cfg_.discount;
    }
  }

  // Greedy path by visit count, ties to the lowest action index. A count of
  // one is indistinguishable from the mandatory first-visit sweep, so the
  // path stops once the best edge has fewer than two visits; labels keep the
  // <= H bound either way.
  LabeledDataset greedy_labels() const {
    LabeledDataset labels(cfg_.rho);
    const Node* node = root_;
    for (int h = 0; h < cfg_.horizon; ++h) {
      if (!node || node->total_visits == 0) break;
      const Edge* best = nullptr;
      for (const Edge& e : node->edges) {
        if (!best || e.n > best->n) best = &e;
      }
      if (!best || best->n < 2) break;
      labels.insert(node->state, action_at(best->action));
      node = best->child;
    }
    return labels;
  }

  // Absorbs another worker's tree: statistics are summed edge-by-edge keyed
  // on the action id, child subtrees merged recursively.
  void absorb(Tree&& other) {
    merge_nodes(root_, other.root_);
    stats_.merge(other.stats_);
    for (auto& n : other.pool_) pool_.push_back(std::move(n));
  }

 private:
  Node* make_node(int depth) {
    if (cfg_.rho_merge_paths) {
      auto key = rho_cell_key(env_.state(), cfg_.rho, depth);
      if (auto it = merged_.find(key); it != merged_.end()) return it->second;
      Node* node = create_node(depth);
      merged_.emplace(std::move(key), node);
      return node;
    }
    return create_node(depth);
  }

  Node* create_node(int depth) {
    auto owned = std::make_unique<Node>();
    Node* node = owned.get();
    pool_.push_back(std::move(owned));
    node->snap = env_.snapshot();
    node->state = env_.state();
    node->depth = depth;
    stats_.nodes_created += 1;
    if (sig_) {
      const LegalitySample ls = legal_actions(node->state, *sig_, cfg_.epsilon, rng_);
      stats_.epsilon_attempts += static_cast<std::uint64_t>(ls.below_threshold);
      stats_.epsilon_admitted += ls.via_random.size();
      for (Action a : ls.via_affordance) node->edges.push_back({index(a), false});
      for (Action a : ls.via_random) node->edges.push_back({index(a), true});
      std::sort(node->edges.begin(), node->edges.end(),
                [](const Edge& x, const Edge& y) { return x.action < y.action; });
    } else {
      for (int a = 0; a < env_.action_count(); ++a) node->edges.push_back({a, false});
    }
    return node;
  }

  std::size_t select_edge(const Node& node) const {
    for (std::size_t i = 0; i < node.edges.size(); ++i) {
      if (node.edges[i].n == 0) return i;  // unvisited first, lowest index
    }
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < node.edges.size(); ++i) {
      const Edge& e = node.edges[i];
      const double score =
          ucb_score(e.value_sum / static_cast<double>(e.n), e.n, node.total_visits,
                    cfg_.exploration);
      if (score > best_score) {
        best_score = score;
        best = i;
      }
    }
    return best;
  }

  void merge_nodes(Node* dst, Node* src) {
    dst->total_visits += src->total_visits;
    for (Edge& se : src->edges) {
      auto it = std::find_if(dst->edges.begin(), dst->edges.end(),
                             [&](const Edge& de) { return de.action == se.action; });
      if (it == dst->edges.end()) {
        dst->edges.push_back(se);
        std::sort(dst->edges.begin(), dst->edges.end(),
                  [](const Edge& x, const Edge& y) { return x.action < y.action; });
        continue;
      }
      it->n += se.n;
      it->value_sum += se.value_sum;
      if (it->child && se.child) {
        merge_nodes(it->child, se.child);
      } else if (!it->child && se.child) {
        it->child = se.child;
      }
    }
  }

  Simulator& env_;
  const AffordanceSignature* sig_;
  const SearchConfig& cfg_;
  Rng rng_;
  ExpansionStats stats_;
  Node* root_ = nullptr;
  std::vector<std::unique_ptr<Node>> pool_;
  std::map<std::vector<std::int64_t>, Node*> merged_;
  std::vector<std::pair<Node*, std::size_t>> path_;
  std::vector<double> child_rewards_;
};

void run_episodes(Tree& tree, Simulator& env, const Snapshot& entry, int episodes) {
  std::uint64_t failures = 0;
  for (int ep = 0; ep < episodes; ++ep) {
    try {
      tree.run_episode();
    } catch (const std::exception&) {
      tree.stats().aborted_episodes += 1;
      ++failures;
      env.restore(entry);
    }
  }
  if (failures == static_cast<std::uint64_t>(episodes)) {
    throw std::runtime_error("all simulation episodes failed");
  }
}

}  // namespace

void ExpansionStats::merge(const ExpansionStats& other) {
  visits += other.visits;
  evals_total += other.evals_total;
  evals_affordance += other.evals_affordance;
  evals_random += other.evals_random;
  nodes_created += other.nodes_created;
  epsilon_attempts += other.epsilon_attempts;
  epsilon_admitted += other.epsilon_admitted;
  aborted_episodes += other.aborted_episodes;
  root_visits += other.root_visits;
  wallclock_ms += other.wallclock_ms;
}

void write_expansion_stats_header(std::ostream& out) {
  out << "iteration,root_index,evals_affordance,evals_random,evals_total,wallclock_ms\n";
}

void write_expansion_stats_row(std::ostream& out, int iteration, int root_index,
                               const ExpansionStats& stats) {
  out << iteration << ',' << root_index << ',' << stats.evals_affordance << ','
      << stats.evals_random << ',' << stats.evals_total << ','
      << fmt_g17(stats.wallclock_ms) << '\n';
}

double ucb_score(double value_mean, std::uint64_t n_sa, std::uint64_t n_s_total, double c) {
  if (n_sa == 0) return std::numeric_limits<double>::infinity();
  return value_mean +
         c * std::sqrt(std::log(static_cast<double>(n_s_total)) / static_cast<double>(n_sa));
}

SearchResult uct_search(Simulator& env, const AffordanceSignature* sig,
                        const SearchConfig& cfg) {
  if (cfg.horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (cfg.simulations < 1) throw std::invalid_argument("simulations must be >= 1");
  if (cfg.exploration < 0) throw std::invalid_argument("exploration must be >= 0");
  const auto t0 = std::chrono::steady_clock::now();
  const Snapshot entry = env.snapshot();

  Tree main(env, sig, cfg, derive_seed(cfg.seed, kTagWorker, 0));
  const int workers = std::max(1, cfg.workers);
  if (workers == 1) {
    run_episodes(main, env, entry, cfg.simulations);
  } else {
    // Each worker owns a cloned environment, an independent random stream and
    // its own tree; statistics are merged once all episodes finished.
    std::vector<std::unique_ptr<Tree>> trees(static_cast<std::size_t>(workers));
    std::vector<std::unique_ptr<Simulator>> envs(static_cast<std::size_t>(workers));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
#pragma omp parallel for schedule(static)
    for (int w = 0; w < workers; ++w) {
      const auto wi = static_cast<std::size_t>(w);
      try {
        envs[wi] = env.clone();
        envs[wi]->restore(entry);
        trees[wi] = std::make_unique<Tree>(*envs[wi], sig, cfg,
                                           derive_seed(cfg.seed, kTagWorker,
                                                       static_cast<std::uint64_t>(w)));
        const int share = cfg.simulations / workers + (w < cfg.simulations % workers ? 1 : 0);
        run_episodes(*trees[wi], *envs[wi], entry, share);
      } catch (...) {
        errors[wi] = std::current_exception();
      }
    }
    for (const auto& err : errors) {
      if (err) std::rethrow_exception(err);
    }
    for (auto& t : trees) main.absorb(std::move(*t));
  }

  SearchResult result{main.greedy_labels(), main.stats()};
  result.stats.root_visits = main.root()->total_visits;
  env.restore(entry);
  result.stats.wallclock_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
          .count();
  return result;
}

}  // namespace pistam
