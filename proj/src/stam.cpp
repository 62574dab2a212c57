#include "pistam/stam.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "pistam/kernels.hpp"

namespace pistam {

namespace {

void validate_signature(const AffordanceSignature& sig) {
  if (sig.per_action.size() != static_cast<std::size_t>(kActionCount)) {
    throw std::invalid_argument("signature must cover all actions");
  }
  const int d = static_cast<int>(sig.projection.size());
  for (const auto& m : sig.per_action) {
    if (m.dim() != d) throw std::invalid_argument("signature model dimension mismatch");
  }
}

}  // namespace

Eigen::VectorXd project_state(const StateVector& s, std::span<const int> projection) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(projection.size()));
  for (std::size_t i = 0; i < projection.size(); ++i) {
    x(static_cast<Eigen::Index>(i)) = s[projection[i]];
  }
  return x;
}

double affordance_value(const StateVector& s, Action a, const AffordanceSignature& sig) {
  const auto& m = sig.per_action.at(static_cast<std::size_t>(index(a)));
  if (m.dim() == 0) throw std::invalid_argument("missing model for action");
  return m.density(project_state(s, sig.projection));
}

std::array<double, kActionCount> affordance_values(const StateVector& s,
                                                   const AffordanceSignature& sig) {
  validate_signature(sig);
  const Eigen::VectorXd x = project_state(s, sig.projection);
  std::array<double, kActionCount> values{};
  for (int a = 0; a < kActionCount; ++a) {
    values[static_cast<std::size_t>(a)] = sig.per_action[static_cast<std::size_t>(a)].density(x);
  }
  return values;
}

LegalitySample threshold_legal(const std::vector<double>& values, double epsilon, Rng& rng) {
  if (epsilon < 0.0 || epsilon > 1.0) throw std::invalid_argument("epsilon must be in [0, 1]");
  LegalitySample out;
  double vmax = 0.0;
  for (double v : values) vmax = std::max(vmax, v);
  out.lambda = 0.5 * vmax;
  for (std::size_t a = 0; a < values.size(); ++a) {
    if (values[a] > out.lambda) out.via_affordance.push_back(static_cast<Action>(a));
  }
  // Below-threshold actions get an independent epsilon draw each, in
  // ascending action order so the stream is reproducible.
  for (std::size_t a = 0; a < values.size(); ++a) {
    if (values[a] > out.lambda) continue;
    out.below_threshold += 1;
    if (rng.bernoulli(epsilon)) out.via_random.push_back(static_cast<Action>(a));
  }
  if (out.via_affordance.empty() && out.via_random.empty()) {
    // Degenerate all-zero case: nothing clears the strict threshold, so
    // every action is declared legal rather than stalling the search.
    for (std::size_t a = 0; a < values.size(); ++a) {
      out.via_affordance.push_back(static_cast<Action>(a));
    }
  }
  out.legal = out.via_affordance;
  out.legal.insert(out.legal.end(), out.via_random.begin(), out.via_random.end());
  std::sort(out.legal.begin(), out.legal.end());
  return out;
}

LegalitySample legal_actions(const StateVector& s, const AffordanceSignature& sig,
                             double epsilon, Rng& rng) {
  const auto values = affordance_values(s, sig);
  return threshold_legal(std::vector<double>(values.begin(), values.end()), epsilon, rng);
}

AffordanceSignature fit_signatures(const LabeledDataset& d, int n_components,
                                   std::uint64_t seed, std::span<const int> projection,
                                   const FitOptions& options) {
  if (d.empty()) throw std::invalid_argument("empty dataset");
  AffordanceSignature sig;
  sig.projection.assign(projection.begin(), projection.end());
  sig.per_action.resize(static_cast<std::size_t>(kActionCount));

  std::vector<std::vector<Eigen::VectorXd>> by_action(static_cast<std::size_t>(kActionCount));
  std::vector<Eigen::VectorXd> all;
  all.reserve(d.size());
  for (const auto& [s, a] : d) {
    Eigen::VectorXd x = project_state(s, projection);
    by_action[static_cast<std::size_t>(index(a))].push_back(x);
    all.push_back(std::move(x));
  }

  // Broad fallback for unlabeled actions: dataset mean and covariance, so
  // their affordance is weak but nonzero everywhere.
  const auto dim = static_cast<Eigen::Index>(projection.size());
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
  for (const auto& x : all) mean += x;
  mean /= static_cast<double>(all.size());
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& x : all) {
    const Eigen::VectorXd c = x - mean;
    cov.noalias() += c * c.transpose();
  }
  cov /= static_cast<double>(all.size());
  cov.diagonal().array() += options.reg_floor;
  const MixtureModel fallback(std::vector<GaussianComponent>{{1.0, mean, cov}});

  constexpr std::uint64_t kTagSignature = tag_hash("signature-action");
#pragma omp parallel for schedule(dynamic)
  for (int a = 0; a < kActionCount; ++a) {
    const auto& samples = by_action[static_cast<std::size_t>(a)];
    if (samples.empty()) {
      sig.per_action[static_cast<std::size_t>(a)] = fallback;
    } else {
      sig.per_action[static_cast<std::size_t>(a)] = gmm_fit_em(
          samples, n_components, derive_seed(seed, kTagSignature, static_cast<std::uint64_t>(a)),
          options);
    }
  }
  return sig;
}

AffordanceGrid compose_map(std::span<const AffordanceGrid> grids, ComposeMode mode) {
  if (grids.empty()) throw std::invalid_argument("no grids to compose");
  const AffordanceGrid& first = grids.front();
  for (const auto& g : grids) {
    if (g.origin_x != first.origin_x || g.origin_y != first.origin_y ||
        g.cell_size != first.cell_size || g.width != first.width ||
        g.height != first.height) {
      throw std::invalid_argument("grid geometry mismatch");
    }
  }
  AffordanceGrid out = first;
  if (mode == ComposeMode::Max) {
    for (const auto& g : grids.subspan(1)) {
      for (std::size_t i = 0; i < out.values.size(); ++i) {
        out.values[i] = std::max(out.values[i], g.values[i]);
      }
    }
  } else {
    for (const auto& g : grids.subspan(1)) {
      for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += g.values[i];
    }
    const double peak = *std::max_element(out.values.begin(), out.values.end());
    if (peak > 0.0) {
      for (double& v : out.values) v /= peak;
    }
  }
  return out;
}

AffordanceGrid rasterize(const AffordanceSignature& sig, Action a,
                         const StateVector& template_state, double origin_x,
                         double origin_y, double cell_size, int width, int height,
                         double target_x, double target_y) {
  validate_signature(sig);
  if (cell_size <= 0.0) throw std::invalid_argument("cell_size must be > 0");
  if (width < 1 || height < 1) throw std::invalid_argument("grid must be >= 1x1");
  AffordanceGrid grid;
  grid.action = a;
  grid.origin_x = origin_x;
  grid.origin_y = origin_y;
  grid.cell_size = cell_size;
  grid.width = width;
  grid.height = height;

  std::vector<Eigen::VectorXd> points;
  points.reserve(static_cast<std::size_t>(width) * height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      StateVector s = template_state;
      const double cx = origin_x + (x + 0.5) * cell_size;
      const double cy = origin_y + (y + 0.5) * cell_size;
      s[kBodyX] = cx;
      s[kBodyY] = cy;
      s[kTargetDistance] = std::hypot(cx - target_x, cy - target_y);
      points.push_back(project_state(s, sig.projection));
    }
  }
  grid.values.resize(points.size());
  kernels::density_batch(sig.per_action.at(static_cast<std::size_t>(index(a))), points,
                         grid.values);
  return grid;
}

void save_grid_csv(const AffordanceGrid& grid, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << "# action=" << action_name(grid.action) << " origin_x=" << fmt_g17(grid.origin_x)
    << " origin_y=" << fmt_g17(grid.origin_y) << " cell_size=" << fmt_g17(grid.cell_size)
    << " width=" << grid.width << " height=" << grid.height << '\n';
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) {
      if (x) f << ',';
      f << fmt_g17(grid.at(x, y));
    }
    f << '\n';
  }
  if (!f) throw std::runtime_error("write failed: " + path);
}

nlohmann::json signature_to_json(const AffordanceSignature& sig) {
  validate_signature(sig);
  nlohmann::json actions = nlohmann::json::object();
  for (int a = 0; a < kActionCount; ++a) {
    actions[std::to_string(a)] = mixture_to_json(sig.per_action[static_cast<std::size_t>(a)]);
  }
  return {{"version", 1},
          {"projection", sig.projection},
          {"actions", std::move(actions)}};
}

AffordanceSignature signature_from_json(const nlohmann::json& doc) {
  if (doc.at("version").get<int>() != 1) {
    throw std::runtime_error("unsupported signature document version");
  }
  AffordanceSignature sig;
  sig.projection = doc.at("projection").get<std::vector<int>>();
  sig.per_action.resize(static_cast<std::size_t>(kActionCount));
  const auto& actions = doc.at("actions");
  if (actions.size() != static_cast<std::size_t>(kActionCount)) {
    throw std::runtime_error("signature must cover all actions");
  }
  for (int a = 0; a < kActionCount; ++a) {
    sig.per_action[static_cast<std::size_t>(a)] =
        mixture_from_json(actions.at(std::to_string(a)));
  }
  validate_signature(sig);
  return sig;
}

void save_signature(const AffordanceSignature& sig, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << signature_to_json(sig).dump(2) << '\n';
  if (!f) throw std::runtime_error("write failed: " + path);
}

AffordanceSignature load_signature(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open signature: " + path);
  nlohmann::json doc;
  f >> doc;
  return signature_from_json(doc);
}

}  // namespace pistam
