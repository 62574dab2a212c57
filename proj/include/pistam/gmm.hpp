#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <json.hpp>

namespace pistam {

// Diagonal loading applied every M-step and to fallback covariances; keeps
// 0/1 flag dimensions from producing singular covariances.
inline constexpr double kCovRegFloor = 1e-6;

struct GaussianComponent {
  double weight = 1.0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

// Immutable after construction; per-component Cholesky factors are
// precomputed so density evaluation is cheap and concurrently callable.
class MixtureModel {
 public:
  MixtureModel() = default;
  explicit MixtureModel(std::vector<GaussianComponent> components);

  int dim() const { return dim_; }
  const std::vector<GaussianComponent>& components() const { return components_; }

  // log(weight_j * N(x; mean_j, cov_j))
  double component_log_density(int j, const Eigen::VectorXd& x) const;

  // log sum_j weight_j * N_j(x), computed with a log-sum-exp.
  double log_density(const Eigen::VectorXd& x) const;

  // sum_j weight_j * N_j(x); >= 0, not capped at 1.
  double density(const Eigen::VectorXd& x) const;

 private:
  int dim_ = 0;
  std::vector<GaussianComponent> components_;
  std::vector<Eigen::MatrixXd> chol_;       // lower Cholesky factor per component
  std::vector<double> log_norm_;            // log weight - 0.5(d log 2pi + log det)
};

double gmm_density(const Eigen::VectorXd& x, const MixtureModel& m);

struct FitOptions {
  int max_iters = 200;
  double tol = 1e-6;  // relative log-likelihood improvement
  double reg_floor = kCovRegFloor;
};

// Log-likelihood trace of the fitted parameter sequence, for monotonicity
// audits: log_likelihoods[t] is evaluated before M-step t.
struct FitReport {
  int iterations = 0;
  bool converged = false;
  std::vector<double> log_likelihoods;
};

// EM with k-means++ seeding from the provided seed. Deterministic: the same
// samples, seed, and options give a bit-identical model regardless of the
// OpenMP thread count. Effective component count is min(n_components, n).
// Throws std::invalid_argument("empty class") on empty input.
MixtureModel gmm_fit_em(const std::vector<Eigen::VectorXd>& samples, int n_components,
                        std::uint64_t seed, const FitOptions& options = {},
                        FitReport* report = nullptr);

// argmax over classes of prior * density, in log space. Classes are visited
// in the given order and ties keep the earliest, so callers pass classes in
// ascending id order to get the lowest-id tie-break.
int classify_generative(const Eigen::VectorXd& x,
                        std::span<const MixtureModel* const> class_models,
                        std::span<const double> class_priors);

// Versioned JSON document: {version, dim, components:[{weight, mean, cov}]}.
nlohmann::json mixture_to_json(const MixtureModel& m);
MixtureModel mixture_from_json(const nlohmann::json& doc);

}  // namespace pistam
