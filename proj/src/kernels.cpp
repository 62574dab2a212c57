#include "pistam/kernels.hpp"

#include <omp.h>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pistam::kernels {

namespace {

// Shared per-sample evaluator: one row of logp plus the row's logsumexp.
// Both drivers call this, which is what makes them bit-identical.
double sample_log_densities(const MixtureModel& m, const Eigen::VectorXd& x,
                            Eigen::MatrixXd& logp, Eigen::Index row) {
  const auto k = static_cast<Eigen::Index>(m.components().size());
  double max_lp = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < k; ++j) {
    const double lp = m.component_log_density(static_cast<int>(j), x);
    logp(row, j) = lp;
    if (lp > max_lp) max_lp = lp;
  }
  if (!std::isfinite(max_lp)) return -std::numeric_limits<double>::infinity();
  double acc = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) acc += std::exp(logp(row, j) - max_lp);
  return max_lp + std::log(acc);
}

}  // namespace

void estep_log_densities_serial(const MixtureModel& m,
                                std::span<const Eigen::VectorXd> samples,
                                Eigen::MatrixXd& logp, Eigen::VectorXd& loglik) {
  const auto n = static_cast<Eigen::Index>(samples.size());
  const auto k = static_cast<Eigen::Index>(m.components().size());
  logp.resize(n, k);
  loglik.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    loglik(i) = sample_log_densities(m, samples[static_cast<std::size_t>(i)], logp, i);
  }
}

void estep_log_densities_omp(const MixtureModel& m,
                             std::span<const Eigen::VectorXd> samples,
                             Eigen::MatrixXd& logp, Eigen::VectorXd& loglik) {
  if (omp_in_parallel()) {
    estep_log_densities_serial(m, samples, logp, loglik);
    return;
  }
  const auto n = static_cast<Eigen::Index>(samples.size());
  const auto k = static_cast<Eigen::Index>(m.components().size());
  logp.resize(n, k);
  loglik.resize(n);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    loglik(i) = sample_log_densities(m, samples[static_cast<std::size_t>(i)], logp, i);
  }
}

void estep_log_densities(const MixtureModel& m,
                         std::span<const Eigen::VectorXd> samples,
                         Eigen::MatrixXd& logp, Eigen::VectorXd& loglik) {
  estep_log_densities_omp(m, samples, logp, loglik);
}

void density_batch_serial(const MixtureModel& m,
                          std::span<const Eigen::VectorXd> points,
                          std::span<double> out) {
  if (out.size() != points.size()) throw std::invalid_argument("output size mismatch");
  for (std::size_t i = 0; i < points.size(); ++i) {
    out[i] = m.density(points[i]);
  }
}

void density_batch_omp(const MixtureModel& m, std::span<const Eigen::VectorXd> points,
                       std::span<double> out) {
  if (out.size() != points.size()) throw std::invalid_argument("output size mismatch");
  if (omp_in_parallel()) {
    density_batch_serial(m, points, out);
    return;
  }
  const auto n = static_cast<std::ptrdiff_t>(points.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = m.density(points[static_cast<std::size_t>(i)]);
  }
}

void density_batch(const MixtureModel& m, std::span<const Eigen::VectorXd> points,
                   std::span<double> out) {
  density_batch_omp(m, points, out);
}

}  // namespace pistam::kernels
