#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "pistam/gmm.hpp"

// Data-parallel inner loops of the numeric core. Each kernel has an OpenMP
// implementation and a serial reference; both call the same per-element
// evaluator and only write disjoint outputs, so they agree bit-for-bit
// regardless of thread count. The *_omp entry points fall back to the serial
// path when already inside a parallel region. bench_kernels compares them.
namespace pistam::kernels {

// E-step inputs: per-sample per-component log joint densities
// logp(i, j) = log(w_j N_j(x_i)) and per-sample mixture log-likelihood
// loglik(i) = logsumexp_j logp(i, j). Reductions over samples stay with the
// caller so that summation order is fixed.
void estep_log_densities_serial(const MixtureModel& m,
                                std::span<const Eigen::VectorXd> samples,
                                Eigen::MatrixXd& logp, Eigen::VectorXd& loglik);
void estep_log_densities_omp(const MixtureModel& m,
                             std::span<const Eigen::VectorXd> samples,
                             Eigen::MatrixXd& logp, Eigen::VectorXd& loglik);
void estep_log_densities(const MixtureModel& m,
                         std::span<const Eigen::VectorXd> samples,
                         Eigen::MatrixXd& logp, Eigen::VectorXd& loglik);

// Mixture density at many probe points (heat-map rasterization core).
void density_batch_serial(const MixtureModel& m,
                          std::span<const Eigen::VectorXd> points,
                          std::span<double> out);
void density_batch_omp(const MixtureModel& m,
                       std::span<const Eigen::VectorXd> points,
                       std::span<double> out);
void density_batch(const MixtureModel& m, std::span<const Eigen::VectorXd> points,
                   std::span<double> out);

}  // namespace pistam::kernels
