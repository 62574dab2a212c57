// Compares the serial reference kernels against their OpenMP counterparts and
// reports wall times plus the observed speedup. Not a correctness test (the
// unit suite asserts bit-identical outputs); run manually:
//
//   ./bench_kernels [n_points]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "pistam/gmm.hpp"
#include "pistam/kernels.hpp"
#include "pistam/loop.hpp"
#include "pistam/util.hpp"

using namespace pistam;

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

MixtureModel random_model(Rng& rng, int dim, int k) {
  std::vector<GaussianComponent> comps;
  double wsum = 0.0;
  for (int j = 0; j < k; ++j) {
    GaussianComponent c;
    c.weight = rng.uniform(0.2, 1.0);
    wsum += c.weight;
    c.mean = Eigen::VectorXd::NullaryExpr(dim, [&](Eigen::Index) { return rng.uniform(-2, 2); });
    Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(
        dim, dim, [&](Eigen::Index, Eigen::Index) { return rng.uniform(-0.5, 0.5); });
    c.covariance = a * a.transpose() + Eigen::MatrixXd::Identity(dim, dim) * 0.5;
    comps.push_back(std::move(c));
  }
  for (auto& c : comps) c.weight /= wsum;
  return MixtureModel(std::move(comps));
}

template <typename F>
double best_of(int reps, F&& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    best = std::min(best, ms_since(t0));
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  const int n = argc > 1 ? std::atoi(argv[1]) : 20000;
  std::printf("threads: %d, points: %d\n", omp_get_max_threads(), n);

  Rng rng(1);
  const int dim = 18;
  const MixtureModel model = random_model(rng, dim, 3);
  std::vector<Eigen::VectorXd> points;
  points.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    points.push_back(
        Eigen::VectorXd::NullaryExpr(dim, [&](Eigen::Index) { return rng.uniform(-3, 3); }));
  }

  Eigen::MatrixXd logp;
  Eigen::VectorXd loglik;
  const double estep_serial = best_of(5, [&] {
    kernels::estep_log_densities_serial(model, points, logp, loglik);
  });
  const double estep_omp = best_of(5, [&] {
    kernels::estep_log_densities_omp(model, points, logp, loglik);
  });
  std::printf("estep_log_densities   serial %8.2f ms   omp %8.2f ms   speedup %.2fx\n",
              estep_serial, estep_omp, estep_serial / estep_omp);

  std::vector<double> out(points.size());
  const double batch_serial =
      best_of(5, [&] { kernels::density_batch_serial(model, points, out); });
  const double batch_omp =
      best_of(5, [&] { kernels::density_batch_omp(model, points, out); });
  std::printf("density_batch         serial %8.2f ms   omp %8.2f ms   speedup %.2fx\n",
              batch_serial, batch_omp, batch_serial / batch_omp);

  // End-to-end: policy evaluation trials run on independent environments.
  RunConfig cfg;
  cfg.d0_size = 60;
  HandoverEnv env(cfg.env);
  const LabeledDataset d0 = initial_dataset(cfg, env);
  const PolicyModel policy = train_policy(d0, 3, 1);
  const double eval_par = best_of(3, [&] {
    (void)evaluate_policy(policy, cfg.env, 16, 30, 9);
  });
  omp_set_num_threads(1);
  const double eval_ser = best_of(3, [&] {
    (void)evaluate_policy(policy, cfg.env, 16, 30, 9);
  });
  std::printf("evaluate_policy(16)   serial %8.2f ms   omp %8.2f ms   speedup %.2fx\n",
              eval_ser, eval_par, eval_ser / eval_par);
  return 0;
}
