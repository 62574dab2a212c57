#include "pistam/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pistam/kernels.hpp"
#include "pistam/util.hpp"

namespace pistam {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

void validate_component(const GaussianComponent& c, int dim) {
  if (c.mean.size() != dim || c.covariance.rows() != dim || c.covariance.cols() != dim) {
    throw std::invalid_argument("mixture component dimension mismatch");
  }
  if (!(c.weight > 0.0) || c.weight > 1.0 + 1e-12) {
    throw std::invalid_argument("component weight must be in (0, 1]");
  }
  const double scale = std::max(1.0, c.covariance.cwiseAbs().maxCoeff());
  if ((c.covariance - c.covariance.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw std::invalid_argument("covariance is not symmetric");
  }
}

Eigen::MatrixXd sample_covariance(const std::vector<Eigen::VectorXd>& samples,
                                  const Eigen::VectorXd& mean, double reg_floor) {
  const auto d = mean.size();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  for (const auto& x : samples) {
    const Eigen::VectorXd c = x - mean;
    cov.noalias() += c * c.transpose();
  }
  cov /= static_cast<double>(samples.size());
  cov.diagonal().array() += reg_floor;
  return cov;
}

// k-means++ seeding: first center uniform, then D^2-weighted draws.
std::vector<Eigen::VectorXd> kmeanspp_means(const std::vector<Eigen::VectorXd>& samples,
                                            int k, Rng& rng) {
  const int n = static_cast<int>(samples.size());
  std::vector<Eigen::VectorXd> means;
  means.reserve(static_cast<std::size_t>(k));
  means.push_back(samples[static_cast<std::size_t>(rng.uniform_int(n))]);
  std::vector<double> d2(static_cast<std::size_t>(n));
  while (static_cast<int>(means.size()) < k) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& mu : means) {
        best = std::min(best, (samples[static_cast<std::size_t>(i)] - mu).squaredNorm());
      }
      d2[static_cast<std::size_t>(i)] = best;
      total += best;
    }
    int pick;
    if (total > 0.0) {
      const double r = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (int i = 0; i < n; ++i) {
        acc += d2[static_cast<std::size_t>(i)];
        if (r < acc) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.uniform_int(n);  // all remaining points coincide with a center
    }
    means.push_back(samples[static_cast<std::size_t>(pick)]);
  }
  return means;
}

}  // namespace

MixtureModel::MixtureModel(std::vector<GaussianComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw std::invalid_argument("mixture needs >= 1 component");
  dim_ = static_cast<int>(components_.front().mean.size());
  double weight_sum = 0.0;
  chol_.reserve(components_.size());
  log_norm_.reserve(components_.size());
  for (const auto& c : components_) {
    validate_component(c, dim_);
    weight_sum += c.weight;
    Eigen::LLT<Eigen::MatrixXd> llt(c.covariance);
    if (llt.info() != Eigen::Success) {
      throw std::invalid_argument("covariance is not positive definite");
    }
    Eigen::MatrixXd lower = llt.matrixL();
    const double log_det_half = lower.diagonal().array().log().sum();
    log_norm_.push_back(std::log(c.weight) - 0.5 * dim_ * kLog2Pi - log_det_half);
    chol_.push_back(std::move(lower));
  }
  if (std::abs(weight_sum - 1.0) > 1e-9) {
    throw std::invalid_argument("component weights must sum to 1");
  }
}

double MixtureModel::component_log_density(int j, const Eigen::VectorXd& x) const {
  const auto k = static_cast<std::size_t>(j);
  const Eigen::VectorXd y =
      chol_[k].triangularView<Eigen::Lower>().solve(x - components_[k].mean);
  return log_norm_[k] - 0.5 * y.squaredNorm();
}

double MixtureModel::log_density(const Eigen::VectorXd& x) const {
  if (static_cast<int>(x.size()) != dim_) {
    throw std::invalid_argument("dimension mismatch in density evaluation");
  }
  double max_lp = -std::numeric_limits<double>::infinity();
  std::vector<double> lp(components_.size());
  for (std::size_t j = 0; j < components_.size(); ++j) {
    lp[j] = component_log_density(static_cast<int>(j), x);
    max_lp = std::max(max_lp, lp[j]);
  }
  if (!std::isfinite(max_lp)) return -std::numeric_limits<double>::infinity();
  double acc = 0.0;
  for (double v : lp) acc += std::exp(v - max_lp);
  return max_lp + std::log(acc);
}

double MixtureModel::density(const Eigen::VectorXd& x) const {
  return std::exp(log_density(x));
}

double gmm_density(const Eigen::VectorXd& x, const MixtureModel& m) {
  return m.density(x);
}

MixtureModel gmm_fit_em(const std::vector<Eigen::VectorXd>& samples, int n_components,
                        std::uint64_t seed, const FitOptions& options, FitReport* report) {
  if (samples.empty()) throw std::invalid_argument("empty class");
  if (n_components < 1) throw std::invalid_argument("n_components must be >= 1");
  const int n = static_cast<int>(samples.size());
  const auto d = samples.front().size();
  for (const auto& x : samples) {
    if (x.size() != d) throw std::invalid_argument("sample dimension mismatch");
    if (!x.allFinite()) throw std::invalid_argument("non-finite sample");
  }
  const int k = std::min(n_components, n);

  Rng rng(seed);
  Eigen::VectorXd data_mean = Eigen::VectorXd::Zero(d);
  for (const auto& x : samples) data_mean += x;
  data_mean /= static_cast<double>(n);
  const Eigen::MatrixXd init_cov = sample_covariance(samples, data_mean, options.reg_floor);

  std::vector<GaussianComponent> comps;
  comps.reserve(static_cast<std::size_t>(k));
  for (auto& mean : kmeanspp_means(samples, k, rng)) {
    comps.push_back({1.0 / k, std::move(mean), init_cov});
  }
  MixtureModel model(std::move(comps));

  FitReport local;
  FitReport& rep = report ? *report : local;
  rep = {};

  Eigen::MatrixXd logp;
  Eigen::VectorXd loglik;
  double prev_ll = -std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < options.max_iters; ++iter) {
    kernels::estep_log_densities(model, samples, logp, loglik);
    double ll = 0.0;
    for (int i = 0; i < n; ++i) ll += loglik(i);
    rep.log_likelihoods.push_back(ll);
    rep.iterations = iter + 1;
    if (iter > 0 && ll - prev_ll <= options.tol * (std::abs(prev_ll) + 1.0)) {
      rep.converged = true;
      break;
    }
    prev_ll = ll;

    // M-step: responsibility-weighted moments, accumulated in sample order.
    Eigen::MatrixXd resp(n, k);
    for (int i = 0; i < n; ++i) {
      if (!std::isfinite(loglik(i))) {
        resp.row(i).setConstant(1.0 / k);  // zero density everywhere: spread evenly
        continue;
      }
      for (int j = 0; j < k; ++j) resp(i, j) = std::exp(logp(i, j) - loglik(i));
    }
    Eigen::VectorXd nj = Eigen::VectorXd::Zero(k);
    for (int i = 0; i < n; ++i) nj += resp.row(i).transpose();

    std::vector<GaussianComponent> next(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
      auto& c = next[static_cast<std::size_t>(j)];
      if (nj(j) < 1e-12) {
        // Starved component: re-seed it at the worst-explained sample.
        int worst = 0;
        for (int i = 1; i < n; ++i) {
          if (loglik(i) < loglik(worst)) worst = i;
        }
        c.mean = samples[static_cast<std::size_t>(worst)];
        c.covariance = init_cov;
        nj(j) = 1e-12;
      } else {
        Eigen::VectorXd mu = Eigen::VectorXd::Zero(d);
        for (int i = 0; i < n; ++i) mu += resp(i, j) * samples[static_cast<std::size_t>(i)];
        mu /= nj(j);
        Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
        for (int i = 0; i < n; ++i) {
          const Eigen::VectorXd cvec = samples[static_cast<std::size_t>(i)] - mu;
          cov.noalias() += resp(i, j) * (cvec * cvec.transpose());
        }
        cov /= nj(j);
        cov.diagonal().array() += options.reg_floor;
        c.mean = std::move(mu);
        c.covariance = std::move(cov);
      }
    }
    const double total = nj.sum();
    for (int j = 0; j < k; ++j) next[static_cast<std::size_t>(j)].weight = nj(j) / total;
    model = MixtureModel(std::move(next));
  }
  return model;
}

int classify_generative(const Eigen::VectorXd& x,
                        std::span<const MixtureModel* const> class_models,
                        std::span<const double> class_priors) {
  if (class_models.empty()) throw std::invalid_argument("no classes");
  if (class_models.size() != class_priors.size()) {
    throw std::invalid_argument("priors/models size mismatch");
  }
  int best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < class_models.size(); ++c) {
    const double prior = class_priors[c];
    if (prior < 0.0) throw std::invalid_argument("negative class prior");
    if (prior == 0.0) continue;
    const double score = std::log(prior) + class_models[c]->log_density(x);
    if (score > best_score) {
      best_score = score;
      best = static_cast<int>(c);
    }
  }
  return best;
}

nlohmann::json mixture_to_json(const MixtureModel& m) {
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& c : m.components()) {
    nlohmann::json mean = nlohmann::json::array();
    for (Eigen::Index i = 0; i < c.mean.size(); ++i) mean.push_back(c.mean(i));
    nlohmann::json cov = nlohmann::json::array();
    for (Eigen::Index r = 0; r < c.covariance.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index cc = 0; cc < c.covariance.cols(); ++cc) {
        row.push_back(c.covariance(r, cc));
      }
      cov.push_back(std::move(row));
    }
    comps.push_back({{"weight", c.weight}, {"mean", std::move(mean)}, {"cov", std::move(cov)}});
  }
  return {{"version", 1}, {"dim", m.dim()}, {"components", std::move(comps)}};
}

MixtureModel mixture_from_json(const nlohmann::json& doc) {
  if (doc.at("version").get<int>() != 1) {
    throw std::runtime_error("unsupported mixture document version");
  }
  const int d = doc.at("dim").get<int>();
  std::vector<GaussianComponent> comps;
  for (const auto& cj : doc.at("components")) {
    GaussianComponent c;
    c.weight = cj.at("weight").get<double>();
    const auto& mean = cj.at("mean");
    c.mean = Eigen::VectorXd(d);
    if (static_cast<int>(mean.size()) != d) throw std::runtime_error("bad mean length");
    for (int i = 0; i < d; ++i) c.mean(i) = mean[static_cast<std::size_t>(i)].get<double>();
    const auto& cov = cj.at("cov");
    if (static_cast<int>(cov.size()) != d) throw std::runtime_error("bad covariance shape");
    c.covariance = Eigen::MatrixXd(d, d);
    for (int r = 0; r < d; ++r) {
      const auto& row = cov[static_cast<std::size_t>(r)];
      if (static_cast<int>(row.size()) != d) throw std::runtime_error("bad covariance shape");
      for (int cc = 0; cc < d; ++cc) {
        c.covariance(r, cc) = row[static_cast<std::size_t>(cc)].get<double>();
      }
    }
    comps.push_back(std::move(c));
  }
  return MixtureModel(std::move(comps));
}

}  // namespace pistam
