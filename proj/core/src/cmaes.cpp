#include "topoproj/cmaes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "topoproj/errors.hpp"

namespace topoproj {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Decomposition {
  Eigen::MatrixXd basis;
  Eigen::VectorXd eigenvalues;
  bool floored = false;
};

Decomposition decompose(const Eigen::MatrixXd& cov) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  Decomposition d{solver.eigenvectors(), solver.eigenvalues(), false};
  for (Eigen::Index i = 0; i < d.eigenvalues.size(); ++i) {
    if (!(d.eigenvalues[i] >= kCovarianceFloor)) {
      d.eigenvalues[i] = kCovarianceFloor;
      d.floored = true;
    }
  }
  return d;
}

Eigen::MatrixXd rebuild(const Decomposition& d) {
  Eigen::MatrixXd c = d.basis * d.eigenvalues.asDiagonal() * d.basis.transpose();
  return 0.5 * (c + c.transpose());
}

}  // namespace

std::size_t population_size(std::size_t dim) {
  return 4 + static_cast<std::size_t>(std::floor(3.0 * std::log(static_cast<double>(dim))));
}

CmaState cma_init(std::size_t dim, const Eigen::VectorXd& m0, double sigma0) {
  if (dim == 0) throw InvalidDimension("cma_init: dimension must be at least 1");
  if (static_cast<std::size_t>(m0.size()) != dim) {
    throw InvalidInput("cma_init: initial mean has the wrong length");
  }
  if (!(sigma0 > 0.0) || !std::isfinite(sigma0)) {
    throw InvalidInput("cma_init: sigma0 must be positive and finite");
  }

  CmaState st;
  st.dim = dim;
  st.mean = m0;
  st.sigma = sigma0;
  st.cov = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dim),
                                     static_cast<Eigen::Index>(dim));
  st.lambda_pop = population_size(dim);
  st.mu = st.lambda_pop / 2;

  const auto mu = static_cast<Eigen::Index>(st.mu);
  st.weights.resize(mu);
  const double top = std::log(static_cast<double>(st.mu) + 0.5);
  for (Eigen::Index i = 0; i < mu; ++i) {
    st.weights[i] = top - std::log(static_cast<double>(i + 1));
  }
  st.weights /= st.weights.sum();
  st.mu_eff = 1.0 / st.weights.squaredNorm();

  const auto d = static_cast<double>(dim);
  st.c_sigma = (st.mu_eff + 2.0) / (d + st.mu_eff + 5.0);
  st.d_sigma = 1.0 + std::sqrt(st.mu_eff / d);
  st.c_mu = std::min(1.0, 2.0 * (st.mu_eff - 2.0 + 1.0 / st.mu_eff) /
                              ((d + 2.0) * (d + 2.0) + st.mu_eff));
  st.chi_n = std::sqrt(d) * (1.0 - 1.0 / (4.0 * d) + 1.0 / (21.0 * d * d));
  st.path_sigma = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  return st;
}

std::vector<Eigen::VectorXd> cma_ask(CmaState& st, std::mt19937_64& rng) {
  const Decomposition dec = decompose(st.cov);
  if (dec.floored) {
    st.cov = rebuild(dec);
    ++st.covariance_repairs;
  }
  const Eigen::VectorXd scale = dec.eigenvalues.cwiseSqrt();

  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Eigen::VectorXd> out;
  out.reserve(st.lambda_pop);
  const auto d = static_cast<Eigen::Index>(st.dim);
  for (std::size_t i = 0; i < st.lambda_pop; ++i) {
    Eigen::VectorXd n(d);
    for (Eigen::Index j = 0; j < d; ++j) n[j] = normal(rng);
    const Eigen::VectorXd z = dec.basis * scale.cwiseProduct(n);
    out.push_back(st.mean + st.sigma * z);
  }
  return out;
}

CmaState cma_tell(CmaState st, std::span<const Eigen::VectorXd> candidates,
                  std::span<const double> fitness) {
  if (candidates.size() != st.lambda_pop || fitness.size() != st.lambda_pop) {
    throw InvalidInput("cma_tell: expected " + std::to_string(st.lambda_pop) +
                       " candidates and fitness values");
  }

  std::vector<double> f(fitness.begin(), fitness.end());
  for (double& v : f)
    if (!std::isfinite(v)) v = kInf;
  std::vector<std::size_t> order(f.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });

  const Eigen::VectorXd old_mean = st.mean;
  const auto d = static_cast<Eigen::Index>(st.dim);

  Eigen::VectorXd new_mean = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t i = 0; i < st.mu; ++i) {
    const Eigen::VectorXd& x = candidates[order[i]];
    const double w = st.weights[static_cast<Eigen::Index>(i)];
    new_mean += w * x;
    const Eigen::VectorXd y = (x - old_mean) / st.sigma;
    rank_mu += w * y * y.transpose();
  }

  // C^{-1/2} of the covariance the candidates were sampled from.
  const Decomposition dec = decompose(st.cov);
  const Eigen::MatrixXd inv_sqrt = dec.basis *
                                   dec.eigenvalues.cwiseSqrt().cwiseInverse().asDiagonal() *
                                   dec.basis.transpose();

  const Eigen::VectorXd y_w = (new_mean - old_mean) / st.sigma;
  st.path_sigma = (1.0 - st.c_sigma) * st.path_sigma +
                  std::sqrt(st.c_sigma * (2.0 - st.c_sigma) * st.mu_eff) * (inv_sqrt * y_w);

  st.cov = (1.0 - st.c_mu) * st.cov + st.c_mu * rank_mu;
  st.cov = (0.5 * (st.cov + st.cov.transpose())).eval();
  const Decomposition after = decompose(st.cov);
  if (after.floored) {
    st.cov = rebuild(after);
    ++st.covariance_repairs;
  }

  st.sigma *= std::exp((st.c_sigma / st.d_sigma) * (st.path_sigma.norm() / st.chi_n - 1.0));
  st.mean = new_mean;
  ++st.generation;
  return st;
}

CmaResult cma_optimize(const FitnessFn& fitness, CmaState st, std::size_t budget,
                       std::mt19937_64& rng) {
  if (budget < 1) throw InvalidInput("cma_optimize: budget must be at least 1");
  constexpr std::size_t kStagnationWindow = 20;
  constexpr double kStagnationTol = 1e-12;

  CmaResult result;
  result.best_fitness = kInf;
  result.best_theta = st.mean;
  std::vector<double> best_history;

  for (std::size_t gen = 0; gen < budget; ++gen) {
    const std::vector<Eigen::VectorXd> candidates = cma_ask(st, rng);
    std::vector<double> f(candidates.size(), kInf);
    double sum = 0.0;
    std::size_t finite = 0;
    double gen_best = kInf;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      try {
        f[i] = fitness(candidates[i]);
      } catch (const std::exception&) {
        f[i] = kInf;
      }
      ++result.evaluations;
      if (!std::isfinite(f[i])) {
        f[i] = kInf;
        continue;
      }
      sum += f[i];
      ++finite;
      gen_best = std::min(gen_best, f[i]);
      if (f[i] < result.best_fitness) {
        result.best_fitness = f[i];
        result.best_theta = candidates[i];
      }
    }
    result.history.push_back({st.generation, result.best_fitness, gen_best,
                              finite ? sum / static_cast<double>(finite) : kInf, st.sigma});
    st = cma_tell(std::move(st), candidates, f);

    best_history.push_back(result.best_fitness);
    if (best_history.size() > kStagnationWindow) {
      const double then = best_history[best_history.size() - 1 - kStagnationWindow];
      const double now = best_history.back();
      const bool stalled = std::isinf(then) ? std::isinf(now) : (then - now) < kStagnationTol;
      if (stalled) break;
    }
  }
  result.final_state = std::move(st);
  return result;
}

Eigen::VectorXd encode_theta(const Theta& theta) {
  const auto& w = theta.weights;
  if (!(w.data > 0.0 && w.phys > 0.0 && w.logic > 0.0)) {
    throw InvalidInput("encode_theta: loss weights must be positive");
  }
  if (!(theta.beta > 0.0 && theta.beta < 2.0)) {
    throw InvalidInput("encode_theta: beta must lie in (0, 2)");
  }
  Eigen::VectorXd raw(kThetaDim);
  const double half = theta.beta / 2.0;
  raw << std::log(w.data), std::log(w.phys), std::log(w.logic), std::log(half / (1.0 - half));
  return raw;
}

Theta decode_theta(const Eigen::VectorXd& raw) {
  if (raw.size() != static_cast<Eigen::Index>(kThetaDim)) {
    throw InvalidDimension("decode_theta: expected 4 raw coordinates");
  }
  auto c = [&](Eigen::Index i) {
    const double v = raw[i];
    if (std::isnan(v)) throw InvalidInput("decode_theta: NaN coordinate");
    return std::clamp(v, -30.0, 30.0);
  };
  Theta t;
  t.weights = {std::exp(c(0)), std::exp(c(1)), std::exp(c(2))};
  t.beta = 2.0 / (1.0 + std::exp(-c(3)));
  return t;
}

}  // namespace topoproj
