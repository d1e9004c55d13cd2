#pragma once

#include <cstddef>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "topoproj/constraints.hpp"

namespace topoproj {

/// Floor applied to covariance eigenvalues when C loses positive definiteness.
inline constexpr double kCovarianceFloor = 1e-10;

/// Search-distribution state: mean, global step size, covariance and the
/// cumulative step-size path. Recombination weights are
///   w_i proportional to ln(mu + 1/2) - ln i,  i = 1..mu,
/// normalized to sum to one.
struct CmaState {
  std::size_t dim = 0;
  Eigen::VectorXd mean;
  double sigma = 0.0;
  Eigen::MatrixXd cov;
  std::size_t generation = 0;

  std::size_t lambda_pop = 0;
  std::size_t mu = 0;
  Eigen::VectorXd weights;
  double mu_eff = 0.0;

  Eigen::VectorXd path_sigma;
  double c_sigma = 0.0;
  double d_sigma = 0.0;
  double c_mu = 0.0;
  double chi_n = 0.0;  // E|N(0, I)|

  std::size_t covariance_repairs = 0;
};

/// 4 + floor(3 ln d).
std::size_t population_size(std::size_t dim);

/// Throws InvalidDimension for dim == 0 and InvalidInput for a mean of the
/// wrong length or a non-positive sigma0.
CmaState cma_init(std::size_t dim, const Eigen::VectorXd& m0, double sigma0);

/// Draws lambda_pop candidates m + sigma * z with z ~ N(0, C). If C has
/// eigenvalues below kCovarianceFloor they are floored, C is rebuilt and
/// `covariance_repairs` is incremented.
std::vector<Eigen::VectorXd> cma_ask(CmaState& st, std::mt19937_64& rng);

/// Ranks candidates (ascending fitness, ties by index, non-finite as +inf),
/// recombines the mean, applies the rank-mu covariance update around the old
/// mean and adapts sigma by cumulative step-size adaptation.
CmaState cma_tell(CmaState st, std::span<const Eigen::VectorXd> candidates,
                  std::span<const double> fitness);

struct CmaGeneration {
  std::size_t generation = 0;
  double best_fitness = 0.0;        // best ever, through this generation
  double generation_best = 0.0;
  double mean_fitness = 0.0;        // over finite values
  double sigma = 0.0;               // before the update
};

struct CmaResult {
  Eigen::VectorXd best_theta;
  double best_fitness = 0.0;
  std::vector<CmaGeneration> history;
  std::size_t evaluations = 0;
  CmaState final_state;
};

using FitnessFn = std::function<double(const Eigen::VectorXd&)>;

/// Ask/evaluate/tell for at most `budget` generations, stopping early when
/// the best-ever fitness improves by less than 1e-12 over 20 generations.
/// A fitness call that throws scores +inf.
CmaResult cma_optimize(const FitnessFn& fitness, CmaState st, std::size_t budget,
                       std::mt19937_64& rng);

/// Solver hyperparameters searched by the outer loop.
struct Theta {
  LossWeights weights;
  double beta = 0.8;
};

/// Raw search coordinates: (ln l_data, ln l_phys, ln l_logic, logit(beta / 2)).
/// Decoding clamps each raw coordinate to [-30, 30] so decoded values stay
/// finite, the weights positive and beta inside (0, 2).
inline constexpr std::size_t kThetaDim = 4;
Eigen::VectorXd encode_theta(const Theta& theta);
Theta decode_theta(const Eigen::VectorXd& raw);

}  // namespace topoproj
