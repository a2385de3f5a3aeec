#pragma once

#include <Eigen/Dense>
#include <functional>
#include <utility>
#include <vector>

#include "mpse/rng.hpp"
#include "mpse/stress.hpp"
#include "mpse/types.hpp"

// Stochastic adaptive gradient descent for the multi-perspective stress:
// fixed-projection descent, varying-projection descent with retraction
// steps, and the combined-dissimilarity smart initialization.

namespace mpse {

// Secant-based step size: mu = <X_curr - X_prev, g_curr - g_prev> / ||g_curr
// - g_prev||^2 (Frobenius inner product). Falls back when the denominator is
// below 1e-14 or the quotient is not positive.
double adaptive_rate(const Eigen::MatrixXd& X_prev, const Eigen::MatrixXd& X_curr,
                     const Eigen::MatrixXd& g_prev, const Eigen::MatrixXd& g_curr,
                     double mu_fallback);

// Stack variant: blocks are concatenated in the inner products.
double adaptive_rate(const std::vector<Eigen::MatrixXd>& X_prev,
                     const std::vector<Eigen::MatrixXd>& X_curr,
                     const std::vector<Eigen::MatrixXd>& g_prev,
                     const std::vector<Eigen::MatrixXd>& g_curr,
                     double mu_fallback);

struct InitConfig {
  InitStrategy strategy = InitStrategy::Random;
  double radius = 1.0;  // random-init ball radius
  int d1 = 3;           // embedding dimension in the combined scale
  int d2 = 2;           // projection dimension in the combined scale
};

// Observer invoked once after the initial state and once per iteration.
struct IterationState {
  int iteration;
  const Embedding& embedding;
  const ProjectionStack& projections;
};
using IterationCallback = std::function<void(const IterationState&)>;

// Descent on X with the projections held fixed. Per iteration: draw one edge
// sample per perspective, step along the stochastic gradient, then update
// the rate from the gradient at the new point on the same sample.
// Deterministic given (inputs, cfg.seed, Exec::Serial).
RunResult run_fixed(const std::vector<DissimilarityData>& D,
                    const ProjectionStack& P, const Embedding& X0,
                    const OptimizerConfig& cfg,
                    const IterationCallback& callback = {});

// Joint descent: gradient step on X and projected gradient step on each Q_k
// (step then retract), both computed at the previous iterate from the same
// sample, with separate adaptive rates.
RunResult run_varying(const std::vector<DissimilarityData>& D,
                      const Embedding& X0, const ProjectionStack& Q0,
                      const OptimizerConfig& cfg,
                      const IterationCallback& callback = {});

// Combined relation over pairs present in every edge set:
//   d_combined^2 = (d1 / (d2 K)) * sum_k d_k^2,  weight = mean of weights.
// Throws EmptyIntersection when no pair is shared by all relations.
DissimilarityData combined_dissimilarity(const std::vector<DissimilarityData>& D,
                                         int d1, int d2);

// Smart initialization: embed the combined dissimilarities in R^d1 with the
// fixed-projection loop under an identity perspective, then freeze the
// embedding and run projected gradient steps on the stack alone.
std::pair<Embedding, ProjectionStack> smart_initialize(
    const std::vector<DissimilarityData>& D, const InitConfig& init,
    const OptimizerConfig& cfg);

// Points uniform in the p-ball of the given radius.
Embedding random_init(int n, int p, double radius, Rng& rng);

}  // namespace mpse
