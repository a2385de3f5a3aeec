#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "mpse/rng.hpp"
#include "mpse/types.hpp"

// Objective functions and gradients, exact and stochastic. Every routine
// here is a pure function of its inputs (plus an explicit Rng where noted).
// Each edge kernel exists twice: a serial reference with a fixed summation
// order (Exec::Serial, bit-reproducible) and an OpenMP version
// (Exec::Parallel). The two agree to floating-point reduction order.

namespace mpse {

// Realization xi of the per-edge sampler: a retained subset of one
// relation's edge list, kept as indices into DissimilarityData::edges.
struct EdgeSample {
  std::vector<std::uint32_t> retained;
  double c = 1.0;
};

struct GradientPair {
  Eigen::MatrixXd dX;                // n x p
  std::vector<Eigen::MatrixXd> dQ;   // K blocks, q x p; empty in fixed mode
};

// Weighted raw stress: sum over stored pairs of w * (d - ||y_i - y_j||)^2.
double mds_stress(const Eigen::MatrixXd& Y, const DissimilarityData& data,
                  Exec exec = Exec::Parallel);

// Raw stress divided by sum of w * d^2. Throws ZeroNormalizer if all d = 0.
double normalized_mds_stress(const Eigen::MatrixXd& Y,
                             const DissimilarityData& data,
                             Exec exec = Exec::Parallel);

// Per-perspective normalized stress of the projected embedding, their mean,
// and the raw unnormalized sum.
StressReport mpse_stress(const Embedding& X, const ProjectionStack& P,
                         const std::vector<DissimilarityData>& D,
                         Exec exec = Exec::Parallel);

// Gradient of the weighted raw stress with respect to the points:
//   row i = 2 * sum_j w * (||y_i-y_j|| - d) / ||y_i-y_j|| * (y_i - y_j).
// Pairs closer than epsilon_dist contribute nothing (subgradient 0 at the
// non-differentiable coincidence).
Eigen::MatrixXd mds_stress_gradient(const Eigen::MatrixXd& Y,
                                    const DissimilarityData& data,
                                    double epsilon_dist = 1e-9,
                                    Exec exec = Exec::Parallel);

// Same, restricted to a retained edge subset and rescaled by 1/c so the
// estimate is unbiased for the full gradient.
Eigen::MatrixXd mds_stress_gradient_sampled(const Eigen::MatrixXd& Y,
                                            const DissimilarityData& data,
                                            const EdgeSample& sample,
                                            double epsilon_dist = 1e-9,
                                            Exec exec = Exec::Parallel);

// Gradient of the multi-perspective raw stress with respect to X. With
// samples (one per perspective) the stochastic unbiased estimate is used.
Eigen::MatrixXd embedding_gradient(const Embedding& X, const ProjectionStack& P,
                                   const std::vector<DissimilarityData>& D,
                                   const std::vector<EdgeSample>* samples = nullptr,
                                   double epsilon_dist = 1e-9,
                                   Exec exec = Exec::Parallel);

// Gradient blocks with respect to each projection matrix:
//   block k = G_k^T X where G_k is the point gradient in perspective k.
std::vector<Eigen::MatrixXd> projection_gradient(
    const Embedding& X, const ProjectionStack& P,
    const std::vector<DissimilarityData>& D,
    const std::vector<EdgeSample>* samples = nullptr,
    double epsilon_dist = 1e-9, Exec exec = Exec::Parallel);

// Both gradients from one pass over the edge lists. block_scales, when
// given, multiplies perspective k's contribution by block_scales[k]; with
// 1/(K * sum w d^2) factors this yields the gradient of the normalized
// stress instead of the raw one.
GradientPair stress_gradients(const Embedding& X, const ProjectionStack& P,
                              const std::vector<DissimilarityData>& D,
                              const std::vector<EdgeSample>* samples,
                              bool want_dq, double epsilon_dist = 1e-9,
                              Exec exec = Exec::Parallel,
                              const std::vector<double>* block_scales = nullptr);

// Per-relation normalizers sum w d^2; the scale factors that turn raw
// stress gradients into normalized-stress gradients.
std::vector<double> normalized_gradient_scales(
    const std::vector<DissimilarityData>& D);

// Each stored pair retained independently with probability c. c = 1 keeps
// everything and consumes no randomness.
EdgeSample subsample(const DissimilarityData& data, double c, Rng& rng);

std::vector<EdgeSample> subsample_all(const std::vector<DissimilarityData>& D,
                                      double c, Rng& rng);

// Batched gradient approximation: only pairs inside the same batch
// contribute, scaled by n / |batch|. Batches must partition {0, ..., n-1}.
Eigen::MatrixXd batch_gradient_estimate(const Eigen::MatrixXd& Y,
                                        const DissimilarityData& data,
                                        const std::vector<std::vector<int>>& batches,
                                        double epsilon_dist = 1e-9);

}  // namespace mpse
