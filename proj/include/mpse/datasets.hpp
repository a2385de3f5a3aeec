#pragma once

#include <Eigen/Dense>
#include <tuple>
#include <vector>

#include "mpse/rng.hpp"
#include "mpse/types.hpp"

// Synthetic instance generators and the graph-dissimilarity pipeline.
// Everything is deterministic given the rng seed.

namespace mpse {

struct LabeledPoints2D {
  Eigen::MatrixXd coords;   // n x 2
  std::vector<int> labels;  // empty when unlabeled
};

// Multiple tie-count relations over the same node set.
struct MultiRelationGraph {
  struct Tie {
    int i = 0;
    int j = 0;
    int count = 1;  // >= 1
  };
  int n = 0;
  std::vector<std::vector<Tie>> relations;
};

// n points on the unit circle. stratified = evenly spaced angles 2*pi*k/n.
LabeledPoints2D sample_circle(int n, Rng& rng, bool stratified = false);

// n points on the boundary of the axis-aligned unit square centered at the
// origin (|x|,|y| <= 1/2, max touching 1/2). stratified = evenly spaced
// along the perimeter starting at the (-1/2,-1/2) corner.
LabeledPoints2D sample_square(int n, Rng& rng, bool stratified = false);

// Two isotropic unit-variance Gaussian blobs of n/2 points, centers
// `separation` apart on the x-axis, labeled 0/1. n must be even.
LabeledPoints2D sample_clusters(int n, double separation, Rng& rng);

// n points uniform in the solid unit ball in 3D.
Embedding sample_ball3d(int n, Rng& rng);

// Complete Euclidean distance data (w = 1) for an n x m point matrix.
DissimilarityData distances_from_points(const Eigen::MatrixXd& points);

// Graph dissimilarities for one relation: tie (i,j) with count m gets
// initial length 1/m, all-pairs shortest paths complete the matrix, and
// weights are w = 1/D. Throws DisconnectedRelation if the relation's graph
// does not span all n nodes.
DissimilarityData graph_dissimilarity(const MultiRelationGraph& g, int relation);

// Ball points, a random-viewpoint stack (random azimuths sharing the
// vertical axis), and the K distance matrices of the projected points.
// Ground truth is returned for recovery scoring;
// mpse_stress(groundtruth, P, D).total == 0 by construction.
struct ScalabilityInstance {
  Embedding groundtruth;
  ProjectionStack projections;
  std::vector<DissimilarityData> dissimilarities;
};

ScalabilityInstance scalability_instance(int n, int K, Rng& rng);

}  // namespace mpse
