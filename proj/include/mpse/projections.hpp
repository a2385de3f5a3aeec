#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mpse/rng.hpp"
#include "mpse/types.hpp"

// The orthogonal projection family: canonical fixed viewpoints, Haar-random
// generation, application to embeddings, and the SVD-based retraction onto
// the row-orthonormal matrices.

namespace mpse {

// Reduced SVD of a q x p matrix A (q <= p <= 3): A = U * diag(S) * V^T with
// U q x q orthogonal, V p x q with orthonormal columns, S descending.
struct SmallSvd {
  Eigen::MatrixXd U;  // q x q
  Eigen::VectorXd S;  // q, descending, >= 0
  Eigen::MatrixXd V;  // p x q
};

// Computed from the eigendecomposition of A A^T; no general SVD routine is
// needed at these sizes. Rank-deficient inputs get zero singular values and
// null directions completed with an orthonormal complement.
SmallSvd small_svd(const Eigen::MatrixXd& A);

// Nearest row-orthonormal matrix to A in Frobenius norm: U V^T from the
// reduced SVD. When the smallest singular value is below 1e-12 the nearest
// matrix is not unique; the completed complement is returned and
// *rank_deficient (if non-null) is set.
Eigen::MatrixXd retract(const Eigen::MatrixXd& A, bool* rank_deficient = nullptr);

// Evenly spaced azimuthal viewpoints sharing the vertical axis (q=2, p=3).
// First rows are unit vectors in the xy-plane at angles 90deg - k*(180/K)deg,
// second rows are (0,0,1). K=3 gives the canonical 60-degree triple exactly.
ProjectionStack standard_viewpoints(int K);

// Row-orthonormal q x p matrix, Haar-distributed: Gaussian draw followed by
// row orthonormalization. Deterministic given the rng state.
Eigen::MatrixXd random_orthogonal(int q, int p, Rng& rng);

ProjectionStack random_stack(int K, int q, int p, Rng& rng);

// K random members of the standard viewpoint family (q=2, p=3): uniformly
// random azimuths sharing the vertical axis. The randomized counterpart of
// standard_viewpoints, used by the scalability instances.
ProjectionStack random_viewpoints(int K, Rng& rng);

// Identity stack (q = p), the plain-MDS special case.
ProjectionStack identity_stack(int K, int p);

// Per-perspective projected point sets: block k holds X * Q_k^T (n x q).
std::vector<Eigen::MatrixXd> apply(const ProjectionStack& P, const Embedding& X);

Eigen::MatrixXd apply_one(const Eigen::MatrixXd& Q, const Eigen::MatrixXd& coords);

}  // namespace mpse
