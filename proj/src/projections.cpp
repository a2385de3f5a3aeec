#include "mpse/projections.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace mpse {

namespace {

constexpr double kRankTol = 1e-12;

// Orthonormal completion: extends the first `have` columns of V (assumed
// orthonormal) to `want` columns by Gram-Schmidt against the standard basis.
// Deterministic: picks the basis vector with the largest residual.
void complete_columns(Eigen::MatrixXd& V, int have, int want) {
  const Eigen::Index p = V.rows();
  for (int c = have; c < want; ++c) {
    Eigen::VectorXd best;
    double best_norm = -1.0;
    for (Eigen::Index b = 0; b < p; ++b) {
      Eigen::VectorXd cand = Eigen::VectorXd::Unit(p, b);
      for (int k = 0; k < c; ++k) cand -= V.col(k).dot(cand) * V.col(k);
      double nrm = cand.norm();
      if (nrm > best_norm) {
        best_norm = nrm;
        best = cand;
      }
    }
    V.col(c) = best / best_norm;
  }
}

}  // namespace

namespace {

// Eigendecomposition of the tiny Gram matrix A A^T, closed-form for the
// 2x2 / 3x3 symmetric case. Returns eigenpairs descending.
template <int Q>
void gram_eigen_desc(const Eigen::MatrixXd& A, Eigen::MatrixXd& U,
                     Eigen::VectorXd& S) {
  Eigen::Matrix<double, Q, Q> B = (A * A.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, Q, Q>> es;
  es.computeDirect(B);
  for (int c = 0; c < Q; ++c) {
    S[c] = std::sqrt(std::max(es.eigenvalues()[Q - 1 - c], 0.0));
    U.col(c) = es.eigenvectors().col(Q - 1 - c);
  }
}

}  // namespace

SmallSvd small_svd(const Eigen::MatrixXd& A) {
  const Eigen::Index q = A.rows();
  const Eigen::Index p = A.cols();
  if (q > p || p > 3 || q < 1)
    throw Error(ErrorCode::DimensionMismatch, "small_svd expects 1 <= q <= p <= 3");
  if (!A.allFinite())
    throw Error(ErrorCode::NonFiniteValue, "small_svd input");

  SmallSvd out;
  out.U.resize(q, q);
  out.S.resize(q);
  out.V.resize(p, q);

  if (q == 1) {
    out.U(0, 0) = 1.0;
    out.S[0] = A.row(0).norm();
  } else if (q == 2) {
    gram_eigen_desc<2>(A, out.U, out.S);
  } else {
    gram_eigen_desc<3>(A, out.U, out.S);
  }

  // Right singular vectors: v = A^T u / s for the nonzero part of the
  // spectrum, then an orthonormal complement for the null directions. A
  // Gram-Schmidt pass keeps V^T V = I when singular values nearly collide.
  int rank = 0;
  for (Eigen::Index c = 0; c < q; ++c) {
    if (out.S[c] <= kRankTol) break;
    Eigen::VectorXd v = A.transpose() * out.U.col(c) / out.S[c];
    for (int k = 0; k < rank; ++k) v -= out.V.col(k).dot(v) * out.V.col(k);
    out.V.col(rank++) = v / v.norm();
  }
  complete_columns(out.V, rank, static_cast<int>(q));
  return out;
}

Eigen::MatrixXd retract(const Eigen::MatrixXd& A, bool* rank_deficient) {
  SmallSvd svd = small_svd(A);
  if (rank_deficient)
    *rank_deficient = svd.S[svd.S.size() - 1] < kRankTol;
  return svd.U * svd.V.transpose();
}

ProjectionStack standard_viewpoints(int K) {
  if (K < 1) throw Error(ErrorCode::InvalidArgument, "K must be >= 1");
  std::vector<Eigen::MatrixXd> mats;
  mats.reserve(K);
  for (int k = 0; k < K; ++k) {
    // Azimuth 90 - k*(180/K) degrees; equivalently (sin, cos) of k*pi/K,
    // which keeps the k = 0 viewpoint exact.
    double a = static_cast<double>(k) * M_PI / K;
    Eigen::MatrixXd Q(2, 3);
    Q << std::sin(a), std::cos(a), 0.0,
         0.0,         0.0,        1.0;
    mats.push_back(std::move(Q));
  }
  return ProjectionStack::from_matrices(std::move(mats));
}

Eigen::MatrixXd random_orthogonal(int q, int p, Rng& rng) {
  if (q > p || q < 1)
    throw Error(ErrorCode::InvalidArgument, "need 1 <= q <= p");
  Eigen::MatrixXd Q(q, p);
  for (int r = 0; r < q; ++r) {
    Eigen::VectorXd row(p);
    double nrm = 0.0;
    do {
      for (int c = 0; c < p; ++c) row[c] = rng.normal();
      for (int k = 0; k < r; ++k) row -= Q.row(k).dot(row) * Q.row(k).transpose();
      nrm = row.norm();
    } while (nrm < 1e-12);
    Q.row(r) = row.transpose() / nrm;
  }
  return Q;
}

ProjectionStack random_stack(int K, int q, int p, Rng& rng) {
  std::vector<Eigen::MatrixXd> mats;
  mats.reserve(K);
  for (int k = 0; k < K; ++k) mats.push_back(random_orthogonal(q, p, rng));
  return ProjectionStack::from_matrices(std::move(mats));
}

ProjectionStack random_viewpoints(int K, Rng& rng) {
  if (K < 1) throw Error(ErrorCode::InvalidArgument, "K must be >= 1");
  // Canonical evenly spaced family at a uniformly random azimuthal offset.
  // Keeps the viewing planes 180/K degrees apart, so instances stay well
  // conditioned for recovery at any K.
  const double offset = 2.0 * M_PI * rng.uniform();
  std::vector<Eigen::MatrixXd> mats;
  mats.reserve(K);
  for (int k = 0; k < K; ++k) {
    double a = static_cast<double>(k) * M_PI / K + offset;
    Eigen::MatrixXd Q(2, 3);
    Q << std::sin(a), std::cos(a), 0.0,
         0.0,         0.0,        1.0;
    mats.push_back(std::move(Q));
  }
  return ProjectionStack::from_matrices(std::move(mats));
}

ProjectionStack identity_stack(int K, int p) {
  std::vector<Eigen::MatrixXd> mats(K, Eigen::MatrixXd::Identity(p, p));
  return ProjectionStack::from_matrices(std::move(mats));
}

Eigen::MatrixXd apply_one(const Eigen::MatrixXd& Q, const Eigen::MatrixXd& coords) {
  if (Q.cols() != coords.cols())
    throw Error(ErrorCode::DimensionMismatch, "projection p != embedding p");
  return coords * Q.transpose();
}

std::vector<Eigen::MatrixXd> apply(const ProjectionStack& P, const Embedding& X) {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(P.matrices.size());
  for (const auto& Q : P.matrices) out.push_back(apply_one(Q, X.coords));
  return out;
}

}  // namespace mpse
