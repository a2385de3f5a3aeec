#include "mpse/types.hpp"

#include <cmath>
#include <unordered_set>

namespace mpse {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicatePair: return "DuplicatePair";
    case ErrorCode::NegativeDistance: return "NegativeDistance";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::AsymmetricInput: return "AsymmetricInput";
    case ErrorCode::NonzeroDiagonal: return "NonzeroDiagonal";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::CountMismatch: return "CountMismatch";
    case ErrorCode::ZeroNormalizer: return "ZeroNormalizer";
    case ErrorCode::NotAPartition: return "NotAPartition";
    case ErrorCode::EmptyIntersection: return "EmptyIntersection";
    case ErrorCode::DisconnectedRelation: return "DisconnectedRelation";
    case ErrorCode::NotOrthogonal: return "NotOrthogonal";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "UnknownError";
}

namespace {

std::string pair_name(int i, int j) {
  return "pair (" + std::to_string(i) + ", " + std::to_string(j) + ")";
}

}  // namespace

void validate_dissimilarity(const DissimilarityData& data) {
  if (data.n < 0)
    throw Error(ErrorCode::InvalidArgument, "negative object count");
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(data.edges.size());
  for (const Edge& e : data.edges) {
    if (e.i < 0 || e.j < 0 || e.i >= data.n || e.j >= data.n || e.i >= e.j)
      throw Error(ErrorCode::IndexOutOfRange, pair_name(e.i, e.j));
    if (!std::isfinite(e.d) || !std::isfinite(e.w))
      throw Error(ErrorCode::NonFiniteValue, pair_name(e.i, e.j));
    if (e.d < 0.0)
      throw Error(ErrorCode::NegativeDistance, pair_name(e.i, e.j));
    if (e.w <= 0.0)
      throw Error(ErrorCode::NonPositiveWeight, pair_name(e.i, e.j));
    std::uint64_t key =
        (static_cast<std::uint64_t>(e.i) << 32) | static_cast<std::uint32_t>(e.j);
    if (!seen.insert(key).second)
      throw Error(ErrorCode::DuplicatePair, pair_name(e.i, e.j));
  }
}

DissimilarityData complete_from_matrix(const Eigen::MatrixXd& M) {
  const Eigen::Index n = M.rows();
  if (M.cols() != n)
    throw Error(ErrorCode::DimensionMismatch, "matrix must be square");
  DissimilarityData data;
  data.n = static_cast<int>(n);
  data.edges.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (M(i, i) != 0.0)
      throw Error(ErrorCode::NonzeroDiagonal, "entry (" + std::to_string(i) + ")");
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (M(i, j) != M(j, i))
        throw Error(ErrorCode::AsymmetricInput,
                    pair_name(static_cast<int>(i), static_cast<int>(j)));
      if (M(i, j) < 0.0)
        throw Error(ErrorCode::NegativeDistance,
                    pair_name(static_cast<int>(i), static_cast<int>(j)));
      data.edges.push_back({static_cast<int>(i), static_cast<int>(j), M(i, j), 1.0});
    }
  }
  validate_dissimilarity(data);
  return data;
}

double orthonormality_defect(const Eigen::MatrixXd& Q) {
  const Eigen::Index q = Q.rows();
  return (Q * Q.transpose() - Eigen::MatrixXd::Identity(q, q)).norm();
}

ProjectionStack ProjectionStack::from_matrices(std::vector<Eigen::MatrixXd> mats) {
  for (std::size_t k = 0; k < mats.size(); ++k) {
    if (mats[k].rows() > mats[k].cols())
      throw Error(ErrorCode::DimensionMismatch,
                  "projection " + std::to_string(k) + " has q > p");
    if (mats[k].rows() != mats[0].rows() || mats[k].cols() != mats[0].cols())
      throw Error(ErrorCode::DimensionMismatch,
                  "projection " + std::to_string(k) + " shape differs");
    double defect = orthonormality_defect(mats[k]);
    if (!(defect <= 1e-9))
      throw Error(ErrorCode::NotOrthogonal,
                  "projection " + std::to_string(k) + " has ||QQ^T - I|| = " +
                      std::to_string(defect));
  }
  ProjectionStack stack;
  stack.matrices = std::move(mats);
  return stack;
}

void validate_config(const OptimizerConfig& cfg) {
  if (cfg.T < 0) throw Error(ErrorCode::InvalidArgument, "T must be >= 0");
  if (!(cfg.mu0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "mu0 must be > 0");
  if (!(cfg.c > 0.0 && cfg.c <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "c must be in (0, 1]");
  if (!(cfg.epsilon_dist >= 0.0))
    throw Error(ErrorCode::InvalidArgument, "epsilon_dist must be >= 0");
  if (cfg.grad_tol < 0.0)
    throw Error(ErrorCode::InvalidArgument, "grad_tol must be >= 0");
}

}  // namespace mpse
