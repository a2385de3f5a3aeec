#include "mpse/procrustes.hpp"

#include <Eigen/SVD>
#include <cmath>

#include "mpse/types.hpp"

namespace mpse {

double procrustes_residual(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  if (A.rows() != B.rows() || A.cols() != B.cols())
    throw Error(ErrorCode::DimensionMismatch, "point sets must match in shape");
  const double n = static_cast<double>(A.rows());

  Eigen::MatrixXd Ac = A.rowwise() - A.colwise().mean();
  Eigen::MatrixXd Bc = B.rowwise() - B.colwise().mean();

  // Orthogonal (rotation or reflection) alignment maximizing tr(R^T Ac^T Bc).
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Ac.transpose() * Bc,
                                        Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::MatrixXd R = svd.matrixU() * svd.matrixV().transpose();
  return std::sqrt((Ac * R - Bc).squaredNorm() / n);
}

}  // namespace mpse
