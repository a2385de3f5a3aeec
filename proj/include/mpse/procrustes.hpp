#pragma once

#include <Eigen/Dense>

namespace mpse {

// Minimal root-mean-square mismatch between two n x p point sets over all
// rigid alignments (rotation or reflection plus translation, no scaling).
// Measures recovery of an embedding up to the symmetries the stress cannot
// distinguish.
double procrustes_residual(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

}  // namespace mpse
