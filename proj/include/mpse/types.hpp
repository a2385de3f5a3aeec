#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

// Core value types shared by every module. All of them are plain data:
// immutable after construction in practice, cheap to copy or move, and
// safe to share across threads.

namespace mpse {

enum class ErrorCode {
  DuplicatePair,
  NegativeDistance,
  IndexOutOfRange,
  NonPositiveWeight,
  NonFiniteValue,
  AsymmetricInput,
  NonzeroDiagonal,
  DimensionMismatch,
  CountMismatch,
  ZeroNormalizer,
  NotAPartition,
  EmptyIntersection,
  DisconnectedRelation,
  NotOrthogonal,
  InvalidArgument,
  ParseError,
  IoError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// One weighted dissimilarity between objects i and j, stored once with i < j.
struct Edge {
  int i = 0;
  int j = 0;
  double d = 0.0;  // target dissimilarity, >= 0
  double w = 1.0;  // weight, > 0
};

// Sparse symmetric pairwise dissimilarities for a single relation.
struct DissimilarityData {
  int n = 0;
  std::vector<Edge> edges;

  bool complete() const {
    return static_cast<long long>(edges.size()) ==
           static_cast<long long>(n) * (n - 1) / 2;
  }
};

// Throws mpse::Error naming the offending pair if any invariant is violated:
// 0 <= i < j < n, no duplicates, d >= 0 and finite, w > 0 and finite.
void validate_dissimilarity(const DissimilarityData& data);

// Builds a complete edge list (w = 1) from a dense symmetric matrix with a
// zero diagonal and nonnegative entries.
DissimilarityData complete_from_matrix(const Eigen::MatrixXd& M);

// n points in R^p, one row per point. The optimization variable X.
struct Embedding {
  Eigen::MatrixXd coords;  // n x p

  Embedding() = default;
  explicit Embedding(Eigen::MatrixXd c) : coords(std::move(c)) {}
  Eigen::Index n() const { return coords.rows(); }
  Eigen::Index p() const { return coords.cols(); }
};

// K row-orthonormal q x p matrices. q <= p; the default geometry is q=2, p=3.
struct ProjectionStack {
  std::vector<Eigen::MatrixXd> matrices;

  ProjectionStack() = default;
  // Validating constructor: rejects matrices with ||Q Q^T - I||_F > 1e-9.
  static ProjectionStack from_matrices(std::vector<Eigen::MatrixXd> mats);

  int K() const { return static_cast<int>(matrices.size()); }
  Eigen::Index q() const { return matrices.empty() ? 0 : matrices[0].rows(); }
  Eigen::Index p() const { return matrices.empty() ? 0 : matrices[0].cols(); }
};

double orthonormality_defect(const Eigen::MatrixXd& Q);

// Normalized stress values for one embedding against K relations.
struct StressReport {
  double total = 0.0;                   // mean of per_perspective
  std::vector<double> per_perspective;  // normalized stress per relation
  double raw_total = 0.0;               // unnormalized weighted stress sum
};

enum class Mode { Fixed, Varying };
enum class InitStrategy { Random, Smart, Given };

// Reduction policy for the edge kernels. Serial keeps a fixed summation
// order and is bit-reproducible; Parallel uses the OpenMP kernels.
enum class Exec { Serial, Parallel };

struct OptimizerConfig {
  int T = 100;            // max iterations
  double mu0 = 1.0;       // initial learning rate
  double c = 1.0;         // per-edge inclusion probability, (0, 1]
  std::uint64_t seed = 0;
  Mode mode = Mode::Fixed;
  InitStrategy init = InitStrategy::Random;
  double epsilon_dist = 1e-9;  // pairs closer than this are skipped in gradients
  double grad_tol = 0.0;       // early stop on normalized gradient size; 0 = off
  Exec exec = Exec::Parallel;
};

void validate_config(const OptimizerConfig& cfg);

// Per-iteration computation history (the quantities a convergence plot needs).
struct TraceRecord {
  int iteration = 0;
  double total_stress = 0.0;    // normalized, all perspectives
  double grad_norm = 0.0;       // ||grad||_F / sqrt(n*p)
  double learning_rate_x = 0.0;
  double learning_rate_q = 0.0; // 0 in fixed mode
  double step_norm = 0.0;       // ||X_t - X_{t-1}||_F / sqrt(n*p)
};

struct RunResult {
  Embedding embedding;
  ProjectionStack projections;
  StressReport report;
  std::vector<TraceRecord> trace;
  int iterations_used = 0;
  // Set when the divergence guard tripped 20 times in a row; embedding then
  // holds the last finite iterate.
  bool diverged = false;
};

}  // namespace mpse
