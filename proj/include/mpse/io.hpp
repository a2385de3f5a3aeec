#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "mpse/datasets.hpp"
#include "mpse/types.hpp"

// File formats:
//   dissimilarity CSV   lines `i,j,d[,w]`, optional header
//   dense matrix CSV    n rows of n comma-separated values
//   points CSV          `x,y` or `x,y,z`, optional header
//   labels CSV          one integer per line
//   graph CSV           `relation,i,j,count`, optional header
//   result JSON         {"n","p","q","coords","projections","stress","trace"}
//   trace CSV           `iteration,total_stress,grad_norm,lr_X,lr_Q,step_norm`
// Doubles are written with round-trip precision; identical inputs produce
// byte-identical files.

namespace mpse {

DissimilarityData read_dissimilarity_csv(const std::string& path);
void write_dissimilarity_csv(const std::string& path, const DissimilarityData& data);

Eigen::MatrixXd read_matrix_csv(const std::string& path);

Eigen::MatrixXd read_points_csv(const std::string& path);
void write_points_csv(const std::string& path, const Eigen::MatrixXd& points);

std::vector<int> read_labels_csv(const std::string& path);
void write_labels_csv(const std::string& path, const std::vector<int>& labels);

MultiRelationGraph read_graph_csv(const std::string& path);
void write_graph_csv(const std::string& path, const MultiRelationGraph& g);

// A result file carries at least the embedding; the remaining blocks are
// optional so the same schema serves optimizer output, smart-init output,
// and ground-truth instance files.
struct ResultFile {
  Embedding embedding;
  std::optional<ProjectionStack> projections;
  std::optional<StressReport> stress;
  std::vector<TraceRecord> trace;
  std::optional<int> iterations_used;
  std::optional<std::uint64_t> seed;
  std::optional<bool> diverged;
};

void write_result_json(const std::string& path, const ResultFile& result);
ResultFile read_result_json(const std::string& path);

void write_projections_json(const std::string& path, const ProjectionStack& P);
ProjectionStack read_projections_json(const std::string& path);

void write_trace_csv(const std::string& path, const std::vector<TraceRecord>& trace);

// Round-trip formatting for doubles ("%.17g" semantics).
std::string format_double(double x);

}  // namespace mpse
