#include "mpse/stress.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mpse/projections.hpp"

namespace mpse {

namespace {

void check_shapes(const Eigen::MatrixXd& Y, const DissimilarityData& data) {
  if (Y.rows() != data.n)
    throw Error(ErrorCode::DimensionMismatch,
                "point count " + std::to_string(Y.rows()) + " != n = " +
                    std::to_string(data.n));
}

void check_stack(const Embedding& X, const ProjectionStack& P,
                 const std::vector<DissimilarityData>& D) {
  if (static_cast<int>(D.size()) != P.K())
    throw Error(ErrorCode::CountMismatch,
                std::to_string(D.size()) + " relations vs K = " +
                    std::to_string(P.K()));
  if (P.K() > 0 && X.p() != P.p())
    throw Error(ErrorCode::DimensionMismatch, "embedding p != projection p");
  for (const auto& d : D)
    if (d.n != X.n())
      throw Error(ErrorCode::DimensionMismatch, "relation n != embedding n");
}

// ---- serial reference kernels (fixed summation order) ----

double stress_serial(const Eigen::MatrixXd& Y, const std::vector<Edge>& edges) {
  double s = 0.0;
  for (const Edge& e : edges) {
    double dist = (Y.row(e.i) - Y.row(e.j)).norm();
    double r = e.d - dist;
    s += e.w * r * r;
  }
  return s;
}

double normalizer_serial(const std::vector<Edge>& edges) {
  double s = 0.0;
  for (const Edge& e : edges) s += e.w * e.d * e.d;
  return s;
}

template <typename EdgeAt>
void grad_accumulate(Eigen::MatrixXd& G, const Eigen::MatrixXd& Y,
                     const EdgeAt& edge_at, std::size_t count, double scale,
                     double eps) {
  const Eigen::Index q = Y.cols();
  Eigen::RowVectorXd dvec(q);
  for (std::size_t idx = 0; idx < count; ++idx) {
    const Edge& e = edge_at(idx);
    dvec = Y.row(e.i) - Y.row(e.j);
    double dist = dvec.norm();
    if (dist < eps) continue;  // subgradient 0 at coincidence
    double coef = scale * 2.0 * e.w * (dist - e.d) / dist;
    G.row(e.i) += coef * dvec;
    G.row(e.j) -= coef * dvec;
  }
}

// ---- OpenMP kernels ----

double stress_parallel(const Eigen::MatrixXd& Y, const std::vector<Edge>& edges) {
  double s = 0.0;
  const std::int64_t m = static_cast<std::int64_t>(edges.size());
#pragma omp parallel for schedule(static) reduction(+ : s)
  for (std::int64_t idx = 0; idx < m; ++idx) {
    const Edge& e = edges[idx];
    double dist = (Y.row(e.i) - Y.row(e.j)).norm();
    double r = e.d - dist;
    s += e.w * r * r;
  }
  return s;
}

double normalizer_parallel(const std::vector<Edge>& edges) {
  double s = 0.0;
  const std::int64_t m = static_cast<std::int64_t>(edges.size());
#pragma omp parallel for schedule(static) reduction(+ : s)
  for (std::int64_t idx = 0; idx < m; ++idx)
    s += edges[idx].w * edges[idx].d * edges[idx].d;
  return s;
}

// Scatter-add over edges races on the point rows, so each thread fills a
// private buffer and the buffers are combined afterwards in thread order.
template <typename EdgeAt>
void grad_accumulate_parallel(Eigen::MatrixXd& G, const Eigen::MatrixXd& Y,
                              const EdgeAt& edge_at, std::size_t count,
                              double scale, double eps) {
#ifdef _OPENMP
  const Eigen::Index n = Y.rows();
  const Eigen::Index q = Y.cols();
  const int nt = omp_get_max_threads();
  std::vector<Eigen::MatrixXd> locals(nt);
#pragma omp parallel num_threads(nt)
  {
    const int tid = omp_get_thread_num();
    Eigen::MatrixXd& local = locals[tid];
    local.setZero(n, q);
    Eigen::RowVectorXd dvec(q);
    const std::int64_t m = static_cast<std::int64_t>(count);
#pragma omp for schedule(static)
    for (std::int64_t idx = 0; idx < m; ++idx) {
      const Edge& e = edge_at(static_cast<std::size_t>(idx));
      dvec = Y.row(e.i) - Y.row(e.j);
      double dist = dvec.norm();
      if (dist < eps) continue;
      double coef = scale * 2.0 * e.w * (dist - e.d) / dist;
      local.row(e.i) += coef * dvec;
      local.row(e.j) -= coef * dvec;
    }
  }
  for (int t = 0; t < nt; ++t) G += locals[t];
#else
  grad_accumulate(G, Y, edge_at, count, scale, eps);
#endif
}

template <typename EdgeAt>
void grad_dispatch(Eigen::MatrixXd& G, const Eigen::MatrixXd& Y,
                   const EdgeAt& edge_at, std::size_t count, double scale,
                   double eps, Exec exec) {
  if (exec == Exec::Parallel)
    grad_accumulate_parallel(G, Y, edge_at, count, scale, eps);
  else
    grad_accumulate(G, Y, edge_at, count, scale, eps);
}

}  // namespace

double mds_stress(const Eigen::MatrixXd& Y, const DissimilarityData& data,
                  Exec exec) {
  check_shapes(Y, data);
  return exec == Exec::Parallel ? stress_parallel(Y, data.edges)
                                : stress_serial(Y, data.edges);
}

double normalized_mds_stress(const Eigen::MatrixXd& Y,
                             const DissimilarityData& data, Exec exec) {
  check_shapes(Y, data);
  double norm = exec == Exec::Parallel ? normalizer_parallel(data.edges)
                                       : normalizer_serial(data.edges);
  if (norm <= 0.0)
    throw Error(ErrorCode::ZeroNormalizer, "all dissimilarities are zero");
  double raw = exec == Exec::Parallel ? stress_parallel(Y, data.edges)
                                      : stress_serial(Y, data.edges);
  return raw / norm;
}

StressReport mpse_stress(const Embedding& X, const ProjectionStack& P,
                         const std::vector<DissimilarityData>& D, Exec exec) {
  check_stack(X, P, D);
  StressReport report;
  report.per_perspective.reserve(D.size());
  for (int k = 0; k < P.K(); ++k) {
    Eigen::MatrixXd Y = apply_one(P.matrices[k], X.coords);
    double norm = exec == Exec::Parallel ? normalizer_parallel(D[k].edges)
                                         : normalizer_serial(D[k].edges);
    if (norm <= 0.0)
      throw Error(ErrorCode::ZeroNormalizer,
                  "relation " + std::to_string(k) + " has zero dissimilarities");
    double raw = exec == Exec::Parallel ? stress_parallel(Y, D[k].edges)
                                        : stress_serial(Y, D[k].edges);
    report.per_perspective.push_back(raw / norm);
    report.raw_total += raw;
  }
  for (double v : report.per_perspective) report.total += v;
  report.total /= static_cast<double>(P.K());
  return report;
}

Eigen::MatrixXd mds_stress_gradient(const Eigen::MatrixXd& Y,
                                    const DissimilarityData& data,
                                    double epsilon_dist, Exec exec) {
  check_shapes(Y, data);
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(Y.rows(), Y.cols());
  const auto& edges = data.edges;
  grad_dispatch(
      G, Y, [&edges](std::size_t idx) -> const Edge& { return edges[idx]; },
      edges.size(), 1.0, epsilon_dist, exec);
  return G;
}

Eigen::MatrixXd mds_stress_gradient_sampled(const Eigen::MatrixXd& Y,
                                            const DissimilarityData& data,
                                            const EdgeSample& sample,
                                            double epsilon_dist, Exec exec) {
  check_shapes(Y, data);
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(Y.rows(), Y.cols());
  const auto& edges = data.edges;
  const auto& keep = sample.retained;
  grad_dispatch(
      G, Y,
      [&edges, &keep](std::size_t idx) -> const Edge& {
        return edges[keep[idx]];
      },
      keep.size(), 1.0 / sample.c, epsilon_dist, exec);
  return G;
}

GradientPair stress_gradients(const Embedding& X, const ProjectionStack& P,
                              const std::vector<DissimilarityData>& D,
                              const std::vector<EdgeSample>* samples,
                              bool want_dq, double epsilon_dist, Exec exec,
                              const std::vector<double>* block_scales) {
  check_stack(X, P, D);
  if (samples && samples->size() != D.size())
    throw Error(ErrorCode::CountMismatch, "one sample required per relation");
  if (block_scales && block_scales->size() != D.size())
    throw Error(ErrorCode::CountMismatch, "one scale required per relation");
  GradientPair out;
  out.dX = Eigen::MatrixXd::Zero(X.n(), X.p());
  if (want_dq) out.dQ.reserve(D.size());
  for (int k = 0; k < P.K(); ++k) {
    const Eigen::MatrixXd& Q = P.matrices[k];
    Eigen::MatrixXd Y = apply_one(Q, X.coords);
    Eigen::MatrixXd G =
        samples ? mds_stress_gradient_sampled(Y, D[k], (*samples)[k],
                                              epsilon_dist, exec)
                : mds_stress_gradient(Y, D[k], epsilon_dist, exec);
    if (block_scales) G *= (*block_scales)[k];
    out.dX.noalias() += G * Q;  // chain rule through the linear perspective
    if (want_dq) out.dQ.push_back(G.transpose() * X.coords);
  }
  return out;
}

std::vector<double> normalized_gradient_scales(
    const std::vector<DissimilarityData>& D) {
  std::vector<double> scales;
  scales.reserve(D.size());
  for (const auto& data : D) {
    double norm = normalizer_serial(data.edges);
    if (norm <= 0.0)
      throw Error(ErrorCode::ZeroNormalizer, "relation has zero dissimilarities");
    scales.push_back(1.0 / (norm * static_cast<double>(D.size())));
  }
  return scales;
}

Eigen::MatrixXd embedding_gradient(const Embedding& X, const ProjectionStack& P,
                                   const std::vector<DissimilarityData>& D,
                                   const std::vector<EdgeSample>* samples,
                                   double epsilon_dist, Exec exec) {
  return stress_gradients(X, P, D, samples, false, epsilon_dist, exec).dX;
}

std::vector<Eigen::MatrixXd> projection_gradient(
    const Embedding& X, const ProjectionStack& P,
    const std::vector<DissimilarityData>& D,
    const std::vector<EdgeSample>* samples, double epsilon_dist, Exec exec) {
  return stress_gradients(X, P, D, samples, true, epsilon_dist, exec).dQ;
}

EdgeSample subsample(const DissimilarityData& data, double c, Rng& rng) {
  if (!(c > 0.0 && c <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "c must be in (0, 1]");
  EdgeSample sample;
  sample.c = c;
  const std::size_t m = data.edges.size();
  if (c >= 1.0) {
    sample.retained.resize(m);
    for (std::size_t i = 0; i < m; ++i)
      sample.retained[i] = static_cast<std::uint32_t>(i);
    return sample;
  }
  // Geometric gaps between retained edges reproduce independent Bernoulli
  // draws in O(c m) time.
  const double log_skip = std::log1p(-c);
  double pos = -1.0;
  while (true) {
    double u = rng.uniform();
    double gap = std::floor(std::log1p(-u) / log_skip);
    pos += 1.0 + gap;
    if (pos >= static_cast<double>(m)) break;
    sample.retained.push_back(static_cast<std::uint32_t>(pos));
  }
  return sample;
}

std::vector<EdgeSample> subsample_all(const std::vector<DissimilarityData>& D,
                                      double c, Rng& rng) {
  std::vector<EdgeSample> samples;
  samples.reserve(D.size());
  for (const auto& d : D) samples.push_back(subsample(d, c, rng));
  return samples;
}

Eigen::MatrixXd batch_gradient_estimate(const Eigen::MatrixXd& Y,
                                        const DissimilarityData& data,
                                        const std::vector<std::vector<int>>& batches,
                                        double epsilon_dist) {
  check_shapes(Y, data);
  const int n = data.n;
  std::vector<int> batch_of(n, -1);
  std::vector<int> batch_size(batches.size(), 0);
  for (std::size_t b = 0; b < batches.size(); ++b) {
    for (int node : batches[b]) {
      if (node < 0 || node >= n || batch_of[node] != -1)
        throw Error(ErrorCode::NotAPartition,
                    "node " + std::to_string(node) + " misassigned");
      batch_of[node] = static_cast<int>(b);
      ++batch_size[b];
    }
  }
  for (int i = 0; i < n; ++i)
    if (batch_of[i] == -1)
      throw Error(ErrorCode::NotAPartition,
                  "node " + std::to_string(i) + " unassigned");

  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(Y.rows(), Y.cols());
  for (const Edge& e : data.edges) {
    if (batch_of[e.i] != batch_of[e.j]) continue;
    Eigen::RowVectorXd dvec = Y.row(e.i) - Y.row(e.j);
    double dist = dvec.norm();
    if (dist < epsilon_dist) continue;
    double coef = 2.0 * (dist - e.d) / dist *
                  (static_cast<double>(n) / batch_size[batch_of[e.i]]);
    G.row(e.i) += coef * dvec;
    G.row(e.j) -= coef * dvec;
  }
  return G;
}

}  // namespace mpse
