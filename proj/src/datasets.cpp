#include "mpse/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>

#include "mpse/projections.hpp"
#include "mpse/stress.hpp"

namespace mpse {

LabeledPoints2D sample_circle(int n, Rng& rng, bool stratified) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be >= 1");
  LabeledPoints2D out;
  out.coords.resize(n, 2);
  for (int i = 0; i < n; ++i) {
    double a = stratified ? 2.0 * M_PI * i / n : 2.0 * M_PI * rng.uniform();
    out.coords(i, 0) = std::cos(a);
    out.coords(i, 1) = std::sin(a);
  }
  return out;
}

namespace {

// Point at perimeter position s in [0, 4) of the side-1 square centered at
// the origin, walking counterclockwise from the (-1/2, -1/2) corner.
Eigen::RowVector2d square_boundary_point(double s) {
  double frac = s - std::floor(s);
  switch (static_cast<int>(std::floor(s)) & 3) {
    case 0: return {frac - 0.5, -0.5};
    case 1: return {0.5, frac - 0.5};
    case 2: return {0.5 - frac, 0.5};
    default: return {-0.5, 0.5 - frac};
  }
}

}  // namespace

LabeledPoints2D sample_square(int n, Rng& rng, bool stratified) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be >= 1");
  LabeledPoints2D out;
  out.coords.resize(n, 2);
  for (int i = 0; i < n; ++i) {
    double s = stratified ? 4.0 * i / n : 4.0 * rng.uniform();
    out.coords.row(i) = square_boundary_point(s);
  }
  return out;
}

LabeledPoints2D sample_clusters(int n, double separation, Rng& rng) {
  if (n < 2 || n % 2 != 0)
    throw Error(ErrorCode::InvalidArgument, "n must be even and >= 2");
  if (separation < 0.0)
    throw Error(ErrorCode::InvalidArgument, "separation must be >= 0");
  LabeledPoints2D out;
  out.coords.resize(n, 2);
  out.labels.resize(n);
  const int half = n / 2;
  for (int i = 0; i < n; ++i) {
    int label = i < half ? 0 : 1;
    double cx = (label == 0 ? -0.5 : 0.5) * separation;
    out.coords(i, 0) = cx + rng.normal();
    out.coords(i, 1) = rng.normal();
    out.labels[i] = label;
  }
  return out;
}

Embedding sample_ball3d(int n, Rng& rng) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be >= 1");
  Eigen::MatrixXd coords(n, 3);
  for (int i = 0; i < n; ++i) coords.row(i) = rng.ball_point(3, 1.0).transpose();
  return Embedding(std::move(coords));
}

DissimilarityData distances_from_points(const Eigen::MatrixXd& points) {
  if (!points.allFinite())
    throw Error(ErrorCode::NonFiniteValue, "point coordinates");
  const int n = static_cast<int>(points.rows());
  DissimilarityData data;
  data.n = n;
  data.edges.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      data.edges.push_back({i, j, (points.row(i) - points.row(j)).norm(), 1.0});
  return data;
}

DissimilarityData graph_dissimilarity(const MultiRelationGraph& g, int relation) {
  if (relation < 0 || relation >= static_cast<int>(g.relations.size()))
    throw Error(ErrorCode::IndexOutOfRange,
                "relation " + std::to_string(relation));
  const int n = g.n;

  // Merge parallel tie records, then turn counts into reciprocal lengths.
  std::map<std::pair<int, int>, int> counts;
  for (const auto& tie : g.relations[relation]) {
    int i = std::min(tie.i, tie.j);
    int j = std::max(tie.i, tie.j);
    if (i < 0 || j >= n || i == j)
      throw Error(ErrorCode::IndexOutOfRange,
                  "tie (" + std::to_string(tie.i) + ", " + std::to_string(tie.j) + ")");
    if (tie.count < 1)
      throw Error(ErrorCode::InvalidArgument, "tie counts must be >= 1");
    counts[{i, j}] += tie.count;
  }

  struct Arc {
    int to;
    double len;
  };
  std::vector<std::vector<Arc>> adj(n);
  for (const auto& [pair, count] : counts) {
    double len = 1.0 / count;
    adj[pair.first].push_back({pair.second, len});
    adj[pair.second].push_back({pair.first, len});
  }

  // Dijkstra from every source; lengths are positive.
  const double inf = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd dist = Eigen::MatrixXd::Constant(n, n, inf);
  for (int src = 0; src < n; ++src) {
    std::priority_queue<std::pair<double, int>,
                        std::vector<std::pair<double, int>>, std::greater<>>
        heap;
    dist(src, src) = 0.0;
    heap.push({0.0, src});
    while (!heap.empty()) {
      auto [d, u] = heap.top();
      heap.pop();
      if (d > dist(src, u)) continue;
      for (const Arc& arc : adj[u]) {
        double nd = d + arc.len;
        if (nd < dist(src, arc.to)) {
          dist(src, arc.to) = nd;
          heap.push({nd, arc.to});
        }
      }
    }
  }

  DissimilarityData data;
  data.n = n;
  data.edges.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double d = dist(i, j);
      if (!std::isfinite(d))
        throw Error(ErrorCode::DisconnectedRelation,
                    "nodes " + std::to_string(i) + " and " + std::to_string(j) +
                        " are not connected");
      data.edges.push_back({i, j, d, 1.0 / d});
    }
  }
  return data;
}

ScalabilityInstance scalability_instance(int n, int K, Rng& rng) {
  if (n < 2 || K < 1)
    throw Error(ErrorCode::InvalidArgument, "need n >= 2 and K >= 1");
  ScalabilityInstance inst;
  inst.groundtruth = sample_ball3d(n, rng);
  inst.projections = random_viewpoints(K, rng);
  inst.dissimilarities.reserve(K);
  for (int k = 0; k < K; ++k)
    inst.dissimilarities.push_back(distances_from_points(
        apply_one(inst.projections.matrices[k], inst.groundtruth.coords)));
  return inst;
}

}  // namespace mpse
