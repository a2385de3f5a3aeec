#include "mpse/optimizer.hpp"

#include <cmath>
#include <map>

#include "mpse/projections.hpp"

namespace mpse {

namespace {

constexpr double kDenomFloor = 1e-14;
constexpr double kGuardRatio = 1e6;
constexpr int kGuardLimit = 20;

double frobenius_dot(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.cwiseProduct(b).sum();
}

}  // namespace

double adaptive_rate(const Eigen::MatrixXd& X_prev, const Eigen::MatrixXd& X_curr,
                     const Eigen::MatrixXd& g_prev, const Eigen::MatrixXd& g_curr,
                     double mu_fallback) {
  Eigen::MatrixXd dg = g_curr - g_prev;
  double denom = dg.squaredNorm();
  if (denom < kDenomFloor) return mu_fallback;
  double mu = frobenius_dot(X_curr - X_prev, dg) / denom;
  if (!std::isfinite(mu) || mu <= 0.0) return mu_fallback;
  return mu;
}

double adaptive_rate(const std::vector<Eigen::MatrixXd>& X_prev,
                     const std::vector<Eigen::MatrixXd>& X_curr,
                     const std::vector<Eigen::MatrixXd>& g_prev,
                     const std::vector<Eigen::MatrixXd>& g_curr,
                     double mu_fallback) {
  double num = 0.0, denom = 0.0;
  for (std::size_t k = 0; k < X_prev.size(); ++k) {
    Eigen::MatrixXd dg = g_curr[k] - g_prev[k];
    denom += dg.squaredNorm();
    num += frobenius_dot(X_curr[k] - X_prev[k], dg);
  }
  if (denom < kDenomFloor) return mu_fallback;
  double mu = num / denom;
  if (!std::isfinite(mu) || mu <= 0.0) return mu_fallback;
  return mu;
}

Embedding random_init(int n, int p, double radius, Rng& rng) {
  if (!(radius > 0.0))
    throw Error(ErrorCode::InvalidArgument, "radius must be > 0");
  Eigen::MatrixXd coords(n, p);
  for (int i = 0; i < n; ++i) coords.row(i) = rng.ball_point(p, radius).transpose();
  return Embedding(std::move(coords));
}

namespace {

struct LoopState {
  std::vector<TraceRecord> trace;
  int iterations_used = 0;
  bool diverged = false;
};

void push_initial_record(LoopState& state, double stress0, double mu0) {
  TraceRecord rec;
  rec.iteration = 0;
  rec.total_stress = stress0;
  rec.learning_rate_x = mu0;
  rec.learning_rate_q = 0.0;
  state.trace.push_back(rec);
}

}  // namespace

RunResult run_fixed(const std::vector<DissimilarityData>& D,
                    const ProjectionStack& P, const Embedding& X0,
                    const OptimizerConfig& cfg, const IterationCallback& callback) {
  validate_config(cfg);
  if (!X0.coords.allFinite())
    throw Error(ErrorCode::NonFiniteValue, "initial embedding");

  Rng rng(cfg.seed);
  Embedding X = X0;
  const double normfac = std::sqrt(static_cast<double>(X.n() * X.p()));
  // descend on the normalized objective so mu0 is scale-free
  const std::vector<double> scales = normalized_gradient_scales(D);

  StressReport report = mpse_stress(X, P, D, cfg.exec);
  const double initial_stress = report.total;
  double mu = cfg.mu0;

  LoopState state;
  push_initial_record(state, report.total, mu);
  if (callback) callback({0, X, P});

  int guard_streak = 0;
  for (int t = 1; t <= cfg.T; ++t) {
    std::vector<EdgeSample> xi = subsample_all(D, cfg.c, rng);
    Eigen::MatrixXd g0 = stress_gradients(X, P, D, &xi, false, cfg.epsilon_dist,
                                          cfg.exec, &scales)
                             .dX;
    double gnorm = g0.norm() / normfac;

    Embedding Xn(X.coords - mu * g0);
    bool finite = Xn.coords.allFinite();
    StressReport new_report;
    if (finite) new_report = mpse_stress(Xn, P, D, cfg.exec);

    if (!finite || !std::isfinite(new_report.total) ||
        new_report.total > kGuardRatio * initial_stress) {
      // Divergence guard: drop the step, halve the rate, move on.
      ++guard_streak;
      mu *= 0.5;
      TraceRecord rec;
      rec.iteration = t;
      rec.total_stress = report.total;
      rec.grad_norm = gnorm;
      rec.learning_rate_x = mu;
      state.trace.push_back(rec);
      state.iterations_used = t;
      if (callback) callback({t, X, P});
      if (guard_streak >= kGuardLimit) {
        state.diverged = true;
        break;
      }
      continue;
    }
    guard_streak = 0;

    Eigen::MatrixXd g1 = stress_gradients(Xn, P, D, &xi, false,
                                          cfg.epsilon_dist, cfg.exec, &scales)
                             .dX;
    double mu_next = adaptive_rate(X.coords, Xn.coords, g0, g1, mu);

    TraceRecord rec;
    rec.iteration = t;
    rec.total_stress = new_report.total;
    rec.grad_norm = gnorm;
    rec.learning_rate_x = mu;
    rec.step_norm = (Xn.coords - X.coords).norm() / normfac;
    state.trace.push_back(rec);

    X = std::move(Xn);
    report = new_report;
    mu = mu_next;
    state.iterations_used = t;
    if (callback) callback({t, X, P});
    if (cfg.grad_tol > 0.0 && gnorm < cfg.grad_tol) break;
  }

  RunResult result;
  result.embedding = std::move(X);
  result.projections = P;
  result.report = report;
  result.trace = std::move(state.trace);
  result.iterations_used = state.iterations_used;
  result.diverged = state.diverged;
  return result;
}

RunResult run_varying(const std::vector<DissimilarityData>& D,
                      const Embedding& X0, const ProjectionStack& Q0,
                      const OptimizerConfig& cfg, const IterationCallback& callback) {
  validate_config(cfg);
  if (!X0.coords.allFinite())
    throw Error(ErrorCode::NonFiniteValue, "initial embedding");

  Rng rng(cfg.seed);
  Embedding X = X0;
  ProjectionStack Q = Q0;
  const double normfac = std::sqrt(static_cast<double>(X.n() * X.p()));
  const std::vector<double> scales = normalized_gradient_scales(D);

  StressReport report = mpse_stress(X, Q, D, cfg.exec);
  const double initial_stress = report.total;
  double mu_x = cfg.mu0;
  double mu_q = cfg.mu0;

  LoopState state;
  push_initial_record(state, report.total, mu_x);
  state.trace.back().learning_rate_q = mu_q;
  if (callback) callback({0, X, Q});

  int guard_streak = 0;
  for (int t = 1; t <= cfg.T; ++t) {
    std::vector<EdgeSample> xi = subsample_all(D, cfg.c, rng);
    // Both gradients at the previous iterate, from the same sample.
    GradientPair g0 = stress_gradients(X, Q, D, &xi, true, cfg.epsilon_dist,
                                       cfg.exec, &scales);
    double gnorm = g0.dX.norm() / normfac;

    Embedding Xn(X.coords - mu_x * g0.dX);
    ProjectionStack Qn = Q;
    bool finite = Xn.coords.allFinite();
    for (int k = 0; k < Q.K() && finite; ++k) {
      Eigen::MatrixXd stepped = Q.matrices[k] - mu_q * g0.dQ[k];
      if (!stepped.allFinite()) {
        finite = false;
        break;
      }
      Qn.matrices[k] = retract(stepped);
    }
    StressReport new_report;
    if (finite) new_report = mpse_stress(Xn, Qn, D, cfg.exec);

    if (!finite || !std::isfinite(new_report.total) ||
        new_report.total > kGuardRatio * initial_stress) {
      ++guard_streak;
      mu_x *= 0.5;
      mu_q *= 0.5;
      TraceRecord rec;
      rec.iteration = t;
      rec.total_stress = report.total;
      rec.grad_norm = gnorm;
      rec.learning_rate_x = mu_x;
      rec.learning_rate_q = mu_q;
      state.trace.push_back(rec);
      state.iterations_used = t;
      if (callback) callback({t, X, Q});
      if (guard_streak >= kGuardLimit) {
        state.diverged = true;
        break;
      }
      continue;
    }
    guard_streak = 0;

    GradientPair g1 = stress_gradients(Xn, Qn, D, &xi, true, cfg.epsilon_dist,
                                       cfg.exec, &scales);
    double mu_x_next = adaptive_rate(X.coords, Xn.coords, g0.dX, g1.dX, mu_x);
    double mu_q_next =
        adaptive_rate(Q.matrices, Qn.matrices, g0.dQ, g1.dQ, mu_q);

    TraceRecord rec;
    rec.iteration = t;
    rec.total_stress = new_report.total;
    rec.grad_norm = gnorm;
    rec.learning_rate_x = mu_x;
    rec.learning_rate_q = mu_q;
    rec.step_norm = (Xn.coords - X.coords).norm() / normfac;
    state.trace.push_back(rec);

    X = std::move(Xn);
    Q = std::move(Qn);
    report = new_report;
    mu_x = mu_x_next;
    mu_q = mu_q_next;
    state.iterations_used = t;
    if (callback) callback({t, X, Q});
    if (cfg.grad_tol > 0.0 && gnorm < cfg.grad_tol) break;
  }

  RunResult result;
  result.embedding = std::move(X);
  result.projections = std::move(Q);
  result.report = report;
  result.trace = std::move(state.trace);
  result.iterations_used = state.iterations_used;
  result.diverged = state.diverged;
  return result;
}

DissimilarityData combined_dissimilarity(const std::vector<DissimilarityData>& D,
                                         int d1, int d2) {
  if (D.empty()) throw Error(ErrorCode::CountMismatch, "no relations");
  if (d1 < d2 || d2 < 1)
    throw Error(ErrorCode::InvalidArgument, "need d1 >= d2 >= 1");
  const int K = static_cast<int>(D.size());
  const int n = D[0].n;
  for (const auto& d : D)
    if (d.n != n)
      throw Error(ErrorCode::DimensionMismatch, "relations disagree on n");

  struct Acc {
    int count = 0;
    double sq_sum = 0.0;
    double w_sum = 0.0;
  };
  std::map<std::pair<int, int>, Acc> acc;
  for (const auto& data : D) {
    for (const Edge& e : data.edges) {
      Acc& a = acc[{e.i, e.j}];
      ++a.count;
      a.sq_sum += e.d * e.d;
      a.w_sum += e.w;
    }
  }

  const double scale = static_cast<double>(d1) / (static_cast<double>(d2) * K);
  DissimilarityData combined;
  combined.n = n;
  for (const auto& [pair, a] : acc) {
    if (a.count != K) continue;  // keep pairs present in every relation
    combined.edges.push_back(
        {pair.first, pair.second, std::sqrt(scale * a.sq_sum), a.w_sum / K});
  }
  if (combined.edges.empty())
    throw Error(ErrorCode::EmptyIntersection,
                "no pair is present in every relation");
  return combined;
}

std::pair<Embedding, ProjectionStack> smart_initialize(
    const std::vector<DissimilarityData>& D, const InitConfig& init,
    const OptimizerConfig& cfg) {
  validate_config(cfg);
  if (D.empty()) throw Error(ErrorCode::CountMismatch, "no relations");
  const int K = static_cast<int>(D.size());
  const int n = D[0].n;
  const int d1 = init.d1;
  const int d2 = init.d2;

  Rng rng(cfg.seed);
  DissimilarityData combined = combined_dissimilarity(D, d1, d2);

  // Stage 1: plain MDS of the combined relation in R^d1 (identity
  // perspective reuses the fixed-projection loop unchanged).
  OptimizerConfig stage_cfg = cfg;
  stage_cfg.seed = rng.raw();
  Embedding X0 = random_init(n, d1, init.radius, rng);
  RunResult stage1 =
      run_fixed({combined}, identity_stack(1, d1), X0, stage_cfg);
  Embedding X = std::move(stage1.embedding);

  // Stage 2: embedding frozen, projected gradient steps on the stack alone.
  const std::vector<double> scales = normalized_gradient_scales(D);
  ProjectionStack Q = random_stack(K, d2, d1, rng);
  Rng loop_rng(rng.raw());
  double mu = cfg.mu0;
  for (int t = 1; t <= cfg.T; ++t) {
    std::vector<EdgeSample> xi = subsample_all(D, cfg.c, loop_rng);
    std::vector<Eigen::MatrixXd> g0 =
        stress_gradients(X, Q, D, &xi, true, cfg.epsilon_dist, cfg.exec, &scales)
            .dQ;
    ProjectionStack Qn = Q;
    for (int k = 0; k < K; ++k)
      Qn.matrices[k] = retract(Q.matrices[k] - mu * g0[k]);
    std::vector<Eigen::MatrixXd> g1 =
        stress_gradients(X, Qn, D, &xi, true, cfg.epsilon_dist, cfg.exec, &scales)
            .dQ;
    mu = adaptive_rate(Q.matrices, Qn.matrices, g0, g1, mu);
    Q = std::move(Qn);
  }
  return {std::move(X), std::move(Q)};
}

}  // namespace mpse
