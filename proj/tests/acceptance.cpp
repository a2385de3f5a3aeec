// Acceptance suite: end-to-end checks of the solver against its recovery,
// correctness, and scalability targets. Prints one pass/fail line per
// criterion; exits nonzero if any fails.

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "mpse/datasets.hpp"
#include "mpse/io.hpp"
#include "mpse/optimizer.hpp"
#include "mpse/procrustes.hpp"
#include "mpse/projections.hpp"
#include "mpse/stress.hpp"

using namespace mpse;
namespace fs = std::filesystem;

namespace {

struct Criterion {
  int id;
  const char* name;
  double time_limit_s;
  std::function<bool(std::string&)> body;
};

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

Eigen::MatrixXd fd_matrix(const std::function<double(const Eigen::MatrixXd&)>& f,
                          Eigen::MatrixXd M, double h = 1e-6) {
  Eigen::MatrixXd G(M.rows(), M.cols());
  for (Eigen::Index r = 0; r < M.rows(); ++r)
    for (Eigen::Index c = 0; c < M.cols(); ++c) {
      double saved = M(r, c);
      M(r, c) = saved + h;
      double fp = f(M);
      M(r, c) = saved - h;
      double fm = f(M);
      M(r, c) = saved;
      G(r, c) = (fp - fm) / (2.0 * h);
    }
  return G;
}

double rel_err(const Eigen::MatrixXd& got, const Eigen::MatrixXd& want) {
  double scale = want.norm();
  return scale == 0.0 ? got.norm() : (got - want).norm() / scale;
}

// ---- 1. gradient correctness ----

bool criterion_gradients(std::string& detail) {
  double worst = 0.0;
  for (int inst = 0; inst < 50; ++inst) {
    Rng rng(9000 + inst);
    const int n = 5 + static_cast<int>(rng.uniform() * 11);  // 5..15
    const int K = 1 + static_cast<int>(rng.uniform() * 4);   // 1..4
    Eigen::MatrixXd X(n, 3);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < 3; ++j) X(i, j) = rng.uniform(-1, 1);
    ProjectionStack P = random_stack(K, 2, 3, rng);
    std::vector<DissimilarityData> D;
    for (int k = 0; k < K; ++k) {
      DissimilarityData d;
      d.n = n;
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
          d.edges.push_back({i, j, rng.uniform(0.3, 2.0), rng.uniform(0.5, 2.0)});
      D.push_back(std::move(d));
    }

    Eigen::MatrixXd gx = embedding_gradient(Embedding(X), P, D);
    Eigen::MatrixXd gx_fd = fd_matrix(
        [&](const Eigen::MatrixXd& M) {
          return mpse_stress(Embedding(M), P, D).raw_total;
        },
        X);
    worst = std::max(worst, rel_err(gx, gx_fd));

    auto gq = projection_gradient(Embedding(X), P, D);
    for (int k = 0; k < K; ++k) {
      ProjectionStack probe = P;
      Eigen::MatrixXd gq_fd = fd_matrix(
          [&](const Eigen::MatrixXd& Q) {
            probe.matrices[k] = Q;
            double raw = 0.0;
            for (int j = 0; j < K; ++j)
              raw += mds_stress(apply_one(probe.matrices[j], X), D[j]);
            return raw;
          },
          P.matrices[k]);
      worst = std::max(worst, rel_err(gq[k], gq_fd));
    }
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "worst rel err %.2e over 50 instances", worst);
  detail = buf;
  return worst < 1e-5;
}

// ---- 2. retraction optimality ----

bool criterion_retraction(std::string& detail) {
  Rng rng(777);
  double worst_defect = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    Eigen::MatrixXd A(2, 3);
    do {
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 3; ++j) A(i, j) = rng.uniform(-2, 2);
    } while (small_svd(A).S[1] < 1e-3);

    Eigen::MatrixXd Q = retract(A);
    worst_defect = std::max(worst_defect, orthonormality_defect(Q));
    if (worst_defect > 1e-9) {
      detail = "retraction not orthonormal";
      return false;
    }
    double best_dist = (Q - A).norm();
    for (int draw = 0; draw < 100000; ++draw) {
      Eigen::MatrixXd H = random_orthogonal(2, 3, rng);
      if ((H - A).norm() <= best_dist) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "beaten at matrix %d draw %d", rep, draw);
        detail = buf;
        return false;
      }
    }
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf),
                "100 matrices x 1e5 draws, worst orthogonality defect %.1e",
                worst_defect);
  detail = buf;
  return true;
}

// ---- 3. exact recovery, fixed projections ----

bool criterion_recovery_fixed(std::string& detail) {
  OptimizerConfig cfg;
  cfg.T = 100;
  cfg.mu0 = 1.0;
  cfg.c = 0.01;
  cfg.exec = Exec::Serial;

  int successes = 0;
  std::string stresses;
  for (std::uint64_t s = 1; s <= 10; ++s) {
    Rng gen(1100 + s);  // one instance per seed, generator decoupled from init
    ScalabilityInstance inst = scalability_instance(100, 3, gen);
    cfg.seed = s;
    Rng ir(s);
    Embedding X0 = random_init(100, 3, 1.0, ir);
    RunResult r = run_fixed(inst.dissimilarities, inst.projections, X0, cfg);
    char buf[32];
    std::snprintf(buf, sizeof(buf), " %.1e", r.report.total);
    stresses += buf;
    if (!r.diverged && r.report.total < 1e-3) ++successes;
  }
  detail = std::to_string(successes) + "/10 below 1e-3; per-seed:" + stresses;
  return successes >= 8;
}

// ---- 4. exact recovery, varying projections ----

bool criterion_recovery_varying(std::string& detail) {
  OptimizerConfig cfg;
  cfg.T = 300;
  cfg.mu0 = 1.0;
  cfg.c = 0.01;
  cfg.exec = Exec::Serial;
  InitConfig init;
  init.strategy = InitStrategy::Smart;

  int recovered = 0;
  std::string rows;
  for (std::uint64_t s = 1; s <= 10; ++s) {
    Rng gen(1900 + s);
    ScalabilityInstance inst = scalability_instance(100, 3, gen);
    cfg.seed = s;
    auto [X0, Q0] = smart_initialize(inst.dissimilarities, init, cfg);
    RunResult r = run_varying(inst.dissimilarities, X0, Q0, cfg);
    double proc = procrustes_residual(r.embedding.coords, inst.groundtruth.coords);
    char buf[48];
    std::snprintf(buf, sizeof(buf), " (%.1e,%.3f)", r.report.total, proc);
    rows += buf;
    if (!r.diverged && r.report.total < 1e-2 && proc < 0.05) ++recovered;
  }
  detail = std::to_string(recovered) +
           "/10 with stress < 1e-2 and procrustes < 0.05; (stress,residual):" +
           rows;
  return recovered >= 7;
}

// ---- 5. circle-square anchor ----

bool criterion_circle_square(std::string& detail) {
  Rng gen(42);
  LabeledPoints2D circle = sample_circle(100, gen);
  LabeledPoints2D square = sample_square(100, gen);
  std::vector<DissimilarityData> D = {distances_from_points(circle.coords),
                                      distances_from_points(square.coords)};
  ProjectionStack P = standard_viewpoints(3);
  P.matrices.resize(2);  // the first two canonical viewpoints

  OptimizerConfig cfg;
  cfg.T = 500;
  cfg.mu0 = 1.0;
  cfg.c = 0.01;
  cfg.exec = Exec::Serial;

  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t s = 1; s <= 10; ++s) {
    cfg.seed = s;
    Rng ir(s);
    Embedding X0 = random_init(100, 3, 1.0, ir);
    RunResult r = run_fixed(D, P, X0, cfg);
    if (!r.diverged) best = std::min(best, r.report.total);
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "best-of-10 total stress %.4f (bound 0.10)", best);
  detail = buf;
  return best <= 0.10;
}

// ---- 6. scalability shape ----

struct BenchRow {
  int value;
  double mean_time;
};

bool parse_bench_csv(const std::string& path, const std::string& sweep,
                     std::vector<BenchRow>& rows) {
  std::ifstream in(path);
  if (!in) return false;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 7) return false;
    BenchRow row;
    row.value = std::stoi(sweep == "n" ? fields[1] : fields[2]);
    row.mean_time = std::stod(fields[5]);
    rows.push_back(row);
  }
  return !rows.empty();
}

double linear_fit_r2(const std::vector<BenchRow>& rows) {
  const double n = static_cast<double>(rows.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (const auto& row : rows) {
    sx += row.value;
    sy += row.mean_time;
    sxx += row.value * static_cast<double>(row.value);
    sxy += row.value * row.mean_time;
    syy += row.mean_time * row.mean_time;
  }
  double cov = sxy - sx * sy / n;
  double vx = sxx - sx * sx / n;
  double vy = syy - sy * sy / n;
  if (vx <= 0 || vy <= 0) return 0.0;
  return cov * cov / (vx * vy);
}

bool criterion_scalability(std::string& detail) {
  fs::path dir = fs::temp_directory_path() /
                 ("mpse_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string cli = MPSE_CLI_PATH;

  std::string n_csv = (dir / "bench_n.csv").string();
  std::string cmd = cli +
                    " --seed 61 bench --sweep n --values 200,400,600,800,1000"
                    " --k 3 --t 100 --instances 5 --c 0.01 --threshold 1e-3"
                    " --mode fixed --out " +
                    n_csv + " >/dev/null 2>&1";
  if (std::system(cmd.c_str()) != 0) {
    detail = "bench n-sweep failed to run";
    return false;
  }
  std::string k_csv = (dir / "bench_k.csv").string();
  cmd = cli +
        " --seed 62 bench --sweep k --values 1,2,3,4,5,6,7,8 --n 200 --t 1000"
        " --instances 5 --c 0.01 --threshold 1e-3 --mode fixed --out " +
        k_csv + " >/dev/null 2>&1";
  if (std::system(cmd.c_str()) != 0) {
    detail = "bench k-sweep failed to run";
    return false;
  }

  std::vector<BenchRow> n_rows, k_rows;
  if (!parse_bench_csv(n_csv, "n", n_rows) || n_rows.size() != 5 ||
      !parse_bench_csv(k_csv, "k", k_rows) || k_rows.size() != 8) {
    detail = "bench reports malformed";
    return false;
  }
  double r2n = linear_fit_r2(n_rows);
  double r2k = linear_fit_r2(k_rows);
  fs::remove_all(dir);
  char buf[96];
  std::snprintf(buf, sizeof(buf), "R^2 time-vs-n %.4f, time-vs-K %.4f (bound 0.9)",
                r2n, r2k);
  detail = buf;
  return r2n > 0.9 && r2k > 0.9;
}

// ---- 7. estimator unbiasedness ----

bool criterion_unbiasedness(std::string& detail) {
  Rng rng(3001);
  const int n = 20, K = 2;
  Eigen::MatrixXd X(n, 3);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 3; ++j) X(i, j) = rng.uniform(-1, 1);
  ProjectionStack P = random_stack(K, 2, 3, rng);
  std::vector<DissimilarityData> D;
  for (int k = 0; k < K; ++k) {
    DissimilarityData d;
    d.n = n;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        d.edges.push_back({i, j, rng.uniform(0.3, 2.0), 1.0});
    D.push_back(std::move(d));
  }
  Embedding E(X);
  Eigen::MatrixXd full = embedding_gradient(E, P, D);

  const int M = 10000;
  const double c = 0.3;
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, 3);
  Eigen::MatrixXd sumsq = Eigen::MatrixXd::Zero(n, 3);
  Rng sample_rng(3002);
  for (int m = 0; m < M; ++m) {
    std::vector<EdgeSample> xi = subsample_all(D, c, sample_rng);
    Eigen::MatrixXd g = embedding_gradient(E, P, D, &xi);
    sum += g;
    sumsq += g.cwiseProduct(g);
  }
  Eigen::MatrixXd mean = sum / M;
  int outside = 0;
  double worst_z = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 3; ++j) {
      double var = sumsq(i, j) / M - mean(i, j) * mean(i, j);
      double se = std::sqrt(std::max(var, 0.0) / M) + 1e-300;
      double z = std::abs(mean(i, j) - full(i, j)) / se;
      worst_z = std::max(worst_z, z);
      if (z > 3.0) ++outside;
    }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%d/60 entries outside 3 SE, worst z %.2f",
                outside, worst_z);
  detail = buf;
  return outside == 0;
}

// ---- 8. reduction identity ----

bool criterion_reduction_identity(std::string& detail) {
  Rng rng(501);
  const int n = 12, q = 2;
  DissimilarityData data;
  data.n = n;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      data.edges.push_back({i, j, rng.uniform(0.3, 2.0), rng.uniform(0.5, 2.0)});
  Embedding X0(Eigen::MatrixXd::Zero(n, q));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < q; ++j) X0.coords(i, j) = rng.uniform(-1, 1);

  const int T = 50;
  OptimizerConfig cfg;
  cfg.T = T;
  cfg.mu0 = 0.5;
  cfg.c = 1.0;
  cfg.exec = Exec::Serial;
  cfg.seed = 9;

  std::vector<Eigen::MatrixXd> trajectory;
  run_fixed({data}, identity_stack(1, q), X0, cfg,
            [&](const IterationState& state) {
              trajectory.push_back(state.embedding.coords);
            });

  // Independent reference: plain normalized-MDS descent with the same secant
  // rate, written directly against the edge list.
  double normalizer = 0.0;
  for (const Edge& e : data.edges) normalizer += e.w * e.d * e.d;
  auto plain_gradient = [&](const Eigen::MatrixXd& Y) {
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, q);
    for (const Edge& e : data.edges) {
      Eigen::RowVectorXd dvec = Y.row(e.i) - Y.row(e.j);
      double dist = dvec.norm();
      if (dist < 1e-9) continue;
      double coef = 2.0 * e.w * (dist - e.d) / dist / normalizer;
      G.row(e.i) += coef * dvec;
      G.row(e.j) -= coef * dvec;
    }
    return G;
  };

  if (trajectory.size() != static_cast<std::size_t>(T + 1)) {
    detail = "trajectory length mismatch";
    return false;
  }
  Eigen::MatrixXd X = X0.coords;
  double mu = cfg.mu0;
  double worst = (trajectory[0] - X).cwiseAbs().maxCoeff();
  for (int t = 1; t <= T; ++t) {
    Eigen::MatrixXd g0 = plain_gradient(X);
    Eigen::MatrixXd Xn = X - mu * g0;
    Eigen::MatrixXd g1 = plain_gradient(Xn);
    Eigen::MatrixXd dg = g1 - g0;
    double denom = dg.squaredNorm();
    if (denom >= 1e-14) {
      double cand = (Xn - X).cwiseProduct(dg).sum() / denom;
      if (std::isfinite(cand) && cand > 0.0) mu = cand;
    }
    X = Xn;
    worst = std::max(worst, (trajectory[t] - X).cwiseAbs().maxCoeff());
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "max per-iterate deviation %.2e over %d steps",
                worst, T);
  detail = buf;
  return worst < 1e-10;
}

// ---- 9. CLI determinism ----

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool criterion_determinism(std::string& detail) {
  fs::path dir = fs::temp_directory_path() /
                 ("mpse_acceptance9_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string cli = MPSE_CLI_PATH;

  std::string gen_cmd = cli + " --seed 31 gen ball --n 50 --k 2 --out " +
                        (dir / "inst").string() + " >/dev/null 2>&1";
  if (std::system(gen_cmd.c_str()) != 0) {
    detail = "instance generation failed";
    return false;
  }

  std::string config_template;
  {
    std::stringstream ss;
    ss << "{\n"
       << "  \"mode\": \"fixed\",\n"
       << "  \"perspectives\": [\"" << (dir / "inst/dist_0.csv").string()
       << "\", \"" << (dir / "inst/dist_1.csv").string() << "\"],\n"
       << "  \"projections\": \"" << (dir / "inst/groundtruth.json").string()
       << "\",\n"
       << "  \"optimizer\": {\"T\": 40, \"mu0\": 1.0, \"c\": 0.05},\n"
       << "  \"seeds\": [3, 4, 5],\n"
       << "  \"output\": \"OUTDIR\"\n"
       << "}\n";
    config_template = ss.str();
  }

  for (const char* out : {"out1", "out2"}) {
    fs::path cfg_path = dir / (std::string("cfg_") + out + ".json");
    std::string config = config_template;
    config.replace(config.find("OUTDIR"), 6, (dir / out).string());
    std::ofstream o(cfg_path);
    o << config;
    o.close();
    std::string cmd = cli + " run " + cfg_path.string() + " >/dev/null 2>&1";
    if (std::system(cmd.c_str()) != 0) {
      detail = "cmd_run failed";
      return false;
    }
  }

  std::vector<std::string> files = {"seed_3.json",      "seed_4.json",
                                    "seed_5.json",      "seed_3_trace.csv",
                                    "seed_4_trace.csv", "seed_5_trace.csv",
                                    "summary.json"};
  for (const auto& name : files) {
    std::string a = slurp(dir / "out1" / name);
    std::string b = slurp(dir / "out2" / name);
    if (a.empty() || a != b) {
      detail = name + " differs between invocations";
      return false;
    }
  }
  fs::remove_all(dir);
  detail = "7 result files byte-identical across invocations";
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<Criterion> criteria = {
      {1, "gradient correctness vs finite differences", 10.0, criterion_gradients},
      {2, "retraction beats 1e5 random orthogonal matrices", 30.0,
       criterion_retraction},
      {3, "exact recovery with fixed projections", 60.0, criterion_recovery_fixed},
      {4, "exact recovery with varying projections", 120.0,
       criterion_recovery_varying},
      {5, "circle-square stress anchor", 60.0, criterion_circle_square},
      {6, "scalability wall-time is linear in n and K", 900.0,
       criterion_scalability},
      {7, "stochastic gradient estimator is unbiased", 60.0,
       criterion_unbiasedness},
      {8, "K=1 identity run matches plain MDS descent", 5.0,
       criterion_reduction_identity},
      {9, "cmd_run output is byte-reproducible", 120.0, criterion_determinism},
  };

  int only = argc > 1 ? std::atoi(argv[1]) : 0;
  bool all_pass = true;
  for (auto& criterion : criteria) {
    if (only != 0 && criterion.id != only) continue;
    std::string detail;
    double t0 = now_s();
    bool ok = criterion.body(detail);
    double elapsed = now_s() - t0;
    bool in_time = elapsed < criterion.time_limit_s;
    bool pass = ok && in_time;
    all_pass = all_pass && pass;
    std::printf("[%s] %d. %s (%.1fs/%.0fs) - %s%s\n", pass ? "PASS" : "FAIL",
                criterion.id, criterion.name, elapsed, criterion.time_limit_s,
                detail.c_str(), in_time ? "" : " [over time limit]");
    std::fflush(stdout);
  }
  return all_pass ? 0 : 1;
}
