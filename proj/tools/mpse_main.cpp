// Command-line front end: run experiments from a JSON config, generate
// benchmark instances, sweep problem sizes, and score existing embeddings.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "mpse/datasets.hpp"
#include "mpse/io.hpp"
#include "mpse/optimizer.hpp"
#include "mpse/projections.hpp"
#include "mpse/stress.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mpse;

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------- run config ----------

struct PerspectiveSpec {
  std::string type;  // edges | matrix | points | graph
  std::string path;
  int relation = 0;  // graph only
};

struct RunConfig {
  Mode mode = Mode::Fixed;
  std::vector<PerspectiveSpec> perspectives;
  json projections;  // string spec, file path, or null
  OptimizerConfig optimizer;
  InitConfig init;
  std::string init_embedding;    // for strategy = given
  std::string init_projections;  // for strategy = given
  int p = 3;
  int q = 2;
  std::vector<std::uint64_t> seeds;
  std::string output;
};

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return j;
}

template <typename T>
T field_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config field '" + key + "' has the wrong type");
  }
}

RunConfig parse_run_config(const json& j) {
  RunConfig cfg;

  std::string mode = field_or<std::string>(j, "mode", "");
  if (mode == "fixed")
    cfg.mode = Mode::Fixed;
  else if (mode == "varying")
    cfg.mode = Mode::Varying;
  else
    throw ConfigError("config field 'mode' must be \"fixed\" or \"varying\"");

  if (!j.contains("perspectives") || !j["perspectives"].is_array() ||
      j["perspectives"].empty())
    throw ConfigError("config field 'perspectives' needs at least one entry");
  for (const auto& entry : j["perspectives"]) {
    PerspectiveSpec spec;
    if (entry.is_string()) {
      spec.type = "edges";
      spec.path = entry.get<std::string>();
    } else {
      spec.type = field_or<std::string>(entry, "type", "edges");
      spec.path = field_or<std::string>(entry, "path", "");
      spec.relation = field_or<int>(entry, "relation", 0);
    }
    if (spec.path.empty())
      throw ConfigError("config field 'perspectives' entry lacks a path");
    if (spec.type != "edges" && spec.type != "matrix" && spec.type != "points" &&
        spec.type != "graph")
      throw ConfigError(
          "config field 'perspectives' entry type must be edges, matrix, points, or graph");
    cfg.perspectives.push_back(std::move(spec));
  }

  if (j.contains("projections")) cfg.projections = j["projections"];
  if (cfg.mode == Mode::Fixed && cfg.projections.is_null())
    throw ConfigError("config field 'projections' is required in fixed mode");

  const json opt = j.contains("optimizer") ? j["optimizer"] : json::object();
  cfg.optimizer.T = field_or<int>(opt, "T", 100);
  cfg.optimizer.mu0 = field_or<double>(opt, "mu0", 1.0);
  cfg.optimizer.c = field_or<double>(opt, "c", 1.0);
  cfg.optimizer.epsilon_dist = field_or<double>(opt, "epsilon_dist", 1e-9);
  cfg.optimizer.grad_tol = field_or<double>(opt, "grad_tol", 0.0);
  cfg.optimizer.mode = cfg.mode;

  const json init = j.contains("init") ? j["init"] : json::object();
  std::string strategy = field_or<std::string>(init, "strategy", "random");
  if (strategy == "random")
    cfg.init.strategy = InitStrategy::Random;
  else if (strategy == "smart")
    cfg.init.strategy = InitStrategy::Smart;
  else if (strategy == "given")
    cfg.init.strategy = InitStrategy::Given;
  else
    throw ConfigError("config field 'init.strategy' must be random, smart, or given");
  cfg.init.radius = field_or<double>(init, "radius", 1.0);
  cfg.init_embedding = field_or<std::string>(init, "embedding", "");
  cfg.init_projections = field_or<std::string>(init, "projections", "");
  if (cfg.init.strategy == InitStrategy::Given && cfg.init_embedding.empty())
    throw ConfigError("config field 'init.embedding' is required with strategy given");

  cfg.p = field_or<int>(j, "p", 3);
  cfg.q = field_or<int>(j, "q", 2);
  cfg.init.d1 = cfg.p;
  cfg.init.d2 = cfg.q;
  if (cfg.q > cfg.p) throw ConfigError("config fields must satisfy q <= p");

  cfg.seeds = field_or<std::vector<std::uint64_t>>(j, "seeds", {});
  cfg.output = field_or<std::string>(j, "output", "");
  if (cfg.output.empty())
    throw ConfigError("config field 'output' must name a directory");
  return cfg;
}

DissimilarityData load_perspective(const PerspectiveSpec& spec) {
  if (spec.type == "edges") return read_dissimilarity_csv(spec.path);
  if (spec.type == "matrix") return complete_from_matrix(read_matrix_csv(spec.path));
  if (spec.type == "graph")
    return graph_dissimilarity(read_graph_csv(spec.path), spec.relation);
  return distances_from_points(read_points_csv(spec.path));
}

// Projection spec: "eq2" (leading matrices of the canonical triple),
// "angles:K" (evenly spaced viewpoints), "random:SEED", or a stack file.
ProjectionStack resolve_projections(const json& spec, int K, int q, int p) {
  if (spec.is_string()) {
    const std::string s = spec.get<std::string>();
    if (s == "eq2") {
      if (q != 2 || p != 3 || K > 3)
        throw ConfigError("projection spec 'eq2' needs q=2, p=3, K<=3");
      ProjectionStack all = standard_viewpoints(3);
      all.matrices.resize(K);
      return all;
    }
    if (s.rfind("angles:", 0) == 0) {
      int count = std::stoi(s.substr(7));
      if (count != K)
        throw ConfigError("projection spec 'angles:K' must match the perspective count");
      if (q != 2 || p != 3)
        throw ConfigError("projection spec 'angles:K' needs q=2, p=3");
      return standard_viewpoints(count);
    }
    if (s.rfind("random:", 0) == 0) {
      Rng rng(std::stoull(s.substr(7)));
      return random_stack(K, q, p, rng);
    }
    return read_projections_json(s);  // treat as a file path
  }
  if (spec.is_object() && spec.contains("file"))
    return read_projections_json(spec["file"].get<std::string>());
  throw ConfigError("config field 'projections' is not a recognized spec");
}

// ---------- run ----------

struct SeedOutcome {
  std::uint64_t seed = 0;
  RunResult result;
  bool ran = false;
};

// Seed salts keep the init draws, the projection draws, and the optimizer's
// sample stream distinct, and stop a run seed from replaying the stream of
// a generator invoked with the same --seed.
constexpr std::uint64_t kInitSeedSalt = 0x7c3a1e85u;
constexpr std::uint64_t kStackSeedSalt = 0x9e3779b97f4a7c15ull;

int cmd_run(const std::string& config_path, std::uint64_t base_seed, int jobs,
            bool deterministic) {
  RunConfig cfg = parse_run_config(load_json(config_path));
  cfg.optimizer.exec = deterministic ? Exec::Serial : Exec::Parallel;

  std::vector<DissimilarityData> D;
  for (const auto& spec : cfg.perspectives) D.push_back(load_perspective(spec));
  const int K = static_cast<int>(D.size());
  const int n = D[0].n;
  for (const auto& d : D) {
    validate_dissimilarity(d);
    if (d.n != n) throw ConfigError("perspectives disagree on the object count");
  }

  ProjectionStack P;
  if (!cfg.projections.is_null())
    P = resolve_projections(cfg.projections, K, cfg.q, cfg.p);

  if (cfg.seeds.empty())
    for (std::uint64_t s = 0; s < 10; ++s) cfg.seeds.push_back(base_seed + s);

  fs::create_directories(cfg.output);

  std::vector<SeedOutcome> outcomes(cfg.seeds.size());
  std::atomic<std::size_t> cursor{0};
  std::mutex error_mutex;
  std::string worker_error;
  auto worker = [&]() {
    std::size_t idx;
    while ((idx = cursor.fetch_add(1)) < cfg.seeds.size()) {
      const std::uint64_t seed = cfg.seeds[idx];
      try {
        OptimizerConfig ocfg = cfg.optimizer;
        ocfg.seed = seed;
        ocfg.init = cfg.init.strategy;

        Embedding X0;
        ProjectionStack Q0;
        if (cfg.init.strategy == InitStrategy::Smart) {
          auto smart = smart_initialize(D, cfg.init, ocfg);
          X0 = std::move(smart.first);
          Q0 = std::move(smart.second);
        } else if (cfg.init.strategy == InitStrategy::Given) {
          X0 = read_result_json(cfg.init_embedding).embedding;
          if (!cfg.init_projections.empty())
            Q0 = read_projections_json(cfg.init_projections);
        } else {
          Rng rng(seed ^ kInitSeedSalt);
          X0 = random_init(n, cfg.p, cfg.init.radius, rng);
        }
        if (cfg.mode == Mode::Varying && Q0.K() == 0) {
          if (P.K() > 0) {
            Q0 = P;
          } else {
            Rng rng(seed ^ kStackSeedSalt);
            Q0 = random_stack(K, cfg.q, cfg.p, rng);
          }
        }

        RunResult result = cfg.mode == Mode::Fixed
                               ? run_fixed(D, P, X0, ocfg)
                               : run_varying(D, X0, Q0, ocfg);
        outcomes[idx] = {seed, std::move(result), true};
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (worker_error.empty())
          worker_error = "seed " + std::to_string(seed) + ": " + e.what();
      }
    }
  };
  const int workers = std::max(1, jobs);
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (!worker_error.empty()) throw ConfigError(worker_error);

  // per-seed outputs
  json per_seed = json::array();
  const SeedOutcome* best = nullptr;
  for (const auto& outcome : outcomes) {
    const std::string stem = "seed_" + std::to_string(outcome.seed);
    ResultFile rf;
    rf.embedding = outcome.result.embedding;
    rf.projections = outcome.result.projections;
    rf.stress = outcome.result.report;
    rf.trace = outcome.result.trace;
    rf.iterations_used = outcome.result.iterations_used;
    rf.seed = outcome.seed;
    if (outcome.result.diverged) rf.diverged = true;
    write_result_json((fs::path(cfg.output) / (stem + ".json")).string(), rf);
    write_trace_csv((fs::path(cfg.output) / (stem + "_trace.csv")).string(),
                    outcome.result.trace);

    json row;
    row["seed"] = outcome.seed;
    row["stress"] = outcome.result.report.total;
    row["diverged"] = outcome.result.diverged;
    per_seed.push_back(row);
    if (!outcome.result.diverged &&
        (!best || outcome.result.report.total < best->result.report.total))
      best = &outcome;
  }

  if (!best) {
    std::cerr << "all seeds diverged\n";
    return 2;
  }

  json summary;
  summary["best_seed"] = best->seed;
  summary["best_stress"] = best->result.report.total;
  summary["best_stress_sqrt"] = std::sqrt(best->result.report.total);
  summary["per_perspective"] = best->result.report.per_perspective;
  summary["per_seed"] = per_seed;
  summary["result_file"] = "seed_" + std::to_string(best->seed) + ".json";
  {
    std::ofstream out(fs::path(cfg.output) / "summary.json");
    out << summary.dump(2) << '\n';
  }

  std::cout << "best seed " << best->seed << "\n"
            << "total normalized stress " << format_double(best->result.report.total)
            << " (sqrt " << format_double(std::sqrt(best->result.report.total))
            << ")\n";
  return 0;
}

// ---------- gen ----------

int cmd_gen(const std::string& kind, int n, int K, double separation,
            std::uint64_t seed, const std::string& out_dir, bool stratified) {
  fs::create_directories(out_dir);
  fs::path dir(out_dir);
  Rng rng(seed);

  if (kind == "circle-square") {
    LabeledPoints2D circle = sample_circle(n, rng, stratified);
    LabeledPoints2D square = sample_square(n, rng, stratified);
    write_points_csv((dir / "circle_points.csv").string(), circle.coords);
    write_points_csv((dir / "square_points.csv").string(), square.coords);
    write_dissimilarity_csv((dir / "circle_dist.csv").string(),
                            distances_from_points(circle.coords));
    write_dissimilarity_csv((dir / "square_dist.csv").string(),
                            distances_from_points(square.coords));
    return 0;
  }
  if (kind == "ball") {
    ScalabilityInstance inst = scalability_instance(n, K, rng);
    ResultFile rf;
    rf.embedding = inst.groundtruth;
    rf.projections = inst.projections;
    write_result_json((dir / "groundtruth.json").string(), rf);
    for (int k = 0; k < K; ++k)
      write_dissimilarity_csv((dir / ("dist_" + std::to_string(k) + ".csv")).string(),
                              inst.dissimilarities[k]);
    return 0;
  }
  if (kind == "clusters") {
    LabeledPoints2D pts = sample_clusters(n, separation, rng);
    write_points_csv((dir / "points.csv").string(), pts.coords);
    write_labels_csv((dir / "labels.csv").string(), pts.labels);
    write_dissimilarity_csv((dir / "dist.csv").string(),
                            distances_from_points(pts.coords));
    return 0;
  }
  std::cerr << "unknown generator kind '" << kind << "'\n";
  return 1;
}

// ---------- bench ----------

int cmd_bench(const std::string& sweep, const std::vector<int>& values, int n_fixed,
              int k_fixed, int T, int instances, double c, const std::string& mode,
              double threshold, std::uint64_t seed, const std::string& out_path,
              bool deterministic) {
  if (sweep != "n" && sweep != "k") {
    std::cerr << "sweep must be 'n' or 'k'\n";
    return 1;
  }
  const bool varying = mode == "varying";
  if (!varying && mode != "fixed") {
    std::cerr << "mode must be 'fixed' or 'varying'\n";
    return 1;
  }

  std::ofstream out(out_path);
  if (!out) {
    std::cerr << "cannot write " << out_path << "\n";
    return 1;
  }
  out << "sweep,n,K,T,instances,mean_time_s,success_fraction\n";

  std::uint64_t instance_seed = seed;
  for (int value : values) {
    const int n = sweep == "n" ? value : n_fixed;
    const int K = sweep == "k" ? value : k_fixed;
    double time_total = 0.0;
    int successes = 0;
    for (int inst_idx = 0; inst_idx < instances; ++inst_idx) {
      Rng rng(++instance_seed);
      ScalabilityInstance inst = scalability_instance(n, K, rng);

      OptimizerConfig ocfg;
      ocfg.T = T;
      ocfg.mu0 = 1.0;
      ocfg.c = c;
      ocfg.seed = instance_seed * 1000003ull;
      ocfg.exec = deterministic ? Exec::Serial : Exec::Parallel;

      // wall time covers the algorithm only, never file I/O
      auto t0 = std::chrono::steady_clock::now();
      RunResult result;
      if (varying) {
        InitConfig init;
        init.strategy = InitStrategy::Smart;
        auto smart = smart_initialize(inst.dissimilarities, init, ocfg);
        result = run_varying(inst.dissimilarities, smart.first, smart.second, ocfg);
      } else {
        Rng init_rng(ocfg.seed);
        Embedding X0 = random_init(n, 3, 1.0, init_rng);
        result = run_fixed(inst.dissimilarities, inst.projections, X0, ocfg);
      }
      auto t1 = std::chrono::steady_clock::now();
      time_total += std::chrono::duration<double>(t1 - t0).count();
      if (!result.diverged && result.report.total < threshold) ++successes;
    }
    out << sweep << ',' << n << ',' << K << ',' << T << ',' << instances << ','
        << format_double(time_total / instances) << ','
        << format_double(static_cast<double>(successes) / instances) << '\n';
    std::cout << "cell " << (sweep == "n" ? n : K) << ": mean "
              << time_total / instances << " s, success "
              << successes << "/" << instances << "\n";
  }
  return 0;
}

// ---------- stress ----------

int cmd_stress(const std::string& embedding_path, const std::string& projections_path,
               const std::vector<std::string>& dissimilarity_paths,
               bool deterministic) {
  Embedding X = read_result_json(embedding_path).embedding;
  ProjectionStack P = read_projections_json(projections_path);
  std::vector<DissimilarityData> D;
  for (const auto& path : dissimilarity_paths)
    D.push_back(read_dissimilarity_csv(path));

  StressReport report =
      mpse_stress(X, P, D, deterministic ? Exec::Serial : Exec::Parallel);
  std::cout << "total normalized stress  " << format_double(report.total) << "\n"
            << "sqrt of total            " << format_double(std::sqrt(report.total))
            << "\n";
  for (std::size_t k = 0; k < report.per_perspective.size(); ++k)
    std::cout << "perspective " << k << " stress     "
              << format_double(report.per_perspective[k]) << " (sqrt "
              << format_double(std::sqrt(report.per_perspective[k])) << ")\n";
  std::cout << "raw (unnormalized) total " << format_double(report.raw_total)
            << "\n";
  return 0;
}

// ---------- init ----------

int cmd_init(const std::string& config_path, std::uint64_t base_seed,
             const std::string& out_dir, bool deterministic) {
  RunConfig cfg = parse_run_config(load_json(config_path));
  cfg.optimizer.exec = deterministic ? Exec::Serial : Exec::Parallel;
  cfg.optimizer.seed = cfg.seeds.empty() ? base_seed : cfg.seeds[0];

  std::vector<DissimilarityData> D;
  for (const auto& spec : cfg.perspectives) D.push_back(load_perspective(spec));

  auto [X0, Q0] = smart_initialize(D, cfg.init, cfg.optimizer);

  fs::create_directories(out_dir);
  ResultFile rf;
  rf.embedding = X0;
  write_result_json((fs::path(out_dir) / "init_embedding.json").string(), rf);
  write_projections_json((fs::path(out_dir) / "init_projections.json").string(), Q0);
  std::cout << "wrote init_embedding.json and init_projections.json\n";
  return 0;
}

std::vector<int> parse_int_list(const std::string& csv) {
  std::vector<int> values;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) values.push_back(std::stoi(tok));
  return values;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-perspective simultaneous embedding"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  int jobs = 1;
  bool deterministic = true;
  app.add_option("--seed", seed, "base seed");
  app.add_option("--jobs", jobs, "worker pool size for seeds");
  app.add_flag("--deterministic,!--no-deterministic", deterministic,
               "serial reduction order (bit-reproducible outputs)");

  // run
  auto* run = app.add_subcommand("run", "optimize an instance described by a config");
  std::string run_config;
  run->add_option("config", run_config, "JSON run config")->required();

  // gen
  auto* gen = app.add_subcommand("gen", "generate an instance");
  std::string gen_kind, gen_out = ".";
  int gen_n = 100, gen_k = 3;
  double gen_separation = 10.0;
  bool gen_stratified = false;
  gen->add_option("kind", gen_kind, "circle-square | ball | clusters")->required();
  gen->add_option("--n", gen_n, "points per shape / instance");
  gen->add_option("--k", gen_k, "projection count (ball)");
  gen->add_option("--separation", gen_separation, "cluster center distance");
  gen->add_flag("--stratified", gen_stratified, "evenly spaced boundary samples");
  gen->add_option("--out", gen_out, "output directory");

  // bench
  auto* bench = app.add_subcommand("bench", "sweep instance sizes and report timings");
  std::string bench_sweep = "n", bench_values = "200,400,600,800,1000";
  std::string bench_mode = "fixed", bench_out = "bench.csv";
  int bench_n = 200, bench_k = 3, bench_T = 100, bench_instances = 10;
  double bench_c = 0.01, bench_threshold = 1e-3;
  bool bench_deterministic = false;
  bench->add_option("--sweep", bench_sweep, "n | k");
  bench->add_option("--values", bench_values, "comma-separated sweep values");
  bench->add_option("--n", bench_n, "fixed n for the k sweep");
  bench->add_option("--k", bench_k, "fixed K for the n sweep");
  bench->add_option("--t", bench_T, "iterations per run");
  bench->add_option("--instances", bench_instances, "instances per cell");
  bench->add_option("--c", bench_c, "stochastic inclusion probability");
  bench->add_option("--mode", bench_mode, "fixed | varying");
  bench->add_option("--threshold", bench_threshold, "success stress threshold");
  bench->add_option("--out", bench_out, "report CSV path");
  bench->add_flag("--deterministic", bench_deterministic,
                  "serial kernels while timing");

  // stress
  auto* stress = app.add_subcommand("stress", "score an embedding against relations");
  std::string stress_embedding, stress_projections;
  std::vector<std::string> stress_dissimilarities;
  stress->add_option("--embedding", stress_embedding, "result JSON with coords")
      ->required();
  stress->add_option("--projections", stress_projections, "projection stack JSON")
      ->required();
  stress->add_option("dissimilarities", stress_dissimilarities,
                     "one edge CSV per perspective")
      ->required();

  // init
  auto* init = app.add_subcommand("init", "smart initialization only");
  std::string init_config, init_out = ".";
  init->add_option("config", init_config, "JSON run config")->required();
  init->add_option("--out", init_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_config, seed, jobs, deterministic);
    if (gen->parsed())
      return cmd_gen(gen_kind, gen_n, gen_k, gen_separation, seed, gen_out,
                     gen_stratified);
    if (bench->parsed())
      return cmd_bench(bench_sweep, parse_int_list(bench_values), bench_n, bench_k,
                       bench_T, bench_instances, bench_c, bench_mode,
                       bench_threshold, seed, bench_out, bench_deterministic);
    if (stress->parsed())
      return cmd_stress(stress_embedding, stress_projections,
                        stress_dissimilarities, deterministic);
    if (init->parsed()) return cmd_init(init_config, seed, init_out, deterministic);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
