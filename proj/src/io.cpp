#include "mpse/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace mpse {

using nlohmann::json;

std::string format_double(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

namespace {

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // trim surrounding whitespace
    auto b = field.find_first_not_of(" \t\r");
    auto e = field.find_last_not_of(" \t\r");
    fields.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  return fields;
}

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

bool numeric_first_token(const std::string& line) {
  auto fields = split_csv(line);
  double v;
  return !fields.empty() && parse_number(fields[0], v);
}

// Reads all data lines of a CSV file, skipping an optional header (detected
// by a non-numeric first token) and blank lines.
std::vector<std::vector<std::string>> read_csv_rows(const std::string& path) {
  std::ifstream in = open_in(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (first && !numeric_first_token(line)) {
      first = false;
      continue;
    }
    first = false;
    rows.push_back(split_csv(line));
  }
  return rows;
}

double field_as_double(const std::vector<std::string>& row, std::size_t idx,
                       const std::string& path) {
  double v;
  if (idx >= row.size() || !parse_number(row[idx], v))
    throw Error(ErrorCode::ParseError, path + ": bad numeric field");
  return v;
}

int field_as_int(const std::vector<std::string>& row, std::size_t idx,
                 const std::string& path) {
  double v = field_as_double(row, idx, path);
  int i = static_cast<int>(v);
  if (static_cast<double>(i) != v)
    throw Error(ErrorCode::ParseError, path + ": expected integer field");
  return i;
}

json matrix_to_json(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows) {
  if (!rows.is_array() || rows.empty())
    throw Error(ErrorCode::ParseError, "expected a non-empty matrix");
  const Eigen::Index r = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index c = static_cast<Eigen::Index>(rows[0].size());
  Eigen::MatrixXd M(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    if (static_cast<Eigen::Index>(rows[i].size()) != c)
      throw Error(ErrorCode::ParseError, "ragged matrix rows");
    for (Eigen::Index j = 0; j < c; ++j) M(i, j) = rows[i][j].get<double>();
  }
  return M;
}

json stack_to_json(const ProjectionStack& P) {
  json arr = json::array();
  for (const auto& Q : P.matrices) arr.push_back(matrix_to_json(Q));
  return arr;
}

ProjectionStack stack_from_json(const json& arr) {
  if (!arr.is_array())
    throw Error(ErrorCode::ParseError, "expected an array of matrices");
  std::vector<Eigen::MatrixXd> mats;
  for (const auto& m : arr) mats.push_back(matrix_from_json(m));
  return ProjectionStack::from_matrices(std::move(mats));
}

json stress_to_json(const StressReport& report) {
  json j;
  j["total"] = report.total;
  j["per_perspective"] = report.per_perspective;
  j["raw_total"] = report.raw_total;
  return j;
}

StressReport stress_from_json(const json& j) {
  StressReport report;
  report.total = j.at("total").get<double>();
  report.per_perspective = j.at("per_perspective").get<std::vector<double>>();
  report.raw_total = j.at("raw_total").get<double>();
  return report;
}

json trace_to_json(const std::vector<TraceRecord>& trace) {
  json arr = json::array();
  for (const auto& rec : trace) {
    json j;
    j["iteration"] = rec.iteration;
    j["total_stress"] = rec.total_stress;
    j["grad_norm"] = rec.grad_norm;
    j["lr_X"] = rec.learning_rate_x;
    j["lr_Q"] = rec.learning_rate_q;
    j["step_norm"] = rec.step_norm;
    arr.push_back(std::move(j));
  }
  return arr;
}

std::vector<TraceRecord> trace_from_json(const json& arr) {
  std::vector<TraceRecord> trace;
  for (const auto& j : arr) {
    TraceRecord rec;
    rec.iteration = j.at("iteration").get<int>();
    rec.total_stress = j.at("total_stress").get<double>();
    rec.grad_norm = j.at("grad_norm").get<double>();
    rec.learning_rate_x = j.at("lr_X").get<double>();
    rec.learning_rate_q = j.at("lr_Q").get<double>();
    rec.step_norm = j.at("step_norm").get<double>();
    trace.push_back(rec);
  }
  return trace;
}

}  // namespace

DissimilarityData read_dissimilarity_csv(const std::string& path) {
  auto rows = read_csv_rows(path);
  DissimilarityData data;
  int max_index = -1;
  for (const auto& row : rows) {
    if (row.size() < 3 || row.size() > 4)
      throw Error(ErrorCode::ParseError, path + ": expected i,j,d[,w]");
    int i = field_as_int(row, 0, path);
    int j = field_as_int(row, 1, path);
    double d = field_as_double(row, 2, path);
    double w = row.size() == 4 ? field_as_double(row, 3, path) : 1.0;
    if (i == j)
      throw Error(ErrorCode::IndexOutOfRange,
                  path + ": self-pair (" + std::to_string(i) + ")");
    if (i > j) std::swap(i, j);
    data.edges.push_back({i, j, d, w});
    max_index = std::max(max_index, j);
  }
  data.n = max_index + 1;
  validate_dissimilarity(data);
  return data;
}

void write_dissimilarity_csv(const std::string& path,
                             const DissimilarityData& data) {
  std::ofstream out = open_out(path);
  bool weighted = false;
  for (const Edge& e : data.edges)
    if (e.w != 1.0) {
      weighted = true;
      break;
    }
  for (const Edge& e : data.edges) {
    out << e.i << ',' << e.j << ',' << format_double(e.d);
    if (weighted) out << ',' << format_double(e.w);
    out << '\n';
  }
}

Eigen::MatrixXd read_matrix_csv(const std::string& path) {
  auto rows = read_csv_rows(path);
  if (rows.empty()) throw Error(ErrorCode::ParseError, path + ": empty matrix");
  const Eigen::Index r = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index c = static_cast<Eigen::Index>(rows[0].size());
  Eigen::MatrixXd M(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    if (static_cast<Eigen::Index>(rows[i].size()) != c)
      throw Error(ErrorCode::ParseError, path + ": ragged rows");
    for (Eigen::Index j = 0; j < c; ++j)
      M(i, j) = field_as_double(rows[i], j, path);
  }
  return M;
}

Eigen::MatrixXd read_points_csv(const std::string& path) {
  Eigen::MatrixXd M = read_matrix_csv(path);
  if (M.cols() != 2 && M.cols() != 3)
    throw Error(ErrorCode::ParseError, path + ": expected 2 or 3 columns");
  return M;
}

void write_points_csv(const std::string& path, const Eigen::MatrixXd& points) {
  std::ofstream out = open_out(path);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
      if (j) out << ',';
      out << format_double(points(i, j));
    }
    out << '\n';
  }
}

std::vector<int> read_labels_csv(const std::string& path) {
  auto rows = read_csv_rows(path);
  std::vector<int> labels;
  labels.reserve(rows.size());
  for (const auto& row : rows) labels.push_back(field_as_int(row, 0, path));
  return labels;
}

void write_labels_csv(const std::string& path, const std::vector<int>& labels) {
  std::ofstream out = open_out(path);
  for (int label : labels) out << label << '\n';
}

MultiRelationGraph read_graph_csv(const std::string& path) {
  auto rows = read_csv_rows(path);
  MultiRelationGraph g;
  int max_node = -1;
  for (const auto& row : rows) {
    if (row.size() != 4)
      throw Error(ErrorCode::ParseError, path + ": expected relation,i,j,count");
    int rel = field_as_int(row, 0, path);
    int i = field_as_int(row, 1, path);
    int j = field_as_int(row, 2, path);
    int count = field_as_int(row, 3, path);
    if (rel < 0) throw Error(ErrorCode::ParseError, path + ": negative relation");
    if (rel >= static_cast<int>(g.relations.size())) g.relations.resize(rel + 1);
    g.relations[rel].push_back({i, j, count});
    max_node = std::max({max_node, i, j});
  }
  g.n = max_node + 1;
  return g;
}

void write_graph_csv(const std::string& path, const MultiRelationGraph& g) {
  std::ofstream out = open_out(path);
  for (std::size_t rel = 0; rel < g.relations.size(); ++rel)
    for (const auto& tie : g.relations[rel])
      out << rel << ',' << tie.i << ',' << tie.j << ',' << tie.count << '\n';
}

void write_result_json(const std::string& path, const ResultFile& result) {
  json j;
  j["n"] = result.embedding.n();
  j["p"] = result.embedding.p();
  j["coords"] = matrix_to_json(result.embedding.coords);
  if (result.projections) {
    j["q"] = result.projections->q();
    j["projections"] = stack_to_json(*result.projections);
  }
  if (result.stress) j["stress"] = stress_to_json(*result.stress);
  if (!result.trace.empty()) j["trace"] = trace_to_json(result.trace);
  if (result.iterations_used) j["iterations_used"] = *result.iterations_used;
  if (result.seed) j["seed"] = *result.seed;
  if (result.diverged) j["diverged"] = *result.diverged;
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
}

ResultFile read_result_json(const std::string& path) {
  std::ifstream in = open_in(path);
  json j;
  try {
    in >> j;
    ResultFile result;
    result.embedding = Embedding(matrix_from_json(j.at("coords")));
    if (j.contains("projections"))
      result.projections = stack_from_json(j["projections"]);
    if (j.contains("stress")) result.stress = stress_from_json(j["stress"]);
    if (j.contains("trace")) result.trace = trace_from_json(j["trace"]);
    if (j.contains("iterations_used"))
      result.iterations_used = j["iterations_used"].get<int>();
    if (j.contains("seed")) result.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("diverged")) result.diverged = j["diverged"].get<bool>();
    return result;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
}

void write_projections_json(const std::string& path, const ProjectionStack& P) {
  std::ofstream out = open_out(path);
  out << stack_to_json(P).dump(2) << '\n';
}

ProjectionStack read_projections_json(const std::string& path) {
  std::ifstream in = open_in(path);
  json j;
  try {
    in >> j;
    // Accept either a bare stack or a result file carrying one.
    if (j.is_object() && j.contains("projections"))
      return stack_from_json(j["projections"]);
    return stack_from_json(j);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
}

void write_trace_csv(const std::string& path,
                     const std::vector<TraceRecord>& trace) {
  std::ofstream out = open_out(path);
  out << "iteration,total_stress,grad_norm,lr_X,lr_Q,step_norm\n";
  for (const auto& rec : trace) {
    out << rec.iteration << ',' << format_double(rec.total_stress) << ','
        << format_double(rec.grad_norm) << ','
        << format_double(rec.learning_rate_x) << ','
        << format_double(rec.learning_rate_q) << ','
        << format_double(rec.step_norm) << '\n';
  }
}

}  // namespace mpse
