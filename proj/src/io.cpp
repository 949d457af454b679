#include "rigsolve/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace rigsolve::io {

namespace {

using nlohmann::json;

json read_json(const std::string& path) {
  std::ifstream in(path);
  check(in.good(), "cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
  return j;
}

void write_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  check(out.good(), "cannot write " + path);
  out << j.dump(1) << "\n";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  check(out.good(), "cannot write " + path);
  out << std::setprecision(17);
  return out;
}

}  // namespace

BlendshapeModel load_model(const std::string& path) {
  const json j = read_json(path);
  BlendshapeModel model;
  try {
    model.n = j.at("n").get<int>();
    model.m = j.at("m").get<int>();
    model.neutral = j.at("neutral").get<std::vector<double>>();
    const auto& shapes = j.at("blendshapes");
    check(static_cast<int>(shapes.size()) == model.m, path + ": blendshapes must have m entries");
    model.basis.resize(model.dim() * model.m);
    for (int i = 0; i < model.m; ++i) {
      const auto col = shapes.at(i).get<std::vector<double>>();
      check(col.size() == model.dim(), path + ": blendshape column length must be 3n");
      std::copy(col.begin(), col.end(), model.column(i));
    }
    for (const auto& c : j.value("correctives", json::array())) {
      CorrectiveTerm t;
      t.ids = c.at("ids").get<std::vector<int>>();
      t.offset = c.at("offset").get<std::vector<double>>();
      model.correctives.push_back(std::move(t));
    }
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
  model.validate();
  return model;
}

void save_model(const BlendshapeModel& model, const std::string& path) {
  json j;
  j["n"] = model.n;
  j["m"] = model.m;
  j["neutral"] = model.neutral;
  json shapes = json::array();
  for (int i = 0; i < model.m; ++i)
    shapes.push_back(std::vector<double>(model.column(i), model.column(i) + model.dim()));
  j["blendshapes"] = std::move(shapes);
  json corr = json::array();
  for (const auto& t : model.correctives)
    corr.push_back({{"ids", t.ids}, {"offset", t.offset}});
  j["correctives"] = std::move(corr);
  write_json(j, path);
}

Clustering load_clustering(const std::string& path) {
  const json j = read_json(path);
  Clustering c;
  try {
    c.K = j.at("K").get<int>();
    c.mesh_clusters = j.at("mesh_clusters").get<std::vector<std::vector<int>>>();
    c.ctrl_clusters = j.at("ctrl_clusters").get<std::vector<std::vector<int>>>();
    c.method = j.value("method", std::string());
    c.seed = j.value("seed", std::uint64_t{0});
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
  return c;
}

void save_clustering(const Clustering& clustering, const std::string& path) {
  json j;
  j["K"] = clustering.K;
  j["mesh_clusters"] = clustering.mesh_clusters;
  j["ctrl_clusters"] = clustering.ctrl_clusters;
  j["method"] = clustering.method;
  j["seed"] = clustering.seed;
  write_json(j, path);
}

std::vector<std::vector<int>> load_segments(const std::string& path) {
  const json j = read_json(path);
  try {
    return j.get<std::vector<std::vector<int>>>();
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

SolverConfig load_config(const std::string& path, SolverConfig base) {
  const json j = read_json(path);
  try {
    base.alpha = j.value("alpha", base.alpha);
    if (j.contains("alpha_per_cluster"))
      base.alpha_per_cluster = j.at("alpha_per_cluster").get<std::vector<double>>();
    base.rho = j.value("rho", base.rho);
    base.admm_iters = j.value("admm_iters", base.admm_iters);
    base.cd_iters = j.value("cd_iters", base.cd_iters);
    base.cd_tol = j.value("cd_tol", base.cd_tol);
    base.admm_tol = j.value("admm_tol", base.admm_tol);
    base.zero_threshold = j.value("zero_threshold", base.zero_threshold);
    base.randomized_order = j.value("randomized_order", base.randomized_order);
    base.inexact_admm = j.value("inexact_admm", base.inexact_admm);
    base.warm_start = j.value("warm_start", base.warm_start);
    base.objective_trace = j.value("objective_trace", base.objective_trace);
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
  base.validate();
  return base;
}

namespace {
Matrix load_numeric_csv(const std::string& path) {
  std::ifstream in(path);
  check(in.good(), "cannot open " + path);
  std::string line;
  check(static_cast<bool>(std::getline(in, line)), path + ": empty file");
  const std::size_t cols = split_csv_line(line).size();

  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    check(fields.size() == cols, path + ": inconsistent column count");
    for (const auto& f : fields) {
      try {
        values.push_back(std::stod(f));
      } catch (const std::exception&) {
        throw ValidationError(path + ": non-numeric field '" + f + "'");
      }
    }
    ++rows;
  }
  Matrix mat(rows, cols);
  mat.data() = std::move(values);
  return mat;
}

void save_numeric_csv(const Matrix& mat, const std::string& prefix,
                      const std::string& path) {
  auto out = open_out(path);
  for (std::size_t c = 0; c < mat.cols(); ++c)
    out << (c ? "," : "") << prefix << c;
  out << "\n";
  for (std::size_t r = 0; r < mat.rows(); ++r) {
    const double* row = mat.row(r);
    for (std::size_t c = 0; c < mat.cols(); ++c) out << (c ? "," : "") << row[c];
    out << "\n";
  }
}
}  // namespace

Matrix load_weights_csv(const std::string& path) { return load_numeric_csv(path); }

void save_weights_csv(const Matrix& weights, const std::string& path) {
  save_numeric_csv(weights, "w", path);
}

std::vector<std::vector<double>> load_targets_csv(const std::string& path) {
  const Matrix mat = load_numeric_csv(path);
  std::vector<std::vector<double>> targets(mat.rows());
  for (std::size_t r = 0; r < mat.rows(); ++r)
    targets[r].assign(mat.row(r), mat.row(r) + mat.cols());
  return targets;
}

void save_targets_csv(const std::vector<std::vector<double>>& targets,
                      const std::string& path) {
  check(!targets.empty(), "no targets to write");
  Matrix mat(targets.size(), targets[0].size());
  for (std::size_t r = 0; r < targets.size(); ++r) {
    check(targets[r].size() == targets[0].size(), "ragged target list");
    std::copy(targets[r].begin(), targets[r].end(), mat.row(r));
  }
  save_numeric_csv(mat, "c", path);
}

void save_sweep_csv(const std::vector<SweepRecord>& records, const std::string& path) {
  auto out = open_out(path);
  out << "method,K,seed,E_D,E_ID,E_R,error\n";
  for (const auto& r : records) {
    out << r.method << "," << r.K << "," << r.seed << ",";
    if (r.ok)
      out << r.scores.density << "," << r.scores.inter_density << ","
          << r.scores.reconstruction_error << ",";
    else
      out << ",,," << r.error;
    out << "\n";
  }
}

void save_frame_metrics_csv(const std::vector<FrameRow>& rows, const std::string& path) {
  auto out = open_out(path);
  out << "frame,method,rmse,cardinality,time_ms,iters,converged\n";
  for (const auto& r : rows)
    out << r.frame << "," << r.method << "," << r.rmse << "," << r.cardinality << ","
        << r.time_ms << "," << r.iters << "," << (r.converged ? 1 : 0) << "\n";
}

void save_tradeoff_csv(const TradeoffTable& table, const std::string& path) {
  auto out = open_out(path);
  out << "alpha,mean_rmse,max_rmse,mean_cardinality,mean_time_ms\n";
  for (const auto& r : table.rows)
    out << r.alpha << "," << r.mean_rmse << "," << r.max_rmse << ","
        << r.mean_cardinality << "," << r.mean_time_ms << "\n";
}

}  // namespace rigsolve::io
