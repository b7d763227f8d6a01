#include "vmpladmm/app/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace vmpladmm::app {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_matrix_csv(const fs::path& path, const Matrix<double>& m) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path.string());
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) os << ',';
      os << format_real(m(i, j));
    }
    os << '\n';
  }
}

Matrix<double> read_matrix_csv(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ConfigError(path.string() + ": bad number '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ConfigError(path.string() + ": ragged rows");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError(path.string() + ": empty matrix");
  Matrix<double> m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

std::vector<std::string> trace_columns() {
  std::vector<std::string> cols = {"k",         "lagrangian", "reg_lagrangian", "delta_x", "delta_y",
                                   "delta_z",   "residual_norm", "d_norm",     "d_bound", "s_norm",
                                   "s_bound",   "objective",  "q1_scale",       "q2_scale"};
  for (auto name : cert::kAll) {
    cols.push_back(std::string(name));
    cols.push_back(std::string(name) + "_slack");
  }
  return cols;
}

void write_trace_csv(std::ostream& os, const std::vector<TraceRecord<double>>& trace) {
  const auto cols = trace_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const auto& r : trace) {
    os << r.k;
    for (double v : {r.lagrangian, r.reg_lagrangian, r.delta_x, r.delta_y, r.delta_z, r.residual_norm, r.d_norm,
                     r.d_bound, r.s_norm, r.s_bound, r.objective, r.q1_scale, r.q2_scale}) {
      os << ',' << format_real(v);
    }
    for (auto name : cert::kAll) {
      auto it = r.certificates.find(name);
      if (it == r.certificates.end()) {
        os << ",skip,0";
      } else {
        os << ',' << to_string(it->second.status) << ',' << format_real(it->second.slack);
      }
    }
    os << '\n';
  }
}

void write_trace_csv(const fs::path& path, const std::vector<TraceRecord<double>>& trace) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path.string());
  write_trace_csv(os, trace);
}

void save_instance(const fs::path& dir, const BenchmarkInstance<double>& inst) {
  fs::create_directories(dir);
  json j;
  j["generator"] = inst.generator;
  j["seed"] = inst.seed;
  j["parameters"] = inst.descriptor;
  j["f"] = {{"family", to_string(inst.problem.f.family)}, {"parameter", inst.problem.f.parameter}};
  j["L_g"] = inst.problem.g.lipschitz;
  j["L_h"] = inst.problem.h.lipschitz;
  json files = json::object();
  for (const auto& [name, m] : inst.data) {
    const std::string file = name + ".csv";
    write_matrix_csv(dir / file, m);
    files[name] = file;
  }
  j["matrices"] = files;
  std::ofstream os(dir / "instance.json");
  if (!os) throw ConfigError("cannot write " + (dir / "instance.json").string());
  os << j.dump(2) << '\n';
}

BenchmarkInstance<double> load_instance(const fs::path& dir) {
  std::ifstream is(dir / "instance.json");
  if (!is) throw ConfigError("cannot read " + (dir / "instance.json").string());
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError("instance.json: " + std::string(e.what()));
  }
  auto matrix = [&](const std::string& name) {
    if (!j["matrices"].contains(name)) throw ConfigError("instance.json: missing matrix '" + name + "'");
    return read_matrix_csv(dir / j["matrices"][name].get<std::string>());
  };
  const auto gen = j.at("generator").get<std::string>();
  const auto& params = j.at("parameters");
  BenchmarkInstance<double> inst = [&] {
    if (gen == "sparse_regression") {
      const Vector<double> b = matrix("b").col(0);
      auto out = sparse_regression_from<double>(matrix("D"), b,
                                                penalty_from_string(params.at("penalty").get<std::string>()),
                                                std::stod(params.at("lambda").get<std::string>()));
      if (j["matrices"].contains("x_true")) out.data["x_true"] = matrix("x_true");
      return out;
    }
    if (gen == "box_qp" || gen == "nonconvex_qp") {
      const Matrix<double> M = matrix("M");
      const double box = std::stod(params.at("box").get<std::string>());
      auto out = make_box_qp<double>(M, box);
      out.problem.h = quadratic_form<double>(M, Vector<double>{}, j.at("L_h").get<double>());
      out.generator = gen;
      return out;
    }
    if (gen == "consensus_toy") return make_consensus_toy<double>(matrix("target").col(0));
    throw ConfigError("instance.json: unknown generator '" + gen + "'");
  }();
  inst.seed = j.value("seed", std::uint64_t{0});
  for (const auto& [k, v] : params.items()) inst.descriptor[k] = v.get<std::string>();
  return inst;
}

}  // namespace vmpladmm::app
