#include "qmarg/io.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "qmarg/demos.hpp"

namespace qmarg::io {

namespace {

const Json& require(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw InvalidInput(std::string("missing field '") + key + "'");
  return j.at(key);
}

int to_int(const Json& j, const char* what) {
  if (!j.is_number_integer()) throw InvalidInput(std::string(what) + " must be an integer");
  return j.get<int>();
}

double to_double(const Json& j, const char* what) {
  if (!j.is_number()) throw InvalidInput(std::string(what) + " must be a number");
  return j.get<double>();
}

std::vector<int> int_list(const Json& j, const char* what) {
  if (!j.is_array()) throw InvalidInput(std::string(what) + " must be a list of integers");
  std::vector<int> out;
  for (const auto& v : j) out.push_back(to_int(v, what));
  return out;
}

SystemShape parse_shape(const Json& j) {
  const auto dims = int_list(j, "dims");
  if (dims.empty()) throw InvalidInput("dims must not be empty");
  for (int d : dims)
    if (d < 2) throw InvalidInput("every entry of dims must be at least 2");
  return SystemShape(dims);
}

HermitianOperator parse_operator(const Json& m, const SystemShape& shape, const char* what) {
  const Matrix mat = matrix_from_json(m);
  if (mat.rows() != shape.total() || mat.cols() != shape.total())
    throw InvalidInput(std::string(what) + " has the wrong size for its systems");
  return HermitianOperator(shape, mat, kFileTol);
}

}  // namespace

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (int r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(Json::array({m(r, c).real(), m(r, c).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw InvalidInput("matrix must be a nonempty list of rows");
  const auto rows = static_cast<int>(j.size());
  const auto cols = j[0].is_array() ? static_cast<int>(j[0].size()) : 0;
  if (cols == 0) throw InvalidInput("matrix rows must be nonempty lists");
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const auto& row = j[r];
    if (!row.is_array() || static_cast<int>(row.size()) != cols) throw InvalidInput("matrix rows differ in length");
    for (int c = 0; c < cols; ++c) {
      const auto& e = row[c];
      if (e.is_number()) {
        m(r, c) = e.get<double>();
      } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
        m(r, c) = Complex(e[0].get<double>(), e[1].get<double>());
      } else {
        throw InvalidInput("matrix entries must be numbers or [re, im] pairs");
      }
    }
  }
  return m;
}

Json subset_to_json(const Subset& s) { return Json(s); }

ProblemFile parse_problem(const Json& j) {
  if (!j.is_object()) throw InvalidInput("problem file must be a JSON object");
  ProblemFile pf;
  pf.shape = parse_shape(require(j, "dims"));

  if (j.contains("statistics")) {
    if (!j["statistics"].is_string()) throw InvalidInput("statistics must be \"bose\" or \"fermi\"");
    pf.statistics = parse_statistics(j["statistics"].get<std::string>());
  }
  if (j.contains("particles")) pf.particles = to_int(j["particles"], "particles");

  if (j.contains("marginals")) {
    const auto& list = j["marginals"];
    if (!list.is_array()) throw InvalidInput("marginals must be a list");
    std::vector<MarginalEntry> entries;
    for (const auto& e : list) {
      Subset systems = int_list(require(e, "systems"), "systems");
      validate_subset(systems, pf.shape.size());
      const auto sub = pf.shape.restrict_to(systems);
      entries.push_back({systems, DensityState(parse_operator(require(e, "matrix"), sub, "marginal"), kFileTol)});
    }
    pf.marginals.emplace(pf.shape, std::move(entries));
  }

  if (j.contains("hamiltonian")) {
    const int d = pf.shape.dim(1);
    pf.hamiltonian = parse_operator(j["hamiltonian"], SystemShape({d, d}), "hamiltonian");
  }

  if (j.contains("generator")) {
    const auto& g = j["generator"];
    Generator gen;
    if (!require(g, "name").is_string()) throw InvalidInput("generator name must be a string");
    gen.name = g["name"].get<std::string>();
    if (gen.name != "butterley") throw InvalidInput("unknown generator '" + gen.name + "'");
    if (pf.shape != SystemShape({2, 2, 2})) throw InvalidInput("the butterley generator needs dims [2, 2, 2]");
    gen.p = g.contains("p") ? to_double(g["p"], "generator p") : 0.25;
    pf.generator = gen;
  }

  if (j.contains("operator")) {
    pf.op = parse_operator(j["operator"], pf.shape, "operator");
  } else if (j.contains("operator_numerators")) {
    const double den = to_double(require(j, "operator_denominator"), "operator_denominator");
    if (den == 0.0) throw InvalidInput("operator_denominator must be nonzero");
    pf.op = parse_operator(j["operator_numerators"], pf.shape, "operator");
    *pf.op *= 1.0 / den;
  }
  return pf;
}

Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput("'" + path + "' is not valid JSON: " + e.what());
  }
}

void save_json(const Json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

ProblemFile load_problem(const std::string& path) {
  try {
    return parse_problem(load_json(path));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput("'" + path + "': " + e.what());
  }
}

MarginalSet problem_marginals(const ProblemFile& pf, std::optional<double> p) {
  if (pf.generator) return demos::butterley_marginals(p.value_or(pf.generator->p));
  if (p) throw InvalidInput("--p applies only to generator files");
  if (!pf.marginals) throw InvalidInput("problem file has no marginals");
  return *pf.marginals;
}

Json marginals_to_json(const MarginalSet& ms) {
  Json list = Json::array();
  for (const auto& e : ms.entries())
    list.push_back(Json{{"systems", subset_to_json(e.systems)}, {"matrix", matrix_to_json(e.state.matrix())}});
  return list;
}

Json problem_to_json(const MarginalSet& ms) {
  return Json{{"dims", ms.shape().dims()}, {"marginals", marginals_to_json(ms)}};
}

Json witness_to_json(const Witness& w) {
  Json j = {{"schema", kWitnessSchema}, {"version", kSchemaVersion}, {"dims", w.shape().dims()}};
  Json parts = Json::array();
  const bool omitted = w.omitted_layout();
  for (std::size_t k = 0; k < w.size(); ++k) {
    Json part;
    if (omitted) part["omitted"] = static_cast<int>(k) + 1;
    part["systems"] = subset_to_json(w.systems()[k]);
    part["matrix"] = matrix_to_json(w.parts()[k].matrix());
    parts.push_back(std::move(part));
  }
  j["parts"] = std::move(parts);
  return j;
}

Witness witness_from_json(const Json& j) {
  try {
    if (!j.is_object() || j.value("schema", "") != kWitnessSchema) throw InvalidInput("not a witness file");
    if (to_int(require(j, "version"), "version") != kSchemaVersion) throw InvalidInput("unsupported witness version");
    const auto shape = parse_shape(require(j, "dims"));
    const auto& list = require(j, "parts");
    if (!list.is_array() || list.empty()) throw InvalidInput("witness parts must be a nonempty list");
    std::vector<Subset> systems;
    std::vector<HermitianOperator> parts;
    for (const auto& p : list) {
      Subset s;
      if (p.contains("systems")) {
        s = int_list(p["systems"], "systems");
      } else {
        const int i = to_int(require(p, "omitted"), "omitted");
        if (i < 1 || i > shape.size()) throw InvalidInput("omitted system out of range");
        s = shape.complement({i});
      }
      validate_subset(s, shape.size());
      parts.push_back(parse_operator(require(p, "matrix"), shape.restrict_to(s), "witness part"));
      systems.push_back(std::move(s));
    }
    return Witness(shape, std::move(systems), std::move(parts));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed witness: ") + e.what());
  }
}

Witness load_witness(const std::string& path) { return witness_from_json(load_json(path)); }

Json report_header(const std::string& command) {
  return Json{{"schema", kReportSchema}, {"version", kSchemaVersion}, {"command", command}};
}

namespace {

bool scalar(const Json& j) { return j.is_primitive(); }

void render(const Json& j, const std::string& prefix, std::ostringstream& os) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto key = prefix.empty() ? it.key() : prefix + "." + it.key();
    const auto& v = it.value();
    if (scalar(v)) {
      os << key << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
    } else if (v.is_array() && std::all_of(v.begin(), v.end(), scalar)) {
      os << key << ": " << v.dump() << '\n';
    } else if (v.is_object()) {
      render(v, key, os);
    }
  }
}

}  // namespace

std::string render_text(const Json& report) {
  std::ostringstream os;
  os << std::setprecision(12);
  render(report, "", os);
  return os.str();
}

}  // namespace qmarg::io
