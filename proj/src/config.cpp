#include "matschrod/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <Eigen/Eigenvalues>

namespace matschrod {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <class T>
void read(const json& obj, const std::string& where, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

void read_int(const json& obj, const std::string& where, const char* key, int& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
  out = v.get<int>();
}

void read_size(const json& obj, const std::string& where, const char* key, std::size_t& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError(where + "." + key + ": expected a nonnegative integer");
  }
  out = v.get<std::size_t>();
}

void read_double(const json& obj, const std::string& where, const char* key, double& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
  out = v.get<double>();
}

double p_from_json(const json& v) {
  if (v.is_string() && (v == "inf" || v == "Infinity")) return kInfinity;
  if (v.is_number()) return v.get<double>();
  throw ConfigError("propagator.p: entries must be numbers or \"inf\"");
}

json p_to_json(double p) { return std::isinf(p) ? json("inf") : json(p); }

Matrix matrix_from_json(const json& v, int size, const std::string& where) {
  if (!v.is_array() || static_cast<int>(v.size()) != size) {
    throw ConfigError(where + ": expected a " + std::to_string(size) + "x" + std::to_string(size) + " array");
  }
  Matrix out(size, size);
  for (int i = 0; i < size; ++i) {
    const json& row = v[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<int>(row.size()) != size) throw ConfigError(where + ": row " + std::to_string(i) + " has the wrong length");
    for (int j = 0; j < size; ++j) {
      const json& e = row[static_cast<std::size_t>(j)];
      if (!e.is_number()) throw ConfigError(where + ": entries must be numbers");
      out(i, j) = e.get<double>();
    }
  }
  return out;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

const std::set<std::string> kFamilies{"constant", "harmonic_oscillator", "degenerate_counterexample",
                                      "coupled_confining"};

}  // namespace

bool ExperimentConfig::wants(const std::string& format) const {
  return std::find(output.formats.begin(), output.formats.end(), format) != output.formats.end();
}

EigenOptions ExperimentConfig::eigen_options() const {
  EigenOptions o;
  o.method = solver.method == "dense" ? EigenMethod::kDense
             : solver.method == "lanczos" ? EigenMethod::kLanczos
                                          : EigenMethod::kAuto;
  o.dense_limit = solver.dense_limit;
  o.seed = seed;
  o.block_size = solver.block_size;
  return o;
}

ExperimentConfig parse_config(const json& doc) {
  ExperimentConfig c;
  reject_unknown(doc, "config",
                 {"seed", "grid", "coefficients", "solver", "propagator", "probes", "initial", "output"});
  if (doc.contains("seed")) {
    const json& s = doc.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
      throw ConfigError("seed: expected a nonnegative integer");
    }
    c.seed = s.get<std::uint64_t>();
  }

  if (doc.contains("grid")) {
    const json& g = doc.at("grid");
    reject_unknown(g, "grid", {"d", "L", "N", "m"});
    read_int(g, "grid", "d", c.grid.d);
    read_double(g, "grid", "L", c.grid.L);
    read_int(g, "grid", "N", c.grid.N);
    read_int(g, "grid", "m", c.grid.m);
  }
  try {
    (void)GridSpec::build(c.grid.d, c.grid.L, c.grid.N, c.grid.m);
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }

  const bool has_coefficients = doc.contains("coefficients");
  if (has_coefficients) {
    const json& q = doc.at("coefficients");
    reject_unknown(q, "coefficients", {"family", "Q", "V", "confinement"});
    read(q, "coefficients", "family", c.coefficients.family);
  }
  if (!kFamilies.count(c.coefficients.family)) {
    throw ConfigError("coefficients.family: unknown family '" + c.coefficients.family + "'");
  }
  if (has_coefficients) {
    const json& q = doc.at("coefficients");
    const bool inline_fields = q.contains("Q") || q.contains("V") || q.contains("confinement");
    if (c.coefficients.family != "constant" && inline_fields) {
      throw ConfigError("coefficients: Q, V and confinement are only accepted for the constant family");
    }
    if (q.contains("Q")) c.coefficients.Q = matrix_from_json(q.at("Q"), c.grid.d, "coefficients.Q");
    if (q.contains("V")) c.coefficients.V = matrix_from_json(q.at("V"), c.grid.m, "coefficients.V");
    read_double(q, "coefficients", "confinement", c.coefficients.confinement);
  }
  if (c.coefficients.family == "constant") {
    if (!c.coefficients.Q) c.coefficients.Q = Matrix::Identity(c.grid.d, c.grid.d);
    if (!c.coefficients.V) c.coefficients.V = Matrix::Zero(c.grid.m, c.grid.m);
    if (c.coefficients.confinement < 0.0) throw ConfigError("coefficients.confinement must be >= 0");
  }
  if (c.coefficients.family == "harmonic_oscillator" && (c.grid.d != 1 || c.grid.m != 1)) {
    throw ConfigError("harmonic_oscillator requires grid.d = 1 and grid.m = 1");
  }
  if ((c.coefficients.family == "degenerate_counterexample" || c.coefficients.family == "coupled_confining") &&
      c.grid.m < 2) {
    throw ConfigError(c.coefficients.family + " requires grid.m >= 2");
  }

  if (doc.contains("solver")) {
    const json& s = doc.at("solver");
    reject_unknown(s, "solver", {"k", "tol", "method", "dense_limit", "block_size"});
    read_size(s, "solver", "k", c.solver.k);
    read_double(s, "solver", "tol", c.solver.tol);
    read(s, "solver", "method", c.solver.method);
    read_size(s, "solver", "dense_limit", c.solver.dense_limit);
    read_int(s, "solver", "block_size", c.solver.block_size);
  }
  const std::size_t dim = GridSpec::build(c.grid.d, c.grid.L, c.grid.N, c.grid.m).state_size();
  if (c.solver.k < 1 || c.solver.k > dim) {
    throw ConfigError("solver.k = " + std::to_string(c.solver.k) + " must lie in [1, " + std::to_string(dim) + "]");
  }
  if (!(c.solver.tol > 0.0)) throw ConfigError("solver.tol must be > 0");
  if (c.solver.method != "auto" && c.solver.method != "dense" && c.solver.method != "lanczos") {
    throw ConfigError("solver.method must be auto, dense or lanczos");
  }
  if (c.solver.block_size < 0) throw ConfigError("solver.block_size must be >= 0");

  if (doc.contains("propagator")) {
    const json& p = doc.at("propagator");
    reject_unknown(p, "propagator", {"method", "times", "krylov_dim", "cn_steps", "tol", "p", "dense_limit"});
    if (p.contains("method")) {
      std::string name;
      read(p, "propagator", "method", name);
      try {
        c.propagator.method = propagation_method_from_string(name);
      } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("propagator.method: ") + e.what());
      }
    }
    read(p, "propagator", "times", c.propagator.times);
    read_int(p, "propagator", "krylov_dim", c.propagator.krylov_dim);
    read_int(p, "propagator", "cn_steps", c.propagator.cn_steps);
    read_double(p, "propagator", "tol", c.propagator.tol);
    read_size(p, "propagator", "dense_limit", c.propagator.dense_limit);
    if (p.contains("p")) {
      if (!p.at("p").is_array()) throw ConfigError("propagator.p: expected an array");
      c.propagator.p_list.clear();
      for (const json& v : p.at("p")) c.propagator.p_list.push_back(p_from_json(v));
    }
  }
  try {
    c.propagator.validate(dim);
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("propagator: ") + e.what());
  }

  if (doc.contains("probes")) {
    const json& p = doc.at("probes");
    reject_unknown(p, "probes", {"form", "beurling_denny", "contraction", "strong_continuity", "positivity",
                                 "sandwich", "merge", "reference_spectrum", "trials"});
    read(p, "probes", "form", c.probes.form);
    read(p, "probes", "beurling_denny", c.probes.beurling_denny);
    read(p, "probes", "contraction", c.probes.contraction);
    read(p, "probes", "strong_continuity", c.probes.strong_continuity);
    read(p, "probes", "positivity", c.probes.positivity);
    read(p, "probes", "sandwich", c.probes.sandwich);
    read(p, "probes", "merge", c.probes.merge);
    read(p, "probes", "reference_spectrum", c.probes.reference_spectrum);
    read_int(p, "probes", "trials", c.probes.trials);
  }
  if (c.probes.trials < 1) throw ConfigError("probes.trials must be >= 1");

  if (doc.contains("initial")) {
    const json& i = doc.at("initial");
    reject_unknown(i, "initial", {"kind", "center", "scale", "component"});
    read(i, "initial", "kind", c.initial.kind);
    read(i, "initial", "center", c.initial.center);
    read_double(i, "initial", "scale", c.initial.scale);
    read_int(i, "initial", "component", c.initial.component);
  }
  if (c.initial.kind != "bump" && c.initial.kind != "random" && c.initial.kind != "impulse") {
    throw ConfigError("initial.kind must be bump, random or impulse");
  }
  if (c.initial.center.empty()) c.initial.center.assign(static_cast<std::size_t>(c.grid.d), 0.0);
  if (static_cast<int>(c.initial.center.size()) != c.grid.d) throw ConfigError("initial.center must have d entries");
  if (!(c.initial.scale > 0.0)) throw ConfigError("initial.scale must be > 0");
  if (c.initial.component < 0 || c.initial.component >= c.grid.m) {
    throw ConfigError("initial.component must lie in [0, m)");
  }

  if (doc.contains("output")) {
    const json& o = doc.at("output");
    reject_unknown(o, "output", {"dir", "formats"});
    read(o, "output", "dir", c.output.dir);
    read(o, "output", "formats", c.output.formats);
  }
  for (const std::string& f : c.output.formats) {
    if (f != "json" && f != "csv" && f != "dat") throw ConfigError("output.formats: unknown format '" + f + "'");
  }
  return c;
}

json to_json(const ExperimentConfig& c) {
  json doc;
  doc["seed"] = c.seed;
  doc["grid"] = {{"d", c.grid.d}, {"L", c.grid.L}, {"N", c.grid.N}, {"m", c.grid.m}};
  json coeff = {{"family", c.coefficients.family}};
  if (c.coefficients.family == "constant") {
    coeff["Q"] = matrix_to_json(*c.coefficients.Q);
    coeff["V"] = matrix_to_json(*c.coefficients.V);
    coeff["confinement"] = c.coefficients.confinement;
  }
  doc["coefficients"] = coeff;
  doc["solver"] = {{"k", c.solver.k},
                   {"tol", c.solver.tol},
                   {"method", c.solver.method},
                   {"dense_limit", c.solver.dense_limit},
                   {"block_size", c.solver.block_size}};
  json p_list = json::array();
  for (double p : c.propagator.p_list) p_list.push_back(p_to_json(p));
  doc["propagator"] = {{"method", to_string(c.propagator.method)},
                       {"times", c.propagator.times},
                       {"krylov_dim", c.propagator.krylov_dim},
                       {"cn_steps", c.propagator.cn_steps},
                       {"tol", c.propagator.tol},
                       {"p", p_list},
                       {"dense_limit", c.propagator.dense_limit}};
  doc["probes"] = {{"form", c.probes.form},
                   {"beurling_denny", c.probes.beurling_denny},
                   {"contraction", c.probes.contraction},
                   {"strong_continuity", c.probes.strong_continuity},
                   {"positivity", c.probes.positivity},
                   {"sandwich", c.probes.sandwich},
                   {"merge", c.probes.merge},
                   {"reference_spectrum", c.probes.reference_spectrum},
                   {"trials", c.probes.trials}};
  doc["initial"] = {{"kind", c.initial.kind},
                    {"center", c.initial.center},
                    {"scale", c.initial.scale},
                    {"component", c.initial.component}};
  doc["output"] = {{"dir", c.output.dir}, {"formats", c.output.formats}};
  return doc;
}

void apply_override(json& doc, const std::string& dotted_path, const std::string& value) {
  if (dotted_path.empty()) throw ConfigError("empty override key");
  json parsed = json::parse(value, nullptr, false);
  if (parsed.is_discarded()) parsed = value;

  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = dotted_path.find('.', start);
    const std::string key = dotted_path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError("malformed override key '" + dotted_path + "'");
    if (!node->is_object()) {
      if (!node->is_null()) throw ConfigError("override '" + dotted_path + "' descends into a non-object");
      *node = json::object();
    }
    if (dot == std::string::npos) {
      (*node)[key] = parsed;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

GalleryProblem build_problem(const ExperimentConfig& c) {
  const auto& g = c.grid;
  const std::string& family = c.coefficients.family;
  if (family == "harmonic_oscillator") return harmonic_oscillator(g.L, g.N);
  if (family == "degenerate_counterexample") return degenerate_counterexample(g.L, g.N, g.m, {}, g.d);
  if (family == "coupled_confining") return coupled_confining(g.L, g.N, g.m, g.d);

  GalleryProblem p;
  p.name = "constant";
  p.description = "constant Q, V + c |x|^2 I";
  p.d = g.d;
  p.L = g.L;
  p.N = g.N;
  p.m = g.m;
  const Matrix q = *c.coefficients.Q;
  const Matrix v = *c.coefficients.V;
  const double conf = c.coefficients.confinement;
  const int m = g.m;
  p.q_fn = [q](const Point&) { return q; };
  p.v_fn = [v, conf, m](const Point& x) { return Matrix(v + conf * x.squaredNorm() * Matrix::Identity(m, m)); };
  const Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (v + v.transpose()));
  p.expected.symmetric = (v - v.transpose()).cwiseAbs().maxCoeff() <= PotentialField::kSymmetryTolerance;
  p.expected.psd = es.eigenvalues().minCoeff() >= -PotentialField::kPsdTolerance;
  p.expected.sandwich_applicable = p.expected.psd && p.expected.symmetric;
  double off = -kInfinity;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (i != j) off = std::max(off, v(i, j));
  const bool diagonal_q = (q - Matrix(q.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
  if (diagonal_q) p.expected.positive = off <= 0.0;
  return p;
}

}  // namespace matschrod
