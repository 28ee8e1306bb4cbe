#include "matschrod/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

namespace matschrod {

std::string to_string(PropagationMethod method) {
  switch (method) {
    case PropagationMethod::kExactDense:
      return "exact-dense";
    case PropagationMethod::kLanczosExpmv:
      return "lanczos-expmv";
    case PropagationMethod::kCrankNicolson:
      return "crank-nicolson";
  }
  return "unknown";
}

PropagationMethod propagation_method_from_string(const std::string& name) {
  if (name == "exact-dense") return PropagationMethod::kExactDense;
  if (name == "lanczos-expmv") return PropagationMethod::kLanczosExpmv;
  if (name == "crank-nicolson") return PropagationMethod::kCrankNicolson;
  throw InvalidArgument("unknown propagation method '" + name + "'");
}

void PropagatorConfig::validate(std::size_t dimension) const {
  for (double t : times)
    if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidArgument("propagator times must be finite and >= 0");
  if (!(tol > 0.0)) throw InvalidArgument("propagator tolerance must be positive");
  if (krylov_dim < 2) throw InvalidArgument("Krylov dimension must be >= 2");
  if (cn_steps < 1) throw InvalidArgument("Crank-Nicolson needs at least one step");
  for (double p : p_list)
    if (!(p >= 1.0)) throw InvalidArgument("norm exponents must satisfy p >= 1");
  if (method == PropagationMethod::kExactDense && dimension > dense_limit) {
    throw InvalidArgument("exact-dense propagation is limited to dimension <= " + std::to_string(dense_limit));
  }
}

double conjugate_exponent(double p) {
  if (!(p >= 1.0)) throw InvalidArgument("conjugate_exponent needs p >= 1");
  if (p == 1.0) return kInfinity;
  if (std::isinf(p)) return 1.0;
  return p / (p - 1.0);
}

struct Propagator::Dense {
  Vector eigenvalues;
  Matrix eigenvectors;
};

struct Propagator::CrankNicolson {
  std::map<double, std::unique_ptr<Eigen::SimplicialLDLT<SparseMatrix>>> factors;
};

Propagator::Propagator(const SymmetricOperator& op, PropagatorConfig config)
    : op_(&op), config_(std::move(config)) {
  config_.validate(op.dimension());
  if (config_.method == PropagationMethod::kExactDense) {
    Eigen::SelfAdjointEigenSolver<Matrix> es{Matrix(op.generator())};
    if (es.info() != Eigen::Success) throw SolverError("dense eigendecomposition failed");
    dense_ = std::make_unique<Dense>(Dense{es.eigenvalues(), es.eigenvectors()});
  }
}

Propagator::~Propagator() = default;
Propagator::Propagator(Propagator&&) noexcept = default;
Propagator& Propagator::operator=(Propagator&&) noexcept = default;

VectorState Propagator::apply(const VectorState& f, double t) const {
  if (f.grid() != op_->grid()) throw InvalidArgument("state lives on a different grid than the operator");
  if (!(t >= 0.0)) throw InvalidArgument("propagation time must be >= 0");
  last_error_ = 0.0;
  if (t == 0.0) return f;
  switch (config_.method) {
    case PropagationMethod::kExactDense: {
      const Vector coeff = dense_->eigenvectors.transpose() * f.values();
      const Vector scaled = (-t * dense_->eigenvalues.array()).exp().matrix().cwiseProduct(coeff);
      return VectorState(f.grid(), dense_->eigenvectors * scaled);
    }
    case PropagationMethod::kLanczosExpmv: {
      KrylovResult kr = krylov_expmv(op_->generator(), f.values(), t, config_.krylov_dim, config_.tol);
      last_error_ = kr.error_estimate;
      return VectorState(f.grid(), std::move(kr.value));
    }
    case PropagationMethod::kCrankNicolson: {
      if (!cn_) cn_ = std::make_unique<CrankNicolson>();
      const double tau = t / config_.cn_steps;
      auto it = cn_->factors.find(tau);
      if (it == cn_->factors.end()) {
        SparseMatrix lhs = op_->generator() * (0.5 * tau);
        SparseMatrix eye(lhs.rows(), lhs.cols());
        eye.setIdentity();
        lhs += eye;
        it = cn_->factors.emplace(tau, std::make_unique<Eigen::SimplicialLDLT<SparseMatrix>>(lhs)).first;
        if (it->second->info() != Eigen::Success) throw SolverError("Crank-Nicolson factorization failed");
      }
      Vector y = f.values();
      for (int s = 0; s < config_.cn_steps; ++s) {
        const Vector rhs = y - (0.5 * tau) * (op_->generator() * y);
        y = it->second->solve(rhs);
      }
      return VectorState(f.grid(), std::move(y));
    }
  }
  throw InvalidArgument("unknown propagation method");
}

VectorState propagate(const SymmetricOperator& op, const VectorState& f0, double t, const PropagatorConfig& config) {
  const Propagator prop(op, config);
  return prop.apply(f0, t);
}

void ProbeReport::add_verdict(Verdict v) {
  if (v.guaranteed && !v.passed) passed = false;
  verdicts.push_back(std::move(v));
}

namespace {

std::string p_name(double p) {
  if (std::isinf(p)) return "inf";
  std::ostringstream os;
  os << p;
  return os.str();
}

void reject_crank_nicolson(const Propagator& prop, const char* what) {
  if (prop.method() == PropagationMethod::kCrankNicolson) {
    throw InvalidArgument(std::string(what) + ": Crank-Nicolson is not positivity preserving; use exact-dense or "
                                              "lanczos-expmv");
  }
}

}  // namespace

ProbeReport contraction_probe(const Propagator& prop, const std::vector<VectorState>& f_list, double slack) {
  const auto& meta = prop.op().metadata();
  ProbeReport report;
  report.kind = "contraction";
  const auto& cfg = prop.config();
  std::map<double, bool> all_ok;
  for (double p : cfg.p_list) all_ok[p] = true;
  for (std::size_t fi = 0; fi < f_list.size(); ++fi) {
    const VectorState& f = f_list[fi];
    std::vector<double> in_norms;
    bool skip = false;
    for (double p : cfg.p_list) {
      in_norms.push_back(mixed_norm(f, p));
      if (in_norms.back() == 0.0) skip = true;
    }
    if (skip) {
      report.notes.push_back("input " + std::to_string(fi) + " has zero norm; skipped");
      continue;
    }
    for (double t : cfg.times) {
      const VectorState out = prop.apply(f, t);
      for (std::size_t pi = 0; pi < cfg.p_list.size(); ++pi) {
        const double p = cfg.p_list[pi];
        ProbeRow row;
        row.f_index = fi;
        row.t = t;
        row.p = p;
        row.input_norm = in_norms[pi];
        row.output_norm = mixed_norm(out, p);
        row.ratio = row.output_norm / row.input_norm;
        row.bound = 1.0 + slack;
        row.passed = row.ratio <= row.bound;
        all_ok[p] = all_ok[p] && row.passed;
        report.rows.push_back(row);
      }
    }
  }
  for (double p : cfg.p_list) {
    Verdict v;
    v.name = "contraction_p=" + p_name(p);
    v.passed = all_ok[p];
    v.guaranteed = meta.psd_potential && (p == 2.0 || meta.diagonal_diffusion);
    double worst = 0.0;
    for (const auto& row : report.rows)
      if (row.p == p) worst = std::max(worst, row.ratio);
    std::ostringstream os;
    os << "max ratio " << worst << " vs bound " << 1.0 + slack;
    if (!v.guaranteed) os << " (informational)";
    v.detail = os.str();
    report.add_verdict(std::move(v));
  }
  return report;
}

ProbeReport strong_continuity_probe(const Propagator& prop, const VectorState& f, std::vector<double> t_list,
                                    double p) {
  if (!(p > 2.0) || std::isinf(p)) throw InvalidArgument("strong_continuity_probe needs 2 < p < infinity");
  const double theta = 2.0 / p;
  const double f_inf = mixed_norm(f, kInfinity);
  ProbeReport report;
  report.kind = "strong_continuity";
  std::sort(t_list.begin(), t_list.end(), std::greater<>());
  bool inequality = true;
  double scale = 0.0;
  for (double t : t_list) {
    const VectorState out = prop.apply(f, t);
    const VectorState diff(f.grid(), out.values() - f.values());
    ProbeRow row;
    row.t = t;
    row.p = p;
    row.output_norm = mixed_norm(diff, p);
    row.input_norm = std::pow(2.0, 1.0 - theta) * std::pow(f_inf, 1.0 - theta) * std::pow(mixed_norm(diff, 2.0), theta);
    row.bound = row.input_norm * (1.0 + 1e-10) + 1e-300;
    row.ratio = row.input_norm > 0.0 ? row.output_norm / row.input_norm : 0.0;
    row.passed = row.output_norm <= row.bound;
    inequality = inequality && row.passed;
    scale = std::max(scale, row.output_norm);
    report.rows.push_back(row);
  }
  bool monotone = true;
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    if (report.rows[i].output_norm > report.rows[i - 1].output_norm + 1e-10 * std::max(scale, 1.0)) monotone = false;
  }
  const auto& meta = prop.op().metadata();
  report.add_verdict({"interpolation_inequality", inequality, meta.diagonal_diffusion && meta.psd_potential,
                      "theta = " + std::to_string(theta)});
  report.add_verdict({"decreasing_as_t_to_0", monotone, false, "trend along the supplied times"});
  return report;
}

ProbeReport positivity_probe(const Propagator& prop, const PotentialField& v, const std::vector<VectorState>& f_list,
                             const std::vector<double>& t_list, double tol_rel) {
  reject_crank_nicolson(prop, "positivity_probe");
  for (const auto& f : f_list)
    if (f.values().size() > 0 && f.values().minCoeff() < 0.0)
      throw InvalidArgument("positivity_probe: inputs must be componentwise nonnegative");
  ProbeReport report;
  report.kind = "positivity";
  double max_inf = 0.0;
  for (std::size_t fi = 0; fi < f_list.size(); ++fi) {
    const VectorState& f = f_list[fi];
    const double f_inf = mixed_norm(f, kInfinity);
    max_inf = std::max(max_inf, f_inf);
    for (double t : t_list) {
      const VectorState out = prop.apply(f, t);
      ProbeRow row;
      row.f_index = fi;
      row.t = t;
      row.input_norm = f_inf;
      row.output_norm = out.values().size() ? out.values().minCoeff() : 0.0;
      row.ratio = f_inf > 0.0 ? row.output_norm / f_inf : 0.0;
      report.min_component = std::min(report.min_component, row.output_norm);
      report.rows.push_back(row);
    }
  }
  const double threshold = -tol_rel * max_inf;
  for (auto& row : report.rows) {
    row.bound = threshold;
    row.passed = row.output_norm >= threshold;
  }
  const bool measured_positive = report.min_component >= threshold;
  const bool predicted_positive = v.off_diagonal_max() <= 0.0;
  std::ostringstream os;
  os << "min component " << report.min_component << ", threshold " << threshold;
  report.label = measured_positive ? "POSITIVE" : "NOT-POSITIVE";
  if (predicted_positive) {
    report.add_verdict({"positive", measured_positive, prop.op().metadata().diagonal_diffusion, os.str()});
  } else {
    report.add_verdict({"measured_positive", measured_positive, false,
                        os.str() + " (a positive off-diagonal entry exists; see violation_witness)"});
  }
  return report;
}

ProbeReport violation_witness(const Propagator& prop, const PotentialField& v, int i, int j,
                              const WitnessOptions& options) {
  reject_crank_nicolson(prop, "violation_witness");
  const GridSpec& grid = prop.op().grid();
  const int m = grid.components();
  if (i < 0 || j < 0 || i >= m || j >= m || i == j) throw InvalidArgument("violation_witness needs i != j in [0, m)");
  if (!(options.t_min > 0.0) || options.t_max < options.t_min || options.points_per_decade < 1) {
    throw InvalidArgument("violation_witness: bad time sweep");
  }
  std::size_t center = 0;
  double best = -kInfinity;
  // Ties go to the node nearest the origin, away from the boundary.
  for (std::size_t a = 0; a < grid.node_count(); ++a) {
    const double vij = v.at(a)(i, j);
    const bool tie = std::isfinite(best) && std::abs(vij - best) <= 1e-14 * std::abs(best);
    if (vij > best && !tie) {
      best = vij;
      center = a;
    } else if (tie && grid.coordinates(a).squaredNorm() < grid.coordinates(center).squaredNorm()) {
      center = a;
    }
  }
  if (!(best > 0.0)) throw InvalidArgument("violation_witness: v_ij is nowhere positive");

  const VectorState f = bump_state(grid, grid.coordinates(center), options.bump_scale * grid.spacing(), i);
  const double delta = options.delta_rel * mixed_norm(f, kInfinity);
  ProbeReport report;
  report.kind = "violation_witness";
  Witness w;
  w.threshold = -delta;
  w.component = j;
  w.source_component = i;
  const double decades = std::log10(options.t_max / options.t_min);
  const int count = static_cast<int>(std::round(decades * options.points_per_decade));
  for (int s = 0; s <= count; ++s) {
    const double t = count == 0 ? options.t_min : options.t_min * std::pow(10.0, decades * s / count);
    const VectorState out = prop.apply(f, t);
    double lowest = kInfinity;
    std::size_t where = 0;
    for (std::size_t a = 0; a < grid.node_count(); ++a) {
      if (out.at(a, j) < lowest) {
        lowest = out.at(a, j);
        where = a;
      }
    }
    ProbeRow row;
    row.t = t;
    row.output_norm = lowest;
    row.input_norm = f.values().maxCoeff();
    row.bound = -delta;
    row.passed = lowest <= -delta;
    report.rows.push_back(row);
    report.min_component = std::min(report.min_component, lowest);
    if (row.passed) {
      w.found = true;
      w.t = t;
      w.node = where;
      w.value = lowest;
      break;
    }
  }
  report.witness = w;
  report.label = w.found ? "WITNESS-FOUND" : "NOT-FOUND";
  std::ostringstream os;
  os << "v_" << i << j << " max " << best << "; ";
  if (w.found) {
    os << "(T(" << w.t << ") f)_" << j << " = " << w.value << " at node " << w.node;
  } else {
    os << "no component below " << -delta << " on the sweep";
  }
  report.add_verdict({"witness_found", w.found, true, os.str()});
  return report;
}

}  // namespace matschrod
