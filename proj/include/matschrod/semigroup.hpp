#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "matschrod/operator.hpp"

namespace matschrod {

enum class PropagationMethod { kExactDense, kLanczosExpmv, kCrankNicolson };

std::string to_string(PropagationMethod method);
PropagationMethod propagation_method_from_string(const std::string& name);

struct PropagatorConfig {
  PropagationMethod method = PropagationMethod::kExactDense;
  std::vector<double> times{0.01, 0.1, 1.0};
  int krylov_dim = 30;
  int cn_steps = 200;
  double tol = 1e-10;
  std::vector<double> p_list{1.0, 2.0, 4.0, kInfinity};
  std::size_t dense_limit = 3000;

  // Throws InvalidArgument on negative times, non-positive tolerances,
  // p < 1, or exact-dense on a too large problem.
  void validate(std::size_t dimension) const;
};

// p / (p - 1), with 1 <-> infinity.
double conjugate_exponent(double p);

struct KrylovResult {
  Vector value;
  double error_estimate = 0.0;
  int steps = 0;
  int restarts = 0;
  int krylov_dim = 0;
};

// exp(-t K) v by Lanczos projection with adaptive time stepping. Each
// internal step keeps its a-posteriori estimate below tol |v| tau / t.
// When the step size stalls the subspace is doubled, up to three times,
// then SolverError.
KrylovResult krylov_expmv(const SparseMatrix& K, const Vector& v, double t, int krylov_dim, double tol);

// T(t) = exp(t A_h) = exp(-t K) for one operator. Exact-dense caches the
// eigendecomposition of K; Crank-Nicolson caches its factorization per step.
class Propagator {
 public:
  Propagator(const SymmetricOperator& op, PropagatorConfig config);
  ~Propagator();
  Propagator(Propagator&&) noexcept;
  Propagator& operator=(Propagator&&) noexcept;

  const SymmetricOperator& op() const { return *op_; }
  const PropagatorConfig& config() const { return config_; }
  PropagationMethod method() const { return config_.method; }

  VectorState apply(const VectorState& f, double t) const;
  // Estimated error of the last Krylov application (0 otherwise).
  double last_error_estimate() const { return last_error_; }

 private:
  struct Dense;
  struct CrankNicolson;

  const SymmetricOperator* op_;
  PropagatorConfig config_;
  std::unique_ptr<Dense> dense_;
  mutable std::unique_ptr<CrankNicolson> cn_;
  mutable double last_error_ = 0.0;
};

VectorState propagate(const SymmetricOperator& op, const VectorState& f0, double t, const PropagatorConfig& config);

struct ProbeRow {
  std::size_t f_index = 0;
  double t = 0.0;
  double p = 2.0;
  double input_norm = 0.0;
  double output_norm = 0.0;
  double ratio = 0.0;
  double bound = 0.0;  // contract value the ratio/quantity is compared with
  bool passed = true;
};

struct Verdict {
  std::string name;
  bool passed = true;
  bool guaranteed = true;  // false: informational, excluded from `passed` of the report
  std::string detail;
};

struct Witness {
  bool found = false;
  double t = 0.0;
  std::size_t node = 0;
  int component = 0;
  double value = 0.0;
  double threshold = 0.0;
  int source_component = 0;
};

struct ProbeReport {
  std::string kind;
  std::vector<ProbeRow> rows;
  std::vector<std::string> notes;
  double min_component = kInfinity;
  std::vector<Verdict> verdicts;
  std::optional<Witness> witness;
  // POSITIVE, NOT-POSITIVE, WITNESS-FOUND, NOT-FOUND, ... depending on kind.
  std::string label;
  bool passed = true;

  void add_verdict(Verdict v);
};

// Ratios |T(t) f|_p / |f|_p for each f, t in config.times, p in config.p_list.
// Contract ratio <= 1 + 1e-8; p = 2 is always guaranteed for PSD V, the
// other p only with diagonal Q (informational otherwise).
ProbeReport contraction_probe(const Propagator& prop, const std::vector<VectorState>& f_list,
                              double slack = 1e-8);

// |T(t)f - f|_p <= 2^(1-theta) |f|_inf^(1-theta) |T(t)f - f|_2^theta with
// theta = 2/p, 2 < p < inf. Also records whether |T(t)f - f|_p decreases
// along t_list sorted descending.
ProbeReport strong_continuity_probe(const Propagator& prop, const VectorState& f, std::vector<double> t_list,
                                    double p);

// Minimum component of T(t) f over nodes, components, t. With all
// off-diagonal v_ij <= 0 (and diagonal Q) the contract is
// min >= -tol_rel max |f|_inf. Rejects negative inputs and Crank-Nicolson.
ProbeReport positivity_probe(const Propagator& prop, const PotentialField& v, const std::vector<VectorState>& f_list,
                             const std::vector<double>& t_list, double tol_rel = 1e-10);

struct WitnessOptions {
  double t_min = 1e-3;
  double t_max = 1.0;
  int points_per_decade = 4;
  double delta_rel = 1e-8;
  // Bump scale in units of h.
  double bump_scale = 1.5;
};

// Starts from f = phi e_i, phi a bump centered where v_ij is largest, and
// sweeps t geometrically for (T(t) f)_j <= -delta_rel |f|_inf.
ProbeReport violation_witness(const Propagator& prop, const PotentialField& v, int i, int j,
                              const WitnessOptions& options = {});

}  // namespace matschrod
