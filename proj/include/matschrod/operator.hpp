#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "matschrod/form.hpp"
#include "matschrod/grid.hpp"

namespace matschrod {

using SparseMatrix = Eigen::SparseMatrix<double>;

// Finite-dimensional realization of -A.
//
// stiffness() is S with f^T S g = a_h(f, g) exactly; generator() is
// K = S / h^d, the matrix of -A_h with respect to the weighted L^2 product
// <f, g>_h = h^d f^T g. K is what the eigensolvers and propagators see.
class SymmetricOperator {
 public:
  struct Metadata {
    double eta1 = 1.0;
    double eta2 = 1.0;
    double off_diagonal_max = -kInfinity;
    bool diagonal_diffusion = true;
    bool psd_potential = true;
  };

  // Wraps a given symmetric generator K (stiffness = h^d K).
  static SymmetricOperator from_generator(const GridSpec& grid, SparseMatrix generator, Metadata meta);

  const GridSpec& grid() const { return grid_; }
  const SparseMatrix& stiffness() const { return stiffness_; }
  const SparseMatrix& generator() const { return generator_; }
  const Metadata& metadata() const { return meta_; }
  std::size_t dimension() const { return static_cast<std::size_t>(generator_.rows()); }
  double mass_weight() const { return grid_.cell_volume(); }

  // max |K_ij - K_ji| over stored entries.
  double symmetry_defect() const;
  // Infinity norm of K; it bounds the spectral norm.
  double norm_bound() const { return norm_bound_; }
  std::size_t max_row_nonzeros() const;

  Vector apply(const Vector& x) const { return generator_ * x; }

 private:
  SymmetricOperator(const GridSpec& grid, SparseMatrix stiffness, SparseMatrix generator, Metadata meta);
  friend SymmetricOperator assemble_operator(const FormAssembly&);

  GridSpec grid_;
  SparseMatrix stiffness_;
  SparseMatrix generator_;
  Metadata meta_;
  double norm_bound_ = 0.0;
};

// Throws InvalidArgument for a non-symmetric potential.
SymmetricOperator assemble_operator(const FormAssembly& assembly);

enum class EigenMethod { kAuto, kDense, kLanczos };

struct EigenOptions {
  EigenMethod method = EigenMethod::kAuto;
  std::size_t dense_limit = 3000;
  std::uint64_t seed = 42;
  // Block size for the Lanczos path; 0 picks one from m and d.
  int block_size = 0;
  std::size_t max_basis = 1200;
  bool keep_vectors = true;
};

struct SpectrumReport {
  std::vector<double> eigenvalues;  // ascending, with multiplicity
  std::vector<double> residuals;    // |K v - lambda v| for unit v
  Matrix eigenvectors;              // columns, Euclidean-normalized
  std::string method;
  int iterations = 0;
  double tolerance = 0.0;
  double norm_bound = 0.0;
  bool converged = true;
};

// k lowest eigenvalues of -A_h. Dense up to options.dense_limit, else
// block Lanczos with full reorthogonalization on (K + I)^{-1}. Throws
// InvalidArgument for bad k or tol, SolverError on non-convergence (the
// message carries how many pairs converged).
SpectrumReport eigen_lowest(const SymmetricOperator& op, std::size_t k, double tol,
                            const EigenOptions& options = {});

struct ExtremalEigenFields {
  Vector mu;  // lambda_min(V(x_alpha))
  Vector nu;  // lambda_max(V(x_alpha))
};

ExtremalEigenFields pointwise_extremal_eigs(const PotentialField& v);

// Potential field mu(x) I_m or nu(x) I_m from a nodal scalar.
PotentialField scalar_times_identity(const GridSpec& grid, const Vector& scalar);

struct SandwichReport {
  std::vector<double> lambda;        // full vector operator
  std::vector<double> lower;         // vector-diagonal operator with mu I_m
  std::vector<double> upper;         // vector-diagonal operator with nu I_m
  std::vector<double> scalar_lower;  // scalar operator with mu, no multiplicity
  std::vector<double> scalar_upper;
  std::vector<bool> index_passed;
  double max_lower_violation = 0.0;  // max(lower_n - lambda_n)
  double max_upper_violation = 0.0;  // max(lambda_n - upper_n)
  bool passed = false;
};

// lower_n <= lambda_n + tol_n and lambda_n <= upper_n + tol_n for n <= k,
// tol_n = 1e-8 (1 + |lambda_n|).
SandwichReport sandwich_check(const DiffusionField& q, const PotentialField& v, const GridSpec& grid,
                              std::size_t k, const EigenOptions& options = {});

}  // namespace matschrod
