#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "matschrod/operator.hpp"

namespace matschrod {

using ScalarFunction = std::function<double(const Point&)>;

// Constant potential shape J = P diag(c_1..c_m) P^T with P orthonormal;
// -A then splits into scalar operators -div(Q grad) + c_k v.
struct BlockDecomposition {
  struct Block {
    double coefficient = 0.0;
    int multiplicity = 1;
  };
  Matrix basis;
  std::vector<Block> blocks;
};

struct ExpectedProperties {
  bool psd = true;
  bool symmetric = true;
  std::optional<bool> positive;
  bool sandwich_applicable = false;
  std::optional<BlockDecomposition> decomposition;
  // Reference eigenvalues of -A and the relative tolerance they hold to.
  std::vector<double> reference_spectrum;
  double reference_rel_tol = 0.0;
  // Pointwise lower bound mu(x) >= mu_offset + |x|^2 when set.
  std::optional<double> mu_offset;
};

struct GalleryProblem {
  std::string name;
  std::string description;
  int d = 1;
  double L = 1.0;
  int N = 2;
  int m = 1;
  MatrixFunction q_fn;
  MatrixFunction v_fn;
  // Scalar profile v(x) for families V = v(x) J.
  ScalarFunction v_scalar;
  ExpectedProperties expected;

  GridSpec grid() const { return GridSpec::build(d, L, N, m); }
  SampledFields sample() const { return sample_fields(q_fn, v_fn, grid()); }
};

// d = 1, m = 1, Q = 1, V = x^2; spectrum near 1, 3, 5, ...
GalleryProblem harmonic_oscillator(double L, int N);

// Diagonal m - 1, off-diagonal -1. Throws InvalidArgument for m < 2.
Matrix jm_matrix(int m);

// Orthonormal eigenbasis of J_m: all-ones / sqrt(m) first, then Helmert
// vectors spanning its complement.
Matrix jm_eigenbasis(int m);

// V = v(x) J_m, Q = I. Default v(x) = |x|^2. Throws InvalidArgument if
// some node sample of v is negative.
GalleryProblem degenerate_counterexample(double L, int N, int m, ScalarFunction v_fn = {}, int d = 1);

// V(x) = (1 + |x|^2) I_m + W, W constant with off-diagonals
// -1 / (4 (m - 1)) and zero diagonal, so lambda_min(W) = -1/4.
GalleryProblem coupled_confining(double L, int N, int m, int d = 1);

// Adds eps * bump(x) e_1 e_1^T to V, breaking the J_m structure but
// leaving the expected decomposition in place (negative control).
GalleryProblem perturb_structure(const GalleryProblem& problem, double eps);

// ((0, -x), (x, 0)) in d = 1.
Matrix antisymmetric_potential(const Point& x);

struct MergeReport {
  std::vector<double> vector_eigs;
  std::vector<double> merged_eigs;
  std::vector<std::vector<double>> block_eigs;
  std::vector<double> deviation;  // |lambda_n - merged_n| / (1 + |lambda_n|)
  double max_deviation = 0.0;
  double basis_defect = 0.0;  // max |P^T J P - diag(c)|
  bool passed = false;
};

// Vector spectrum vs the merged scalar block spectra, index-wise for n <= k.
MergeReport spectrum_merge_check(const GalleryProblem& problem, std::size_t k, double tol,
                                 const EigenOptions& options = {});

struct ContinuityDemoRow {
  int n = 1;
  double cross = 0.0;          // |a(f_n, g_n)|
  double signed_cross = 0.0;   // integral of <V f_n, g_n> with V as written
  double gradient = 0.0;       // a(f_n) = a(g_n)
  double l2 = 0.0;             // |f_n|_2^2
  double a_norm_sq = 0.0;      // l2 + gradient (the potential term vanishes)
  double ratio = 0.0;          // cross / a_norm_sq
  double halving_disagreement = 0.0;
  double step = 0.0;
};

// Composite Simpson quadrature on [-2n, 2n] with step
// min(0.01, 4 max(n) / quad_points); throws SolverError when step halving
// changes any integral by more than 1%.
std::vector<ContinuityDemoRow> antisymmetric_continuity_demo(const std::vector<int>& n_list, int quad_points = 400000);

struct GalleryEntry {
  std::string name;
  std::string description;
};

std::vector<GalleryEntry> gallery_catalog();

// Builds a catalog problem with the given grid and component count.
GalleryProblem make_gallery_problem(const std::string& name, int d, double L, int N, int m);

}  // namespace matschrod
