#include "matschrod/gallery.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace matschrod {

namespace {

Matrix identity_q(const Point& x) { return Matrix::Identity(x.size(), x.size()); }

double square_norm(const Point& x) { return x.squaredNorm(); }

// Lowest k eigenvalues of the scalar operator -Laplacian + coefficient v on the problem grid.
std::vector<double> scalar_block_spectrum(const GalleryProblem& problem, const ScalarFunction& v, double coefficient,
                                          std::size_t k, const EigenOptions& options) {
  const GridSpec g = GridSpec::build(problem.d, problem.L, problem.N, 1);
  const auto v_fn = [&](const Point& x) { return Matrix::Constant(1, 1, coefficient * v(x)); };
  const SampledFields f = sample_fields(problem.q_fn, v_fn, g);
  const SymmetricOperator op = assemble_operator(assemble_form(f.diffusion, f.potential, g));
  EigenOptions opts = options;
  opts.keep_vectors = false;
  return eigen_lowest(op, std::min(k, op.dimension()), 1e-10, opts).eigenvalues;
}

// Smooth integrands of the sequences f_n, g_n.
double phi_n(double x, int n) { return bump_phi(std::abs(x) / n); }

double dphi_n(double x, int n) {
  const double y = x / n;
  const double s = y > 0.0 ? 1.0 : (y < 0.0 ? -1.0 : 0.0);
  return bump_phi_derivative(std::abs(y)) * s;
}

struct Integrals {
  double cross = 0.0;
  double signed_cross = 0.0;
  double gradient = 0.0;
  double l2 = 0.0;
};

Integrals simpson(int n, std::size_t intervals) {
  const double a = -2.0 * n;
  const double b = 2.0 * n;
  const double step = (b - a) / static_cast<double>(intervals);
  Integrals sum;
  for (std::size_t i = 0; i <= intervals; ++i) {
    const double x = a + step * static_cast<double>(i);
    const double w = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    const double phi = phi_n(x, n);
    const double r2 = 1.0 + x * x;
    const double deriv = dphi_n(x, n) / n / std::sqrt(r2) - phi * x / std::pow(r2, 1.5);
    sum.cross += w * std::abs(x) / r2 * phi;
    sum.signed_cross += w * x * phi * phi / r2;
    sum.gradient += w * deriv * deriv;
    sum.l2 += w * phi * phi / r2;
  }
  const double scale = step / 3.0;
  sum.cross *= scale;
  sum.signed_cross *= scale;
  sum.gradient *= scale;
  sum.l2 *= scale;
  return sum;
}

double rel_diff(double a, double b) {
  const double den = std::max(std::abs(a), std::abs(b));
  return den > 0.0 ? std::abs(a - b) / den : 0.0;
}

}  // namespace

GalleryProblem harmonic_oscillator(double L, int N) {
  GalleryProblem p;
  p.name = "harmonic_oscillator";
  p.description = "d=1, m=1, Q=1, V=x^2; eigenvalues of -A near 1, 3, 5, 7, 9";
  p.d = 1;
  p.L = L;
  p.N = N;
  p.m = 1;
  p.q_fn = identity_q;
  p.v_fn = [](const Point& x) { return Matrix::Constant(1, 1, x.squaredNorm()); };
  p.v_scalar = square_norm;
  p.expected.positive = true;
  p.expected.sandwich_applicable = true;
  p.expected.reference_spectrum = {1.0, 3.0, 5.0, 7.0, 9.0};
  p.expected.reference_rel_tol = 5e-3;
  p.expected.mu_offset = 0.0;
  return p;
}

Matrix jm_matrix(int m) {
  if (m < 2) throw InvalidArgument("J_m needs m >= 2");
  Matrix j = Matrix::Constant(m, m, -1.0);
  j.diagonal().setConstant(m - 1.0);
  return j;
}

Matrix jm_eigenbasis(int m) {
  if (m < 2) throw InvalidArgument("J_m needs m >= 2");
  Matrix p = Matrix::Zero(m, m);
  p.col(0).setConstant(1.0 / std::sqrt(static_cast<double>(m)));
  for (int k = 1; k < m; ++k) {
    const double norm = std::sqrt(static_cast<double>(k) * (k + 1));
    for (int i = 0; i < k; ++i) p(i, k) = 1.0 / norm;
    p(k, k) = -static_cast<double>(k) / norm;
  }
  return p;
}

GalleryProblem degenerate_counterexample(double L, int N, int m, ScalarFunction v_fn, int d) {
  if (!v_fn) v_fn = square_norm;
  GalleryProblem p;
  p.name = "degenerate_counterexample";
  p.description = "V = v(x) J_m with Q = I: PSD, positive semigroup, mu = 0, spectrum splits into blocks";
  p.d = d;
  p.L = L;
  p.N = N;
  p.m = m;
  p.q_fn = identity_q;
  const Matrix j = jm_matrix(m);
  p.v_fn = [j, v_fn](const Point& x) { return Matrix(v_fn(x) * j); };
  p.v_scalar = v_fn;
  const GridSpec g = p.grid();
  for (std::size_t a = 0; a < g.node_count(); ++a) {
    if (v_fn(g.coordinates(a)) < 0.0) throw InvalidArgument("degenerate_counterexample: v must be nonnegative");
  }
  p.expected.positive = true;
  p.expected.sandwich_applicable = true;
  BlockDecomposition dec;
  dec.basis = jm_eigenbasis(m);
  dec.blocks = {{0.0, 1}, {static_cast<double>(m), m - 1}};
  p.expected.decomposition = dec;
  return p;
}

GalleryProblem coupled_confining(double L, int N, int m, int d) {
  if (m < 2) throw InvalidArgument("coupled_confining needs m >= 2");
  GalleryProblem p;
  p.name = "coupled_confining";
  p.description = "V = (1+|x|^2) I + W, W constant with nonpositive off-diagonals; mu(x) = 3/4 + |x|^2";
  p.d = d;
  p.L = L;
  p.N = N;
  p.m = m;
  p.q_fn = identity_q;
  Matrix w = Matrix::Constant(m, m, -1.0 / (4.0 * (m - 1)));
  w.diagonal().setZero();
  p.v_fn = [w, m](const Point& x) { return Matrix((1.0 + x.squaredNorm()) * Matrix::Identity(m, m) + w); };
  p.v_scalar = square_norm;
  p.expected.positive = true;
  p.expected.sandwich_applicable = true;
  p.expected.mu_offset = 0.75;
  return p;
}

GalleryProblem perturb_structure(const GalleryProblem& problem, double eps) {
  GalleryProblem p = problem;
  p.name = problem.name + "_perturbed";
  const MatrixFunction base = problem.v_fn;
  p.v_fn = [base, eps](const Point& x) {
    Matrix v = base(x);
    v(0, 0) += eps * bump_phi(x);
    return v;
  };
  return p;
}

Matrix antisymmetric_potential(const Point& x) {
  Matrix v(2, 2);
  v << 0.0, -x[0], x[0], 0.0;
  return v;
}

MergeReport spectrum_merge_check(const GalleryProblem& problem, std::size_t k, double tol,
                                 const EigenOptions& options) {
  if (!problem.expected.decomposition || !problem.v_scalar) {
    throw InvalidArgument("spectrum_merge_check needs a problem with a block decomposition");
  }
  const BlockDecomposition& dec = *problem.expected.decomposition;
  const GridSpec grid = problem.grid();
  if (k < 1 || k > grid.state_size()) throw InvalidArgument("spectrum_merge_check: k out of range");

  MergeReport r;
  {
    Matrix diag = Matrix::Zero(problem.m, problem.m);
    int col = 0;
    for (const auto& b : dec.blocks)
      for (int c = 0; c < b.multiplicity; ++c, ++col) diag(col, col) = b.coefficient;
    r.basis_defect = (dec.basis.transpose() * jm_matrix(problem.m) * dec.basis - diag).cwiseAbs().maxCoeff();
  }

  const SampledFields f = problem.sample();
  const SymmetricOperator op = assemble_operator(assemble_form(f.diffusion, f.potential, grid));
  EigenOptions opts = options;
  opts.keep_vectors = false;
  r.vector_eigs = eigen_lowest(op, k, 1e-10, opts).eigenvalues;

  for (const auto& b : dec.blocks) {
    const std::vector<double> eigs = scalar_block_spectrum(problem, problem.v_scalar, b.coefficient, k, options);
    for (int c = 0; c < b.multiplicity; ++c) r.merged_eigs.insert(r.merged_eigs.end(), eigs.begin(), eigs.end());
    r.block_eigs.push_back(eigs);
  }
  std::sort(r.merged_eigs.begin(), r.merged_eigs.end());
  r.merged_eigs.resize(k);

  r.passed = true;
  for (std::size_t n = 0; n < k; ++n) {
    const double dev = std::abs(r.vector_eigs[n] - r.merged_eigs[n]) / (1.0 + std::abs(r.vector_eigs[n]));
    r.deviation.push_back(dev);
    r.max_deviation = std::max(r.max_deviation, dev);
    if (dev > tol) r.passed = false;
  }
  return r;
}

std::vector<ContinuityDemoRow> antisymmetric_continuity_demo(const std::vector<int>& n_list, int quad_points) {
  if (n_list.empty()) throw InvalidArgument("antisymmetric_continuity_demo needs at least one n");
  if (quad_points < 2) throw InvalidArgument("antisymmetric_continuity_demo needs quad_points >= 2");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] < 1 || (i > 0 && n_list[i] <= n_list[i - 1])) {
      throw InvalidArgument("n_list must be increasing positive integers");
    }
  }
  const int max_n = n_list.back();
  const double step = std::min(0.01, 4.0 * max_n / quad_points);
  std::vector<ContinuityDemoRow> rows;
  for (int n : n_list) {
    auto intervals = static_cast<std::size_t>(std::ceil(4.0 * n / step));
    if (intervals % 2 == 1) ++intervals;
    const Integrals coarse = simpson(n, intervals);
    const Integrals fine = simpson(n, 2 * intervals);
    ContinuityDemoRow row;
    row.n = n;
    row.step = 4.0 * n / static_cast<double>(intervals);
    row.cross = fine.cross;
    row.signed_cross = fine.signed_cross;
    row.gradient = fine.gradient;
    row.l2 = fine.l2;
    row.a_norm_sq = fine.l2 + fine.gradient;
    row.ratio = row.cross / row.a_norm_sq;
    row.halving_disagreement = std::max({rel_diff(coarse.cross, fine.cross), rel_diff(coarse.gradient, fine.gradient),
                                         rel_diff(coarse.l2, fine.l2)});
    if (row.halving_disagreement > 0.01) {
      throw SolverError("antisymmetric_continuity_demo: quadrature under-resolved for n = " + std::to_string(n));
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<GalleryEntry> gallery_catalog() {
  return {
      {"harmonic_oscillator", "d=1, m=1, V=x^2: eigenvalues near 1, 3, 5, 7, 9"},
      {"degenerate_counterexample", "V = |x|^2 J_m: PSD and positive, but mu = 0; spectrum merges scalar blocks"},
      {"coupled_confining", "V = (1+|x|^2) I + W with nonpositive off-diagonals: confining and positive"},
      {"antisymmetric_continuity", "V = ((0,-x),(x,0)): the form continuity ratio grows with n"},
  };
}

GalleryProblem make_gallery_problem(const std::string& name, int d, double L, int N, int m) {
  if (name == "harmonic_oscillator") {
    if (d != 1 || m != 1) throw InvalidArgument("harmonic_oscillator is defined for d = 1, m = 1");
    return harmonic_oscillator(L, N);
  }
  if (name == "degenerate_counterexample") return degenerate_counterexample(L, N, m, {}, d);
  if (name == "coupled_confining") return coupled_confining(L, N, m, d);
  throw InvalidArgument("unknown gallery problem '" + name + "'");
}

}  // namespace matschrod
