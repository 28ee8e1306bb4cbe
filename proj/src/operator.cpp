#include "matschrod/operator.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace matschrod {

SymmetricOperator::SymmetricOperator(const GridSpec& grid, SparseMatrix stiffness, SparseMatrix generator,
                                     Metadata meta)
    : grid_(grid), stiffness_(std::move(stiffness)), generator_(std::move(generator)), meta_(meta) {
  Vector row_abs = Vector::Zero(generator_.rows());
  for (int col = 0; col < generator_.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(generator_, col); it; ++it) row_abs[it.row()] += std::abs(it.value());
  norm_bound_ = row_abs.size() ? row_abs.maxCoeff() : 0.0;
}

SymmetricOperator SymmetricOperator::from_generator(const GridSpec& grid, SparseMatrix generator, Metadata meta) {
  if (static_cast<std::size_t>(generator.rows()) != grid.state_size() || generator.rows() != generator.cols()) {
    throw InvalidArgument("generator must be square of size m * N^d");
  }
  generator.makeCompressed();
  SparseMatrix stiffness = generator * grid.cell_volume();
  SymmetricOperator op(grid, std::move(stiffness), std::move(generator), meta);
  if (op.symmetry_defect() != 0.0) throw InvalidArgument("generator is not exactly symmetric");
  return op;
}

double SymmetricOperator::symmetry_defect() const {
  const SparseMatrix t = generator_.transpose();
  double defect = 0.0;
  for (int col = 0; col < generator_.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(generator_, col); it; ++it)
      defect = std::max(defect, std::abs(it.value() - t.coeff(it.row(), it.col())));
  return defect;
}

std::size_t SymmetricOperator::max_row_nonzeros() const {
  // Symmetric: column counts equal row counts.
  std::size_t best = 0;
  for (int col = 0; col < generator_.outerSize(); ++col) {
    std::size_t count = 0;
    for (SparseMatrix::InnerIterator it(generator_, col); it; ++it) ++count;
    best = std::max(best, count);
  }
  return best;
}

SymmetricOperator assemble_operator(const FormAssembly& assembly) {
  const PotentialField& v = assembly.potential();
  if (!v.symmetric()) throw InvalidArgument("operator assembly requires a symmetric potential");
  const GridSpec& grid = assembly.grid();
  const DiffusionField& q = assembly.diffusion();
  const int d = grid.dim();
  const int m = grid.components();
  const auto n = static_cast<Eigen::Index>(grid.state_size());
  const double weight = std::pow(grid.spacing(), d - 2);

  // Upper triangle only, mirrored afterwards, so S_ij and S_ji are the same double.
  std::vector<Eigen::Triplet<double>> upper;
  upper.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(2 * d + m) * 2);
  auto add = [&](std::size_t row, std::size_t col, double value) {
    if (row <= col) upper.emplace_back(static_cast<int>(row), static_cast<int>(col), value);
  };

  struct Stencil {
    std::size_t node[2];
    double coeff[2];
    int count = 0;
  };
  for (const auto& cell : assembly.cells()) {
    const Matrix& qc = q.at_cell(cell.corner);
    Stencil diff[3];
    for (int i = 0; i < d; ++i) {
      Stencil& s = diff[i];
      if (cell.forward_node[i] != kBoundary) {
        s.node[s.count] = cell.forward_node[i];
        s.coeff[s.count++] = 1.0;
      }
      if (cell.base != kBoundary) {
        s.node[s.count] = cell.base;
        s.coeff[s.count++] = -1.0;
      }
    }
    for (int i = 0; i < d; ++i) {
      for (int k = 0; k < d; ++k) {
        const double qik = qc(i, k);
        if (qik == 0.0) continue;
        for (int a = 0; a < diff[i].count; ++a) {
          for (int b = 0; b < diff[k].count; ++b) {
            const double value = weight * qik * diff[i].coeff[a] * diff[k].coeff[b];
            for (int j = 0; j < m; ++j) {
              add(diff[i].node[a] * m + j, diff[k].node[b] * m + j, value);
            }
          }
        }
      }
    }
  }
  const double hd = grid.cell_volume();
  for (std::size_t a = 0; a < grid.node_count(); ++a) {
    const Matrix& va = v.at(a);
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j)
        if (va(i, j) != 0.0) add(a * m + i, a * m + j, hd * va(i, j));
  }

  SparseMatrix u(n, n);
  u.setFromTriplets(upper.begin(), upper.end());
  SparseMatrix stiffness = u.selfadjointView<Eigen::Upper>();
  stiffness.makeCompressed();
  SparseMatrix generator = stiffness / hd;
  generator.makeCompressed();

  SymmetricOperator::Metadata meta;
  meta.eta1 = q.eta1();
  meta.eta2 = q.eta2();
  meta.off_diagonal_max = v.off_diagonal_max();
  meta.diagonal_diffusion = q.diagonal();
  meta.psd_potential = v.psd();
  return SymmetricOperator(grid, std::move(stiffness), std::move(generator), meta);
}

ExtremalEigenFields pointwise_extremal_eigs(const PotentialField& v) {
  const std::size_t n = v.grid().node_count();
  ExtremalEigenFields out{Vector(static_cast<Eigen::Index>(n)), Vector(static_cast<Eigen::Index>(n))};
  for (std::size_t a = 0; a < n; ++a) {
    const Matrix& s = v.at(a);
    double lo = s(0, 0);
    double hi = s(0, 0);
    if (s.rows() > 1) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
      lo = es.eigenvalues()[0];
      hi = es.eigenvalues()[s.rows() - 1];
    }
    out.mu[static_cast<Eigen::Index>(a)] = lo;
    out.nu[static_cast<Eigen::Index>(a)] = hi;
  }
  return out;
}

PotentialField scalar_times_identity(const GridSpec& grid, const Vector& scalar) {
  if (static_cast<std::size_t>(scalar.size()) != grid.node_count()) {
    throw InvalidArgument("scalar field length does not match node count");
  }
  const int m = grid.components();
  std::vector<Matrix> samples;
  samples.reserve(grid.node_count());
  for (Eigen::Index a = 0; a < scalar.size(); ++a) samples.push_back(scalar[a] * Matrix::Identity(m, m));
  return PotentialField::from_samples(grid, std::move(samples));
}

namespace {

std::vector<double> lowest(const DiffusionField& q, const PotentialField& v, const GridSpec& grid, std::size_t k,
                           const EigenOptions& options) {
  const FormAssembly form = assemble_form(q, v, grid);
  const SymmetricOperator op = assemble_operator(form);
  EigenOptions opts = options;
  opts.keep_vectors = false;
  return eigen_lowest(op, std::min(k, op.dimension()), 1e-10, opts).eigenvalues;
}

}  // namespace

SandwichReport sandwich_check(const DiffusionField& q, const PotentialField& v, const GridSpec& grid,
                              std::size_t k, const EigenOptions& options) {
  if (k < 1) throw InvalidArgument("sandwich_check needs k >= 1");
  if (!v.psd()) throw InvalidArgument("sandwich_check needs a positive semidefinite potential");
  if (k > grid.state_size()) throw InvalidArgument("sandwich_check: k exceeds the dimension");
  const ExtremalEigenFields ext = pointwise_extremal_eigs(v);

  SandwichReport r;
  r.lambda = lowest(q, v, grid, k, options);
  r.lower = lowest(q, scalar_times_identity(grid, ext.mu), grid, k, options);
  r.upper = lowest(q, scalar_times_identity(grid, ext.nu), grid, k, options);

  const int m = grid.components();
  const GridSpec scalar_grid = GridSpec::build(grid.dim(), grid.half_width(), grid.nodes_per_axis(), 1);
  const DiffusionField scalar_q = DiffusionField::from_samples(scalar_grid, q.samples());
  const std::size_t ks = (k + m - 1) / m;
  r.scalar_lower = lowest(scalar_q, scalar_times_identity(scalar_grid, ext.mu), scalar_grid, ks, options);
  r.scalar_upper = lowest(scalar_q, scalar_times_identity(scalar_grid, ext.nu), scalar_grid, ks, options);

  r.passed = true;
  for (std::size_t n = 0; n < k; ++n) {
    const double tol = 1e-8 * (1.0 + std::abs(r.lambda[n]));
    const double lo = r.lower[n] - r.lambda[n];
    const double hi = r.lambda[n] - r.upper[n];
    r.max_lower_violation = n == 0 ? lo : std::max(r.max_lower_violation, lo);
    r.max_upper_violation = n == 0 ? hi : std::max(r.max_upper_violation, hi);
    const bool ok = lo <= tol && hi <= tol;
    r.index_passed.push_back(ok);
    r.passed = r.passed && ok;
  }
  return r;
}

}  // namespace matschrod
