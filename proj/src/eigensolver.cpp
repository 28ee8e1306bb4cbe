#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include "matschrod/operator.hpp"

namespace matschrod {

namespace {

void fill_residuals(const SymmetricOperator& op, SpectrumReport& r) {
  r.residuals.clear();
  for (Eigen::Index c = 0; c < r.eigenvectors.cols(); ++c) {
    const Vector v = r.eigenvectors.col(c);
    r.residuals.push_back((op.generator() * v - r.eigenvalues[static_cast<std::size_t>(c)] * v).norm());
  }
}

SpectrumReport dense_lowest(const SymmetricOperator& op, std::size_t k, double tol, bool keep_vectors) {
  const Matrix dense = Matrix(op.generator());
  Eigen::SelfAdjointEigenSolver<Matrix> es(dense);
  if (es.info() != Eigen::Success) throw SolverError("dense symmetric eigensolver failed");
  SpectrumReport r;
  r.method = "dense";
  r.tolerance = tol;
  r.norm_bound = op.norm_bound();
  const auto kk = static_cast<Eigen::Index>(k);
  r.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + kk);
  r.eigenvectors = es.eigenvectors().leftCols(kk);
  fill_residuals(op, r);
  if (!keep_vectors) r.eigenvectors.resize(0, 0);
  return r;
}

int default_block_size(const GridSpec& g) {
  static constexpr int kDegeneracy[3] = {1, 2, 6};
  return std::clamp(g.components() * kDegeneracy[g.dim() - 1], 2, 24);
}

// Orthonormalizes the columns of x against the first `used` columns of basis
// (two passes of classical Gram-Schmidt) and among themselves. Columns that
// collapse are replaced by fresh random directions.
void orthonormalize_block(Matrix& x, const Matrix& basis, Eigen::Index used, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    for (int attempt = 0; attempt < 4; ++attempt) {
      const double before = x.col(c).norm();
      for (int pass = 0; pass < 2; ++pass) {
        if (used > 0) x.col(c) -= basis.leftCols(used) * (basis.leftCols(used).transpose() * x.col(c));
        if (c > 0) x.col(c) -= x.leftCols(c) * (x.leftCols(c).transpose() * x.col(c));
      }
      const double after = x.col(c).norm();
      if (after > 1e-10 * std::max(before, 1e-300)) {
        x.col(c) /= after;
        break;
      }
      for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, c) = normal(rng);
    }
  }
}

SpectrumReport lanczos_lowest(const SymmetricOperator& op, std::size_t k, double tol, const EigenOptions& options) {
  const SparseMatrix& K = op.generator();
  const Eigen::Index n = K.rows();
  SparseMatrix shifted = K;
  SparseMatrix eye(n, n);
  eye.setIdentity();
  shifted += eye;  // K - sigma I with sigma = -1
  Eigen::SimplicialLDLT<SparseMatrix> solver(shifted);
  if (solver.info() != Eigen::Success) throw SolverError("factorization of K + I failed");

  const int b = std::min<Eigen::Index>(options.block_size > 0 ? options.block_size : default_block_size(op.grid()), n);
  const Eigen::Index max_basis = std::min<Eigen::Index>(static_cast<Eigen::Index>(options.max_basis), n);
  const auto kk = static_cast<Eigen::Index>(k);
  const double threshold = tol * op.norm_bound();

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  Matrix basis(n, max_basis);
  Matrix applied(n, max_basis);  // (K + I)^{-1} basis
  Matrix projected = Matrix::Zero(max_basis, max_basis);

  Matrix block(n, b);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int c = 0; c < b; ++c) block(i, c) = normal(rng);
  orthonormalize_block(block, basis, 0, rng);

  SpectrumReport r;
  r.method = "lanczos";
  r.tolerance = tol;
  r.norm_bound = op.norm_bound();
  Eigen::Index used = 0;
  int iterations = 0;
  std::size_t converged_count = 0;
  // Rayleigh-Ritz is O(used^3); run it at geometrically spaced sizes.
  Eigen::Index next_check = std::min<Eigen::Index>(kk + b, n);
  while (true) {
    const Eigen::Index width = std::min<Eigen::Index>(b, max_basis - used);
    basis.middleCols(used, width) = block.leftCols(width);
    for (Eigen::Index c = 0; c < width; ++c) applied.col(used + c) = solver.solve(Vector(block.col(c)));
    const Eigen::Index total = used + width;
    projected.block(0, used, total, width) = basis.leftCols(total).transpose() * applied.middleCols(used, width);
    projected.block(used, 0, width, total) = projected.block(0, used, total, width).transpose();
    used = total;
    ++iterations;

    if (used >= next_check || used == max_basis) {
      next_check = used + std::max<Eigen::Index>(b, used / 8);
      Matrix h = projected.topLeftCorner(used, used);
      h = (0.5 * (h + h.transpose())).eval();
      Eigen::SelfAdjointEigenSolver<Matrix> es(h);
      // Largest theta of (K + I)^{-1} are the smallest lambda of K.
      r.eigenvalues.clear();
      r.eigenvectors.resize(n, kk);
      for (Eigen::Index c = 0; c < kk; ++c) {
        const Eigen::Index idx = used - 1 - c;
        r.eigenvalues.push_back(1.0 / es.eigenvalues()[idx] - 1.0);
        r.eigenvectors.col(c) = basis.leftCols(used) * es.eigenvectors().col(idx);
        r.eigenvectors.col(c).normalize();
      }
      fill_residuals(op, r);
      converged_count = static_cast<std::size_t>(
          std::count_if(r.residuals.begin(), r.residuals.end(), [&](double res) { return res <= threshold; }));
      if (converged_count == k) break;
      if (used == max_basis) {
        r.converged = false;
        r.iterations = iterations;
        std::ostringstream os;
        os << "Lanczos did not converge: " << converged_count << " of " << k << " eigenpairs within tolerance after "
           << used << " basis vectors";
        throw SolverError(os.str());
      }
    }
    // Next block: (K + I)^{-1} applied to the newest block, orthogonalized.
    block.leftCols(width) = applied.middleCols(used - width, width);
    orthonormalize_block(block, basis, used, rng);
  }
  // Ritz values may come out of order by roundoff.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(kk));
  for (Eigen::Index i = 0; i < kk; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index c) {
    return r.eigenvalues[static_cast<std::size_t>(a)] < r.eigenvalues[static_cast<std::size_t>(c)];
  });
  SpectrumReport sorted = r;
  for (Eigen::Index i = 0; i < kk; ++i) {
    const auto src = order[static_cast<std::size_t>(i)];
    sorted.eigenvalues[static_cast<std::size_t>(i)] = r.eigenvalues[static_cast<std::size_t>(src)];
    sorted.residuals[static_cast<std::size_t>(i)] = r.residuals[static_cast<std::size_t>(src)];
    sorted.eigenvectors.col(i) = r.eigenvectors.col(src);
  }
  sorted.iterations = iterations;
  if (!options.keep_vectors) sorted.eigenvectors.resize(0, 0);
  return sorted;
}

}  // namespace

SpectrumReport eigen_lowest(const SymmetricOperator& op, std::size_t k, double tol, const EigenOptions& options) {
  if (k < 1 || k > op.dimension()) throw InvalidArgument("eigen_lowest: k must be in [1, dimension]");
  if (!(tol > 0.0)) throw InvalidArgument("eigen_lowest: tolerance must be positive");
  bool dense = false;
  switch (options.method) {
    case EigenMethod::kDense:
      dense = true;
      break;
    case EigenMethod::kLanczos:
      dense = false;
      break;
    case EigenMethod::kAuto:
      dense = op.dimension() <= options.dense_limit;
      break;
  }
  if (dense) return dense_lowest(op, k, tol, options.keep_vectors);
  return lanczos_lowest(op, k, tol, options);
}

}  // namespace matschrod
