#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "matschrod/semigroup.hpp"

namespace matschrod {

namespace {

struct LanczosBasis {
  Matrix basis;        // n x dim
  Matrix tridiagonal;  // dim x dim
  double next_beta = 0.0;
  bool breakdown = false;
  int dim = 0;
};

// Lanczos with full reorthogonalization started from w / |w|.
LanczosBasis lanczos(const SparseMatrix& K, const Vector& w, double beta, int m, double breakdown_tol) {
  const Eigen::Index n = K.rows();
  const int max_dim = static_cast<int>(std::min<Eigen::Index>(m, n));
  LanczosBasis lb;
  lb.basis.resize(n, max_dim);
  Vector alpha = Vector::Zero(max_dim);
  Vector betas = Vector::Zero(max_dim);
  lb.basis.col(0) = w / beta;
  int dim = 0;
  for (int j = 0; j < max_dim; ++j) {
    Vector u = K * lb.basis.col(j);
    alpha[j] = lb.basis.col(j).dot(u);
    u -= alpha[j] * lb.basis.col(j);
    if (j > 0) u -= betas[j - 1] * lb.basis.col(j - 1);
    for (int pass = 0; pass < 2; ++pass) u -= lb.basis.leftCols(j + 1) * (lb.basis.leftCols(j + 1).transpose() * u);
    const double b = u.norm();
    dim = j + 1;
    betas[j] = b;
    if (b <= breakdown_tol) {
      lb.breakdown = true;
      break;
    }
    if (j + 1 < max_dim) lb.basis.col(j + 1) = u / b;
  }
  if (dim == n) lb.breakdown = true;
  lb.dim = dim;
  lb.next_beta = lb.breakdown ? 0.0 : betas[dim - 1];
  lb.tridiagonal = Matrix::Zero(dim, dim);
  for (int j = 0; j < dim; ++j) {
    lb.tridiagonal(j, j) = alpha[j];
    if (j + 1 < dim) lb.tridiagonal(j, j + 1) = lb.tridiagonal(j + 1, j) = betas[j];
  }
  lb.basis.conservativeResize(n, dim);
  return lb;
}

}  // namespace

KrylovResult krylov_expmv(const SparseMatrix& K, const Vector& v, double t, int krylov_dim, double tol) {
  if (t < 0.0) throw InvalidArgument("krylov_expmv: t must be nonnegative");
  if (krylov_dim < 2) throw InvalidArgument("krylov_expmv: Krylov dimension must be >= 2");
  if (!(tol > 0.0)) throw InvalidArgument("krylov_expmv: tolerance must be positive");
  KrylovResult result;
  result.value = v;
  result.krylov_dim = krylov_dim;
  const double normv = v.norm();
  if (t == 0.0 || normv == 0.0) return result;

  double anorm = 0.0;
  {
    Vector row_abs = Vector::Zero(K.rows());
    for (int col = 0; col < K.outerSize(); ++col)
      for (SparseMatrix::InnerIterator it(K, col); it; ++it) row_abs[it.row()] += std::abs(it.value());
    anorm = row_abs.maxCoeff();
  }
  const double breakdown_tol = 1e-13 * std::max(anorm, 1.0) * 1e-3;

  int m = krylov_dim;
  for (int restart = 0; restart <= 3; ++restart) {
    Vector w = v;
    double t_now = 0.0;
    double total_error = 0.0;
    double tau = anorm > 0.0 ? std::min(t, 0.5 * m / anorm) : t;
    int steps = 0;
    bool stalled = false;
    while (t_now < t) {
      const double beta = w.norm();
      if (beta == 0.0) break;
      const LanczosBasis lb = lanczos(K, w, beta, m, breakdown_tol * beta);
      Eigen::SelfAdjointEigenSolver<Matrix> es(lb.tridiagonal);
      const Vector& theta = es.eigenvalues();
      const Matrix& y = es.eigenvectors();
      const Vector y0 = y.row(0).transpose();
      if (lb.breakdown) {
        // Invariant subspace: the projection is exact for any remaining time.
        tau = t - t_now;
      }
      while (true) {
        const Vector coeff = (y * ((-tau * theta.array()).exp().matrix().cwiseProduct(y0))).eval();
        const double err = lb.breakdown ? 0.0 : beta * lb.next_beta * std::abs(coeff[lb.dim - 1]);
        const double allowed = tol * normv * tau / t;
        if (err <= allowed) {
          w = beta * (lb.basis * coeff);
          t_now = (t - t_now - tau <= 1e-15 * t) ? t : t_now + tau;
          total_error += err;
          ++steps;
          const double grow = err > 0.0 ? std::clamp(0.9 * std::pow(allowed / err, 1.0 / m), 1.0, 5.0) : 5.0;
          tau = std::min(t - t_now, tau * grow);
          break;
        }
        tau *= std::clamp(0.9 * std::pow(allowed / err, 1.0 / m), 0.1, 0.9);
        if (tau < 1e-14 * t) {
          stalled = true;
          break;
        }
      }
      if (stalled || steps > 1000000) {
        stalled = true;
        break;
      }
    }
    if (!stalled) {
      result.value = w;
      result.error_estimate = total_error;
      result.steps = steps;
      result.restarts = restart;
      result.krylov_dim = m;
      return result;
    }
    m *= 2;
  }
  throw SolverError("krylov_expmv: step size collapsed after 3 restarts with larger subspaces");
}

}  // namespace matschrod
