#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library's form or operator code; grids are rebuilt from (d, L, N, m).

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "matschrod/grid.hpp"

namespace oracle {

using matschrod::Matrix;
using matschrod::Point;
using matschrod::Vector;

inline int node_of(const std::array<int, 3>& alpha, int d, int N) {
  int idx = 0;
  for (int i = 0; i < d; ++i) {
    if (alpha[i] < 0 || alpha[i] >= N) return -1;
    idx = idx * N + alpha[i];
  }
  return idx;
}

// a_h(f, g) by a direct loop over cell corners in {-1..N-1}^d, with Q and V
// evaluated from the closures rather than from sampled fields.
template <class QFn, class VFn>
double form_value(int d, double L, int N, int m, const QFn& q_fn, const VFn& v_fn, const Vector& f,
                  const Vector& g) {
  const double h = 2.0 * L / (N + 1);
  const double w = std::pow(h, d);
  auto val = [&](const Vector& x, const std::array<int, 3>& alpha, int j) {
    const int n = node_of(alpha, d, N);
    return n < 0 ? 0.0 : x[n * m + j];
  };
  double total = 0.0;
  const int side = N + 1;
  int corners = 1;
  for (int i = 0; i < d; ++i) corners *= side;
  for (int c = 0; c < corners; ++c) {
    std::array<int, 3> base{0, 0, 0};
    int rest = c;
    for (int i = d - 1; i >= 0; --i) {
      base[i] = rest % side - 1;
      rest /= side;
    }
    Point x(d);
    for (int i = 0; i < d; ++i) x[i] = -L + (base[i] + 1) * h;
    const Matrix q = q_fn(x);
    for (int j = 0; j < m; ++j) {
      Vector df(d), dg(d);
      for (int i = 0; i < d; ++i) {
        std::array<int, 3> up = base;
        up[i] += 1;
        df[i] = (val(f, up, j) - val(f, base, j)) / h;
        dg[i] = (val(g, up, j) - val(g, base, j)) / h;
      }
      total += w * df.dot(q * dg);
    }
  }
  int nodes = 1;
  for (int i = 0; i < d; ++i) nodes *= N;
  for (int n = 0; n < nodes; ++n) {
    Point x(d);
    int rest = n;
    for (int i = d - 1; i >= 0; --i) {
      x[i] = -L + (rest % N + 1) * h;
      rest /= N;
    }
    total += w * f.segment(n * m, m).dot(v_fn(x) * g.segment(n * m, m));
  }
  return total;
}

// Eigenvalues of the 1D Dirichlet second difference -D^2 on N nodes.
inline std::vector<double> laplacian_1d(int N, double L) {
  const double h = 2.0 * L / (N + 1);
  std::vector<double> out;
  for (int k = 1; k <= N; ++k) {
    const double s = std::sin(k * std::numbers::pi / (2.0 * (N + 1)));
    out.push_back(4.0 / (h * h) * s * s);
  }
  return out;
}

// Lowest `count` eigenvalues of the d-dimensional discrete Laplacian, each
// repeated m times (m decoupled components).
inline std::vector<double> laplacian_spectrum(int d, int N, double L, int m, std::size_t count) {
  const std::vector<double> one = laplacian_1d(N, L);
  std::vector<double> all;
  if (d == 1) {
    all = one;
  } else if (d == 2) {
    for (double a : one)
      for (double b : one) all.push_back(a + b);
  } else {
    for (double a : one)
      for (double b : one)
        for (double c : one) all.push_back(a + b + c);
  }
  std::vector<double> out;
  for (double x : all)
    for (int j = 0; j < m; ++j) out.push_back(x);
  std::sort(out.begin(), out.end());
  out.resize(std::min(count, out.size()));
  return out;
}

// Closed-form eigenvalues of a symmetric 2x2 matrix, ascending.
inline std::array<double, 2> eig2(double a, double b, double c) {
  const double mean = 0.5 * (a + c);
  const double rad = std::hypot(0.5 * (a - c), b);
  return {mean - rad, mean + rad};
}

inline Vector random_vector(std::mt19937_64& rng, Eigen::Index n, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

inline matschrod::VectorState random_state(const matschrod::GridSpec& g, std::mt19937_64& rng, double amp = 1.0,
                                           bool nonnegative = false) {
  return matschrod::VectorState(
      g, random_vector(rng, static_cast<Eigen::Index>(g.state_size()), nonnegative ? 0.0 : -amp, amp));
}

// Symmetric matrix with spectrum in [lo, hi].
inline Matrix random_spd(std::mt19937_64& rng, int n, double lo, double hi) {
  Matrix a = Matrix::NullaryExpr(n, n, [&]() { return std::normal_distribution<double>()(rng); });
  Eigen::HouseholderQR<Matrix> qr(a);
  const Matrix q = qr.householderQ();
  const Vector eig = random_vector(rng, n, lo, hi);
  return q * eig.asDiagonal() * q.transpose();
}

// Smoothly varying coefficient families with random parameters.
struct RandomFields {
  Matrix q0, q1;  // Q(x) = q0 + sin(x_0) q1 (kept elliptic)
  Matrix v0, v1;  // V(x) = v0 + |x|^2 v1
  bool diagonal_q = true;

  Matrix q(const Point& x) const { return q0 + std::sin(x[0]) * q1; }
  Matrix v(const Point& x) const { return v0 + x.squaredNorm() * v1; }
};

// Diagonal or full Q with eigenvalues in [0.5, 2]; PSD V. With
// `nonpositive_offdiag` the off-diagonals of V are <= 0.
inline RandomFields random_fields(std::mt19937_64& rng, int d, int m, bool diagonal_q, bool nonpositive_offdiag) {
  RandomFields r;
  r.diagonal_q = diagonal_q;
  if (diagonal_q) {
    r.q0 = random_vector(rng, d, 0.8, 1.5).asDiagonal();
    r.q1 = random_vector(rng, d, -0.2, 0.2).asDiagonal();
  } else {
    r.q0 = random_spd(rng, d, 0.8, 1.5);
    r.q1 = 0.2 * random_spd(rng, d, -1.0, 1.0);
  }
  if (nonpositive_offdiag) {
    // Diagonally dominant with nonpositive off-diagonals: PSD.
    Matrix a = Matrix::Zero(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j) a(i, j) = a(j, i) = -std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    for (int i = 0; i < m; ++i) a(i, i) = -a.row(i).sum() + std::uniform_real_distribution<double>(0.0, 0.5)(rng);
    r.v0 = a;
    r.v1 = Vector::Constant(m, 0.3).asDiagonal();
  } else {
    r.v0 = random_spd(rng, m, 0.0, 2.0);
    r.v1 = random_spd(rng, m, 0.0, 0.5);
  }
  return r;
}

}  // namespace oracle
