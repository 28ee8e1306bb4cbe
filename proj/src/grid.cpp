#include "matschrod/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace matschrod {

namespace {

std::size_t ipow(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

// Eigenvalues of a small symmetric matrix, ascending.
Vector symmetric_eigenvalues(const Matrix& m) {
  if (m.rows() == 1) return m.diagonal();
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

void require_finite(const Matrix& m, const char* what, const Point& x) {
  if (!m.allFinite()) {
    std::ostringstream os;
    os << "non-finite " << what << " sample at x = (" << x.transpose() << ")";
    throw InvalidArgument(os.str());
  }
}

}  // namespace

GridSpec GridSpec::build(int d, double L, int N, int m) {
  if (d < 1 || d > 3) throw InvalidArgument("grid dimension d must be 1, 2 or 3");
  if (!(L > 0.0) || !std::isfinite(L)) throw InvalidArgument("grid half-width L must be positive");
  if (N < 2) throw InvalidArgument("grid needs N >= 2 interior nodes per axis");
  if (m < 1) throw InvalidArgument("number of components m must be >= 1");
  GridSpec g;
  g.d_ = d;
  g.L_ = L;
  g.N_ = N;
  g.m_ = m;
  g.h_ = 2.0 * L / (N + 1);
  g.cell_volume_ = std::pow(g.h_, d);
  g.node_count_ = ipow(static_cast<std::size_t>(N), d);
  g.cell_count_ = ipow(static_cast<std::size_t>(N + 1), d);
  return g;
}

double GridSpec::volume() const { return std::pow(N_ * h_, d_); }

MultiIndex GridSpec::multi_index(std::size_t node) const {
  MultiIndex alpha{0, 0, 0};
  for (int i = d_ - 1; i >= 0; --i) {
    alpha[i] = static_cast<int>(node % N_);
    node /= N_;
  }
  return alpha;
}

std::size_t GridSpec::node_index(const MultiIndex& alpha) const {
  std::size_t idx = 0;
  for (int i = 0; i < d_; ++i) {
    if (alpha[i] < 0 || alpha[i] >= N_) return kBoundary;
    idx = idx * N_ + static_cast<std::size_t>(alpha[i]);
  }
  return idx;
}

Point GridSpec::coordinates(std::size_t node) const {
  const MultiIndex alpha = multi_index(node);
  Point x(d_);
  for (int i = 0; i < d_; ++i) x[i] = -L_ + (alpha[i] + 1) * h_;
  return x;
}

MultiIndex GridSpec::cell_corner(std::size_t cell) const {
  MultiIndex c{0, 0, 0};
  for (int i = d_ - 1; i >= 0; --i) {
    c[i] = static_cast<int>(cell % (N_ + 1)) - 1;
    cell /= (N_ + 1);
  }
  return c;
}

Point GridSpec::corner_coordinates(std::size_t cell) const {
  const MultiIndex c = cell_corner(cell);
  Point x(d_);
  for (int i = 0; i < d_; ++i) x[i] = -L_ + (c[i] + 1) * h_;
  return x;
}

std::size_t GridSpec::shifted_node(const MultiIndex& corner, int axis) const {
  MultiIndex c = corner;
  ++c[axis];
  return node_index(c);
}

std::size_t GridSpec::corner_node(const MultiIndex& corner) const { return node_index(corner); }

void GridSpec::for_each_edge(const std::function<void(std::size_t, std::size_t, int)>& fn) const {
  for (std::size_t cell = 0; cell < cell_count_; ++cell) {
    const MultiIndex c = cell_corner(cell);
    const std::size_t base = corner_node(c);
    for (int axis = 0; axis < d_; ++axis) {
      // An edge along `axis` only exists if the transverse coordinates are interior.
      bool transverse_ok = true;
      for (int k = 0; k < d_; ++k) {
        if (k != axis && c[k] < 0) transverse_ok = false;
      }
      if (!transverse_ok) continue;
      fn(base, shifted_node(c, axis), axis);
    }
  }
}

bool GridSpec::operator==(const GridSpec& o) const {
  return d_ == o.d_ && L_ == o.L_ && N_ == o.N_ && m_ == o.m_;
}

VectorState::VectorState(const GridSpec& grid)
    : grid_(grid), values_(Vector::Zero(static_cast<Eigen::Index>(grid.state_size()))) {}

VectorState::VectorState(const GridSpec& grid, Vector values) : grid_(grid), values_(std::move(values)) {
  if (static_cast<std::size_t>(values_.size()) != grid_.state_size()) {
    throw InvalidArgument("state length does not match m * N^d");
  }
  if (!values_.allFinite()) throw InvalidArgument("state has non-finite entries");
}

DiffusionField DiffusionField::from_samples(const GridSpec& grid, std::vector<Matrix> corner_samples) {
  if (corner_samples.size() != grid.cell_count()) {
    throw InvalidArgument("diffusion field needs one sample per cell corner");
  }
  DiffusionField q(grid);
  q.eta1_ = kInfinity;
  q.eta2_ = -kInfinity;
  const int d = grid.dim();
  for (auto& s : corner_samples) {
    if (s.rows() != d || s.cols() != d) throw InvalidArgument("diffusion sample must be d x d");
    if (!s.allFinite()) throw InvalidArgument("non-finite diffusion sample");
    s = (0.5 * (s + s.transpose())).eval();
    const Vector ev = symmetric_eigenvalues(s);
    q.eta1_ = std::min(q.eta1_, ev[0]);
    q.eta2_ = std::max(q.eta2_, ev[ev.size() - 1]);
    for (int i = 0; i < d; ++i)
      for (int k = 0; k < d; ++k)
        if (i != k && s(i, k) != 0.0) q.diagonal_ = false;
  }
  q.samples_ = std::move(corner_samples);
  return q;
}

PotentialField PotentialField::from_samples(const GridSpec& grid, std::vector<Matrix> node_samples) {
  if (node_samples.size() != grid.node_count()) {
    throw InvalidArgument("potential field needs one sample per node");
  }
  PotentialField v(grid);
  const int m = grid.components();
  v.min_eigenvalue_ = kInfinity;
  v.max_eigenvalue_ = -kInfinity;
  for (const auto& s : node_samples) {
    if (s.rows() != m || s.cols() != m) throw InvalidArgument("potential sample must be m x m");
    if (!s.allFinite()) throw InvalidArgument("non-finite potential sample");
    v.max_asymmetry_ = std::max(v.max_asymmetry_, (s - s.transpose()).cwiseAbs().maxCoeff());
  }
  if (!v.symmetric()) v.raw_ = node_samples;
  for (auto& s : node_samples) {
    s = (0.5 * (s + s.transpose())).eval();
    const Vector ev = symmetric_eigenvalues(s);
    v.min_eigenvalue_ = std::min(v.min_eigenvalue_, ev[0]);
    v.max_eigenvalue_ = std::max(v.max_eigenvalue_, ev[ev.size() - 1]);
    for (int i = 0; i < m; ++i) {
      v.max_diagonal_ = std::max(v.max_diagonal_, s(i, i));
      for (int j = 0; j < m; ++j)
        if (i != j) v.off_diagonal_max_ = std::max(v.off_diagonal_max_, s(i, j));
    }
  }
  v.samples_ = std::move(node_samples);
  return v;
}

DiffusionField sample_diffusion(const MatrixFunction& q_fn, const GridSpec& grid) {
  std::vector<Matrix> samples;
  samples.reserve(grid.cell_count());
  for (std::size_t cell = 0; cell < grid.cell_count(); ++cell) {
    const Point x = grid.corner_coordinates(cell);
    Matrix q = q_fn(x);
    require_finite(q, "diffusion", x);
    samples.push_back(std::move(q));
  }
  return DiffusionField::from_samples(grid, std::move(samples));
}

PotentialField sample_potential(const MatrixFunction& v_fn, const GridSpec& grid) {
  std::vector<Matrix> samples;
  samples.reserve(grid.node_count());
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    const Point x = grid.coordinates(node);
    Matrix v = v_fn(x);
    require_finite(v, "potential", x);
    samples.push_back(std::move(v));
  }
  return PotentialField::from_samples(grid, std::move(samples));
}

SampledFields sample_fields(const MatrixFunction& q_fn, const MatrixFunction& v_fn, const GridSpec& grid) {
  return SampledFields{sample_diffusion(q_fn, grid), sample_potential(v_fn, grid)};
}

double mixed_norm(const VectorState& f, double p) {
  if (!(p >= 1.0)) throw InvalidArgument("mixed_norm needs p >= 1");
  const GridSpec& g = f.grid();
  const std::size_t n = g.node_count();
  if (std::isinf(p)) {
    double mx = 0.0;
    for (std::size_t a = 0; a < n; ++a) mx = std::max(mx, f.node_value(a).norm());
    return mx;
  }
  double sum = 0.0;
  if (p == 2.0) {
    for (std::size_t a = 0; a < n; ++a) sum += f.node_value(a).squaredNorm();
    return std::sqrt(g.cell_volume() * sum);
  }
  for (std::size_t a = 0; a < n; ++a) sum += std::pow(f.node_value(a).norm(), p);
  return std::pow(g.cell_volume() * sum, 1.0 / p);
}

double bump_phi(double r) {
  if (r <= 1.0) return 1.0;
  if (r >= 2.0) return 0.0;
  const double u = r - 1.0;
  return 1.0 - u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

double bump_phi(const Point& x) { return bump_phi(x.norm()); }

double bump_phi_derivative(double r) {
  if (r <= 1.0 || r >= 2.0) return 0.0;
  const double u = r - 1.0;
  return -30.0 * u * u * (1.0 - u) * (1.0 - u);
}

VectorState bump_state(const GridSpec& grid, const Point& center, double scale, int component) {
  if (!(scale > 0.0)) throw InvalidArgument("bump scale must be positive");
  if (component < 0 || component >= grid.components()) throw InvalidArgument("bump component out of range");
  VectorState f(grid);
  for (std::size_t a = 0; a < grid.node_count(); ++a) {
    f.at(a, component) = bump_phi((grid.coordinates(a) - center) / scale);
  }
  return f;
}

}  // namespace matschrod
