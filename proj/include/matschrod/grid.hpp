#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "matschrod/errors.hpp"

namespace matschrod {

using Point = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using MultiIndex = std::array<int, 3>;

inline constexpr std::size_t kBoundary = std::numeric_limits<std::size_t>::max();
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Uniform grid of N^d interior nodes on [-L, L]^d with zero Dirichlet data.
//
// Node x_alpha has coordinates -L + (alpha_i + 1) h, h = 2L/(N+1). Nodes are
// enumerated lexicographically in alpha (alpha_0 slowest). A state stores
// its m components contiguously per node: index = node * m + component.
//
// Cells are indexed by their base corner c in {-1, ..., N-1}^d; a cell's
// forward differences use c and c + e_i, either of which may lie on the
// boundary where values vanish.
class GridSpec {
 public:
  // Throws InvalidArgument unless d in {1,2,3}, L > 0, N >= 2, m >= 1.
  static GridSpec build(int d, double L, int N, int m);

  int dim() const { return d_; }
  double half_width() const { return L_; }
  int nodes_per_axis() const { return N_; }
  int components() const { return m_; }
  double spacing() const { return h_; }

  std::size_t node_count() const { return node_count_; }
  std::size_t state_size() const { return node_count_ * static_cast<std::size_t>(m_); }
  std::size_t cell_count() const { return cell_count_; }

  // h^d, the quadrature weight of one node.
  double cell_volume() const { return cell_volume_; }
  // (N h)^d.
  double volume() const;

  MultiIndex multi_index(std::size_t node) const;
  std::size_t node_index(const MultiIndex& alpha) const;
  Point coordinates(std::size_t node) const;

  // Base corner multi-index of cell `cell` (entries in [-1, N-1]).
  MultiIndex cell_corner(std::size_t cell) const;
  Point corner_coordinates(std::size_t cell) const;
  // Node index of corner + offset, or kBoundary if it leaves the interior.
  std::size_t shifted_node(const MultiIndex& corner, int axis) const;
  std::size_t corner_node(const MultiIndex& corner) const;

  // Visits every axis-aligned edge (a, b = a + e_axis) that touches at least
  // one interior node, including half-edges to the boundary. Boundary ends
  // are passed as kBoundary.
  void for_each_edge(const std::function<void(std::size_t a, std::size_t b, int axis)>& fn) const;

  bool operator==(const GridSpec& other) const;
  bool operator!=(const GridSpec& other) const { return !(*this == other); }

 private:
  GridSpec() = default;

  int d_ = 1;
  double L_ = 1.0;
  int N_ = 2;
  int m_ = 1;
  double h_ = 1.0;
  double cell_volume_ = 1.0;
  std::size_t node_count_ = 0;
  std::size_t cell_count_ = 0;
};

// Grid function f: nodes -> R^m; zero on the boundary by construction.
class VectorState {
 public:
  explicit VectorState(const GridSpec& grid);
  VectorState(const GridSpec& grid, Vector values);

  const GridSpec& grid() const { return grid_; }
  const Vector& values() const { return values_; }
  Vector& values() { return values_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }

  double& at(std::size_t node, int component) {
    return values_[static_cast<Eigen::Index>(node * grid_.components() + component)];
  }
  double at(std::size_t node, int component) const {
    return values_[static_cast<Eigen::Index>(node * grid_.components() + component)];
  }
  auto node_value(std::size_t node) const {
    return values_.segment(static_cast<Eigen::Index>(node * grid_.components()), grid_.components());
  }
  auto node_value(std::size_t node) {
    return values_.segment(static_cast<Eigen::Index>(node * grid_.components()), grid_.components());
  }

 private:
  GridSpec grid_;
  Vector values_;
};

using MatrixFunction = std::function<Matrix(const Point&)>;

// Samples of Q at every cell base corner; interior nodes are the corners
// with all entries >= 0, so this contains the node samples.
class DiffusionField {
 public:
  static DiffusionField from_samples(const GridSpec& grid, std::vector<Matrix> corner_samples);

  const GridSpec& grid() const { return grid_; }
  const Matrix& at_cell(std::size_t cell) const { return samples_[cell]; }
  const std::vector<Matrix>& samples() const { return samples_; }
  double eta1() const { return eta1_; }
  double eta2() const { return eta2_; }
  bool diagonal() const { return diagonal_; }
  bool elliptic() const { return eta1_ > 0.0; }

 private:
  DiffusionField(const GridSpec& grid) : grid_(grid) {}

  GridSpec grid_;
  std::vector<Matrix> samples_;
  double eta1_ = 0.0;
  double eta2_ = 0.0;
  bool diagonal_ = true;
};

// Node samples of V, stored symmetrized. If the raw samples were not
// symmetric, they are also kept (the bilinear form uses them).
class PotentialField {
 public:
  static constexpr double kPsdTolerance = 1e-10;
  static constexpr double kSymmetryTolerance = 1e-12;

  static PotentialField from_samples(const GridSpec& grid, std::vector<Matrix> node_samples);

  const GridSpec& grid() const { return grid_; }
  const Matrix& at(std::size_t node) const { return samples_[node]; }
  const std::vector<Matrix>& samples() const { return samples_; }
  // Raw sample when asymmetric input was given, else the symmetric one.
  const Matrix& raw_at(std::size_t node) const { return raw_.empty() ? samples_[node] : raw_[node]; }

  bool symmetric() const { return max_asymmetry_ <= kSymmetryTolerance; }
  double max_asymmetry() const { return max_asymmetry_; }
  bool psd() const { return min_eigenvalue_ >= -kPsdTolerance; }
  double min_eigenvalue() const { return min_eigenvalue_; }
  double max_eigenvalue() const { return max_eigenvalue_; }
  // max over nodes and i != j of v_ij; -inf when m == 1.
  double off_diagonal_max() const { return off_diagonal_max_; }
  double max_diagonal() const { return max_diagonal_; }

 private:
  PotentialField(const GridSpec& grid) : grid_(grid) {}

  GridSpec grid_;
  std::vector<Matrix> samples_;
  std::vector<Matrix> raw_;
  double max_asymmetry_ = 0.0;
  double min_eigenvalue_ = 0.0;
  double max_eigenvalue_ = 0.0;
  double off_diagonal_max_ = -kInfinity;
  double max_diagonal_ = -kInfinity;
};

struct SampledFields {
  DiffusionField diffusion;
  PotentialField potential;
};

// Evaluates q_fn at cell corners (d x d) and v_fn at nodes (m x m).
// Throws InvalidArgument on wrong shapes or non-finite samples.
SampledFields sample_fields(const MatrixFunction& q_fn, const MatrixFunction& v_fn, const GridSpec& grid);

DiffusionField sample_diffusion(const MatrixFunction& q_fn, const GridSpec& grid);
PotentialField sample_potential(const MatrixFunction& v_fn, const GridSpec& grid);

// (sum_alpha h^d |f(x_alpha)|^p)^(1/p) with |.| Euclidean over components;
// p = kInfinity gives the max of |f(x_alpha)|. Throws for p < 1.
double mixed_norm(const VectorState& f, double p);

// Radial bump: 1 on |x| <= 1, 0 on |x| >= 2, quintic smoothstep between.
double bump_phi(double radius);
double bump_phi(const Point& x);
// d/dr of bump_phi(r).
double bump_phi_derivative(double radius);

// phi((x - center) / scale) placed in one component.
VectorState bump_state(const GridSpec& grid, const Point& center, double scale, int component);

}  // namespace matschrod
