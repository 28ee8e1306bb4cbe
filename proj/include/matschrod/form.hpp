#pragma once

#include <utility>
#include <vector>

#include "matschrod/grid.hpp"

namespace matschrod {

// Discrete form
//
//   a_h(f, g) = sum_cells h^d sum_j <Q(x_c) D f_j(x_c), D g_j(x_c)>
//             + sum_nodes h^d <V(x_alpha) f(x_alpha), g(x_alpha)>
//
// with D the forward-difference gradient at the cell base corner x_c and
// Q sampled there. Values on the boundary are zero.
class FormAssembly {
 public:
  struct Cell {
    std::size_t corner = 0;  // index into the diffusion samples
    std::size_t base = kBoundary;
    std::array<std::size_t, 3> forward_node{kBoundary, kBoundary, kBoundary};
  };

  FormAssembly(const DiffusionField& q, const PotentialField& v);

  const GridSpec& grid() const { return grid_; }
  const DiffusionField& diffusion() const { return q_; }
  const PotentialField& potential() const { return v_; }
  const std::vector<Cell>& cells() const { return cells_; }
  double eta1() const { return q_.eta1(); }
  double eta2() const { return q_.eta2(); }
  bool diagonal_diffusion() const { return q_.diagonal(); }

  // Gradient part with Q, only.
  double gradient_part(const VectorState& f, const VectorState& g) const;
  // Gradient part with Q replaced by the identity.
  double plain_gradient_part(const VectorState& f, const VectorState& g) const;
  double potential_part(const VectorState& f, const VectorState& g) const;

 private:
  void check(const VectorState& f) const;
  template <class Coefficient>
  double gradient_sum(const VectorState& f, const VectorState& g, Coefficient coeff, bool diagonal) const;

  GridSpec grid_;
  DiffusionField q_;
  PotentialField v_;
  std::vector<Cell> cells_;
};

// Throws InvalidArgument on grid mismatch, EllipticityError if eta1 <= 0.
FormAssembly assemble_form(const DiffusionField& q, const PotentialField& v, const GridSpec& grid);

double eval_form(const FormAssembly& a, const VectorState& f, const VectorState& g);
inline double eval_form(const FormAssembly& a, const VectorState& f) { return eval_form(a, f, f); }

// (|f|_2^2 + sum_j |D f_j|^2 + <V f, f>_h)^(1/2), identity in the gradient
// term. Throws InvalidArgument when V is not PSD.
double a_norm(const FormAssembly& a, const VectorState& f);

// (1 ∧ |f|) sign(f) nodewise, sign(0) = 0.
VectorState project_unit_ball(const VectorState& f);

// Componentwise positive and negative parts, f = f_plus - f_minus.
std::pair<VectorState, VectorState> split_pos_neg(const VectorState& f);

// Nodewise Euclidean norm |f(x_alpha)|.
Vector abs_field(const VectorState& f);

// a(f) - a(Pf) for the unit-ball projection P. Requires a diagonal
// diffusion field unless `informational` is set (GuaranteeUnavailable
// otherwise), and PSD V.
double beurling_denny_gap(const FormAssembly& a, const VectorState& f, bool informational = false);

// a(f+, f-). Same precondition on Q as beurling_denny_gap.
double pos_form_cross(const FormAssembly& a, const VectorState& f, bool informational = false);

// |a(f, g)| / (|f|_a |g|_a). Returns 0 if a denominator vanishes together
// with a(f, g); throws InvalidArgument if it vanishes alone.
double continuity_ratio(const FormAssembly& a, const VectorState& f, const VectorState& g);

}  // namespace matschrod
