#include "matschrod/form.hpp"

#include <cmath>

namespace matschrod {

namespace {

inline double value_or_zero(const VectorState& f, std::size_t node, int j) {
  return node == kBoundary ? 0.0 : f.at(node, j);
}

void require_diagonal(const FormAssembly& a, bool informational, const char* what) {
  if (!a.diagonal_diffusion() && !informational) {
    throw GuaranteeUnavailable(std::string(what) +
                               ": inequality is only guaranteed for diagonal diffusion; "
                               "pass informational=true to evaluate anyway");
  }
}

}  // namespace

FormAssembly::FormAssembly(const DiffusionField& q, const PotentialField& v)
    : grid_(q.grid()), q_(q), v_(v) {
  const int d = grid_.dim();
  cells_.reserve(grid_.cell_count());
  for (std::size_t cell = 0; cell < grid_.cell_count(); ++cell) {
    const MultiIndex c = grid_.cell_corner(cell);
    Cell entry;
    entry.corner = cell;
    entry.base = grid_.corner_node(c);
    bool touches_interior = entry.base != kBoundary;
    for (int i = 0; i < d; ++i) {
      entry.forward_node[i] = grid_.shifted_node(c, i);
      touches_interior = touches_interior || entry.forward_node[i] != kBoundary;
    }
    if (touches_interior) cells_.push_back(entry);
  }
}

void FormAssembly::check(const VectorState& f) const {
  if (f.grid() != grid_) throw InvalidArgument("state lives on a different grid than the form");
}

template <class Coefficient>
double FormAssembly::gradient_sum(const VectorState& f, const VectorState& g, Coefficient coeff,
                                  bool diagonal) const {
  check(f);
  check(g);
  const int d = grid_.dim();
  const int m = grid_.components();
  const double weight = std::pow(grid_.spacing(), d - 2);
  double df[3];
  double dg[3];
  double total = 0.0;
  for (const Cell& cell : cells_) {
    double cell_sum = 0.0;
    for (int j = 0; j < m; ++j) {
      const double fb = value_or_zero(f, cell.base, j);
      const double gb = value_or_zero(g, cell.base, j);
      for (int i = 0; i < d; ++i) {
        df[i] = value_or_zero(f, cell.forward_node[i], j) - fb;
        dg[i] = value_or_zero(g, cell.forward_node[i], j) - gb;
      }
      if (diagonal) {
        for (int i = 0; i < d; ++i) cell_sum += coeff(cell.corner, i, i) * df[i] * dg[i];
      } else {
        for (int i = 0; i < d; ++i)
          for (int k = 0; k < d; ++k) cell_sum += coeff(cell.corner, i, k) * df[i] * dg[k];
      }
    }
    total += cell_sum;
  }
  return weight * total;
}

double FormAssembly::gradient_part(const VectorState& f, const VectorState& g) const {
  const auto coeff = [this](std::size_t corner, int i, int k) { return q_.at_cell(corner)(i, k); };
  return gradient_sum(f, g, coeff, q_.diagonal());
}

double FormAssembly::plain_gradient_part(const VectorState& f, const VectorState& g) const {
  const auto coeff = [](std::size_t, int, int) { return 1.0; };
  return gradient_sum(f, g, coeff, true);
}

double FormAssembly::potential_part(const VectorState& f, const VectorState& g) const {
  check(f);
  check(g);
  double total = 0.0;
  for (std::size_t a = 0; a < grid_.node_count(); ++a) {
    total += f.node_value(a).dot(v_.raw_at(a) * g.node_value(a));
  }
  return grid_.cell_volume() * total;
}

FormAssembly assemble_form(const DiffusionField& q, const PotentialField& v, const GridSpec& grid) {
  if (q.grid() != grid || v.grid() != grid) throw InvalidArgument("fields were sampled on a different grid");
  if (!q.elliptic()) throw EllipticityError("diffusion field is not strongly elliptic (eta1 <= 0)");
  return FormAssembly(q, v);
}

double eval_form(const FormAssembly& a, const VectorState& f, const VectorState& g) {
  return a.gradient_part(f, g) + a.potential_part(f, g);
}

double a_norm(const FormAssembly& a, const VectorState& f) {
  if (!a.potential().psd()) throw InvalidArgument("a-norm needs a positive semidefinite potential");
  const double l2 = mixed_norm(f, 2.0);
  const double sq = l2 * l2 + a.plain_gradient_part(f, f) + a.potential_part(f, f);
  return std::sqrt(std::max(sq, 0.0));
}

VectorState project_unit_ball(const VectorState& f) {
  VectorState out(f);
  for (std::size_t a = 0; a < f.grid().node_count(); ++a) {
    const double r = f.node_value(a).norm();
    if (r > 1.0) out.node_value(a) /= r;
  }
  return out;
}

std::pair<VectorState, VectorState> split_pos_neg(const VectorState& f) {
  VectorState plus(f.grid(), f.values().cwiseMax(0.0));
  VectorState minus(f.grid(), (-f.values()).cwiseMax(0.0));
  return {std::move(plus), std::move(minus)};
}

Vector abs_field(const VectorState& f) {
  const std::size_t n = f.grid().node_count();
  Vector out(static_cast<Eigen::Index>(n));
  for (std::size_t a = 0; a < n; ++a) out[static_cast<Eigen::Index>(a)] = f.node_value(a).norm();
  return out;
}

double beurling_denny_gap(const FormAssembly& a, const VectorState& f, bool informational) {
  require_diagonal(a, informational, "beurling_denny_gap");
  if (!a.potential().psd()) throw InvalidArgument("beurling_denny_gap needs a positive semidefinite potential");
  const VectorState pf = project_unit_ball(f);
  return eval_form(a, f) - eval_form(a, pf);
}

double pos_form_cross(const FormAssembly& a, const VectorState& f, bool informational) {
  require_diagonal(a, informational, "pos_form_cross");
  if (!a.potential().symmetric()) throw InvalidArgument("pos_form_cross needs a symmetric potential");
  const auto [plus, minus] = split_pos_neg(f);
  return eval_form(a, plus, minus);
}

double continuity_ratio(const FormAssembly& a, const VectorState& f, const VectorState& g) {
  const double num = std::abs(eval_form(a, f, g));
  const double den = a_norm(a, f) * a_norm(a, g);
  if (den == 0.0) {
    if (num == 0.0) return 0.0;
    throw InvalidArgument("continuity_ratio: zero a-norm with nonzero form value");
  }
  return num / den;
}

}  // namespace matschrod
