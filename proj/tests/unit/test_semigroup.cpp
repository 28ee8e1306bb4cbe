#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "oracles.hpp"

#include "matschrod/errors.hpp"
#include "matschrod/semigroup.hpp"

using namespace matschrod;

namespace {

SymmetricOperator build(const GridSpec& g, const MatrixFunction& q, const MatrixFunction& v) {
  const SampledFields s = sample_fields(q, v, g);
  return assemble_operator(assemble_form(s.diffusion, s.potential, g));
}

SymmetricOperator random_operator(std::mt19937_64& rng, const GridSpec& g, bool diagonal_q, bool nonpositive) {
  const oracle::RandomFields rf = oracle::random_fields(rng, g.dim(), g.components(), diagonal_q, nonpositive);
  return build(g, [rf](const Point& x) { return rf.q(x); }, [rf](const Point& x) { return rf.v(x); });
}

PropagatorConfig with(PropagationMethod m) {
  PropagatorConfig c;
  c.method = m;
  return c;
}

double weighted_dot(const VectorState& a, const VectorState& b) {
  return a.grid().cell_volume() * a.values().dot(b.values());
}

}  // namespace

TEST_CASE("propagator basics") {
  std::mt19937_64 rng(31);
  const GridSpec g = GridSpec::build(1, 2.0, 40, 2);
  const SymmetricOperator op = random_operator(rng, g, true, false);
  for (auto m : {PropagationMethod::kExactDense, PropagationMethod::kLanczosExpmv, PropagationMethod::kCrankNicolson}) {
    const Propagator prop(op, with(m));
    const VectorState f = oracle::random_state(g, rng);
    CHECK((prop.apply(f, 0.0).values().array() == f.values().array()).all());
    CHECK_THROWS_AS(prop.apply(f, -1.0), InvalidArgument);
    CHECK_THROWS_AS(prop.apply(VectorState(GridSpec::build(1, 2.0, 41, 2)), 0.1), InvalidArgument);
    CHECK(propagation_method_from_string(to_string(m)) == m);
  }
  CHECK_THROWS_AS(propagation_method_from_string("euler"), InvalidArgument);
}

TEST_CASE("exact propagation matches an independent eigendecomposition") {
  std::mt19937_64 rng(32);
  const GridSpec g = GridSpec::build(2, 1.0, 6, 2);
  const SymmetricOperator op = random_operator(rng, g, false, false);
  const Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(op.stiffness()) / g.cell_volume());
  const Propagator prop(op, with(PropagationMethod::kExactDense));
  const VectorState f = oracle::random_state(g, rng);
  for (double t : {0.001, 0.1, 2.0}) {
    const Vector ref = es.eigenvectors() *
                       ((-t * es.eigenvalues().array()).exp().matrix().cwiseProduct(es.eigenvectors().transpose() * f.values()));
    CHECK((prop.apply(f, t).values() - ref).norm() <= 1e-12 * (1.0 + ref.norm()));
  }
}

TEST_CASE("semigroup law and self-adjointness") {
  std::mt19937_64 rng(33);
  const GridSpec g = GridSpec::build(1, 3.0, 80, 2);
  const SymmetricOperator op = random_operator(rng, g, true, false);
  for (auto m : {PropagationMethod::kExactDense, PropagationMethod::kLanczosExpmv}) {
    const Propagator prop(op, with(m));
    for (int trial = 0; trial < 5; ++trial) {
      const VectorState f = oracle::random_state(g, rng);
      const VectorState h = oracle::random_state(g, rng);
      const double s = 0.05 * (trial + 1), t = 0.3;
      const VectorState ts = prop.apply(prop.apply(f, t), s);
      const VectorState direct = prop.apply(f, s + t);
      CHECK((ts.values() - direct.values()).norm() <= 1e-9 * f.values().norm());
      const double lhs = weighted_dot(prop.apply(f, t), h);
      const double rhs = weighted_dot(f, prop.apply(h, t));
      CHECK(std::abs(lhs - rhs) <= 1e-9 * (mixed_norm(f, 2.0) * mixed_norm(h, 2.0)));
    }
  }
}

TEST_CASE("Krylov and Crank-Nicolson against exact") {
  std::mt19937_64 rng(34);
  const GridSpec g = GridSpec::build(1, 5.0, 300, 1);
  const SymmetricOperator op = build(g, [](const Point&) { return Matrix::Identity(1, 1); },
                                     [](const Point& x) { return Matrix::Constant(1, 1, x.squaredNorm()); });
  const Propagator exact(op, with(PropagationMethod::kExactDense));
  const Propagator krylov(op, with(PropagationMethod::kLanczosExpmv));
  PropagatorConfig cn = with(PropagationMethod::kCrankNicolson);
  cn.cn_steps = 2000;
  const Propagator crank(op, cn);
  const VectorState f = bump_state(g, Point::Zero(1), 1.0, 0);
  const VectorState r = oracle::random_state(g, rng);
  for (double t : {0.01, 0.1, 1.0}) {
    for (const VectorState* x : {&f, &r}) {
      const Vector e = exact.apply(*x, t).values();
      CHECK((krylov.apply(*x, t).values() - e).norm() <= 1e-8 * x->values().norm());
      CHECK(krylov.last_error_estimate() <= 1e-8 * x->values().norm());
    }
    const Vector e = exact.apply(f, t).values();
    CHECK((crank.apply(f, t).values() - e).norm() <= 1e-4 * f.values().norm());
  }
}

TEST_CASE("krylov_expmv edge cases") {
  const GridSpec g = GridSpec::build(1, 1.0, 50, 1);
  const SymmetricOperator op = build(g, [](const Point&) { return Matrix::Identity(1, 1); },
                                     [](const Point&) { return Matrix::Zero(1, 1); });
  const Vector zero = Vector::Zero(50);
  CHECK(krylov_expmv(op.generator(), zero, 1.0, 20, 1e-10).value.isZero());
  // An eigenvector: the Krylov space is one-dimensional, the result exact.
  Vector v(50);
  for (int i = 0; i < 50; ++i) v[i] = std::sin((i + 1) * M_PI / 51.0);
  const double lambda = oracle::laplacian_1d(50, 1.0)[0];
  const KrylovResult r = krylov_expmv(op.generator(), v, 0.5, 20, 1e-10);
  CHECK((r.value - std::exp(-0.5 * lambda) * v).norm() <= 1e-12 * v.norm());
  CHECK_THROWS_AS(krylov_expmv(op.generator(), v, 0.5, 1, 1e-10), InvalidArgument);
}

TEST_CASE("config validation") {
  PropagatorConfig c;
  CHECK_NOTHROW(c.validate(100));
  c.dense_limit = 50;
  CHECK_THROWS_AS(c.validate(100), InvalidArgument);
  c = PropagatorConfig{};
  c.times = {-1.0};
  CHECK_THROWS_AS(c.validate(10), InvalidArgument);
  c = PropagatorConfig{};
  c.p_list = {0.5};
  CHECK_THROWS_AS(c.validate(10), InvalidArgument);
  CHECK(conjugate_exponent(2.0) == 2.0);
  CHECK(conjugate_exponent(1.0) == kInfinity);
  CHECK(conjugate_exponent(kInfinity) == 1.0);
  CHECK(conjugate_exponent(4.0) == doctest::Approx(4.0 / 3.0));
}

TEST_CASE("L^p contraction and interpolation") {
  std::mt19937_64 rng(35);
  const GridSpec g = GridSpec::build(2, 1.5, 10, 2);
  const SymmetricOperator op = random_operator(rng, g, true, false);
  const Propagator prop(op, with(PropagationMethod::kExactDense));
  std::vector<VectorState> fs;
  for (int i = 0; i < 10; ++i) fs.push_back(oracle::random_state(g, rng));
  const ProbeReport r = contraction_probe(prop, fs);
  CHECK(r.passed);
  CHECK(r.rows.size() == 10 * 3 * 4);
  for (const Verdict& v : r.verdicts) CHECK(v.guaranteed);
  for (const ProbeRow& row : r.rows) CHECK(row.ratio <= 1.0 + 1e-8);

  const ProbeReport sc = strong_continuity_probe(prop, fs[0], {1.0, 0.1, 0.01, 0.001}, 4.0);
  CHECK(sc.passed);
  CHECK(sc.rows.size() == 4);
  CHECK(sc.rows.front().t == 1.0);
  CHECK_THROWS_AS(strong_continuity_probe(prop, fs[0], {0.1}, 2.0), InvalidArgument);
  CHECK_THROWS_AS(strong_continuity_probe(prop, fs[0], {0.1}, kInfinity), InvalidArgument);

  const SymmetricOperator full = random_operator(rng, g, false, false);
  const Propagator prop_full(full, with(PropagationMethod::kExactDense));
  const ProbeReport rf = contraction_probe(prop_full, fs);
  for (const Verdict& v : rf.verdicts) CHECK(v.guaranteed == (v.name == "contraction_p=2"));
}

TEST_CASE("positivity dichotomy") {
  std::mt19937_64 rng(36);
  const GridSpec g = GridSpec::build(1, 2.0, 50, 2);
  const std::vector<double> ts{0.01, 0.1, 1.0};
  for (int trial = 0; trial < 6; ++trial) {
    const oracle::RandomFields rf = oracle::random_fields(rng, 1, 2, true, true);
    const SampledFields s = sample_fields([&](const Point& x) { return rf.q(x); },
                                          [&](const Point& x) { return rf.v(x); }, g);
    const SymmetricOperator op = assemble_operator(assemble_form(s.diffusion, s.potential, g));
    const Propagator prop(op, with(PropagationMethod::kExactDense));
    std::vector<VectorState> fs;
    for (int i = 0; i < 5; ++i) fs.push_back(oracle::random_state(g, rng, 1.0, true));
    const ProbeReport r = positivity_probe(prop, s.potential, fs, ts);
    CHECK(r.label == "POSITIVE");
    CHECK(r.passed);
  }

  Matrix v(2, 2);
  v << 1.0, 0.3, 0.3, 1.0;
  const SampledFields s = sample_fields([](const Point&) { return Matrix::Identity(1, 1); },
                                        [&](const Point&) { return v; }, g);
  const SymmetricOperator op = assemble_operator(assemble_form(s.diffusion, s.potential, g));
  const Propagator prop(op, with(PropagationMethod::kExactDense));
  const ProbeReport w = violation_witness(prop, s.potential, 0, 1);
  CHECK(w.label == "WITNESS-FOUND");
  REQUIRE(w.witness);
  CHECK(w.witness->value < 0.0);
  CHECK(g.coordinates(w.witness->node).norm() < 0.5);

  CHECK_THROWS_AS(violation_witness(prop, s.potential, 0, 0), InvalidArgument);
  const Propagator cn(op, with(PropagationMethod::kCrankNicolson));
  CHECK_THROWS_AS(violation_witness(cn, s.potential, 0, 1), InvalidArgument);
  CHECK_THROWS_AS(positivity_probe(cn, s.potential, {VectorState(g)}, ts), InvalidArgument);
  VectorState negative(g);
  negative.at(3, 0) = -1.0;
  CHECK_THROWS_AS(positivity_probe(prop, s.potential, {negative}, ts), InvalidArgument);

  Matrix dv(2, 2);
  dv << 1.0, -0.3, -0.3, 1.0;
  const PotentialField neg = PotentialField::from_samples(g, std::vector<Matrix>(g.node_count(), dv));
  CHECK_THROWS_AS(violation_witness(prop, neg, 0, 1), InvalidArgument);
}

TEST_CASE("witness value follows the short-time expansion") {
  // (T(t) phi e_i)_j = -t v_ji phi + t^2/2 (K^2 phi e_i)_j + O(t^3)
  const GridSpec g = GridSpec::build(1, 2.0, 30, 2);
  Matrix v(2, 2);
  v << 1.0, 0.4, 0.4, 2.0;
  const SampledFields s = sample_fields([](const Point&) { return Matrix::Identity(1, 1); },
                                        [&](const Point&) { return v; }, g);
  const SymmetricOperator op = assemble_operator(assemble_form(s.diffusion, s.potential, g));
  const Propagator prop(op, with(PropagationMethod::kExactDense));
  const VectorState f = bump_state(g, Point::Zero(1), 3.0 * g.spacing(), 0);
  const Matrix k = Matrix(op.generator());
  for (double t : {1e-4, 1e-3}) {
    const Vector out = prop.apply(f, t).values();
    const Vector series = f.values() - t * (k * f.values()) + 0.5 * t * t * (k * (k * f.values()));
    const double third = std::pow(t * op.norm_bound(), 3) / 6.0 * f.values().norm();
    for (std::size_t a = 0; a < g.node_count(); ++a) {
      const auto idx = static_cast<Eigen::Index>(2 * a + 1);
      CHECK(std::abs(out[idx] - series[idx]) <= third + 1e-14);
    }
    const std::size_t mid = g.node_count() / 2;
    CHECK(out[static_cast<Eigen::Index>(2 * mid + 1)] < 0.0);
  }
}
